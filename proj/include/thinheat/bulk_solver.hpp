#pragma once

// Implicit solver for the heat problem in the moving thin domain, pulled back
// to the fixed reference rectangle (theta, s) in [0,2pi) x [0,1]:
//
//   dt u = (xdot - b) . grad rho + k_d Lap rho - c rho + f,
//
// where xdot is the grid velocity of the reference map, spatial operators are
// expressed through the map's metric (9-point conservative stencil for the
// curvilinear Laplacian, centered advection), and the velocity-Robin boundary
// condition  d_{nu_eps} rho + beta rho = psi  is imposed as the boundary rows
// of the implicit system with 2nd-order one-sided s-derivatives. The drift b,
// zeroth-order coefficient c and Robin coefficient beta default to the plain
// heat problem (b = 0, c = 0, beta = k_d^{-1} V_eps); they are exposed so the
// exponentially transformed variant of the problem can be solved by the same
// scheme.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "thinheat/limit_solver.hpp"
#include "thinheat/thin_domain.hpp"

namespace thinheat {

struct BulkField {
  double t = 0.0;
  int n_theta = 0;
  int n_s = 0;  // grid has n_s + 1 levels in s
  std::vector<double> values;

  double& at(int j, int m) { return values[static_cast<std::size_t>(j) * (n_s + 1) + m]; }
  double at(int j, int m) const {
    return values[static_cast<std::size_t>(j) * (n_s + 1) + m];
  }
};

struct BulkProblem {
  ThinDomainSpec spec;
  std::function<double(double, double)> rho0;                  // (theta, s)
  std::function<double(double, double, double)> source;        // f(theta, s, t)
  std::function<double(int, double, double)> robin_rhs;        // psi(side, theta, t)
  // generalized coefficients (empty = heat problem defaults)
  std::function<Vec2(double, double, double)> drift;           // b(theta, s, t), ambient
  std::function<double(double, double, double)> zeroth;        // c(theta, s, t)
  std::function<double(int, double, double)> robin_coeff;      // beta(side, theta, t)

  double f(double th, double s, double t) const { return source ? source(th, s, t) : 0.0; }
  double psi(int side, double th, double t) const {
    return robin_rhs ? robin_rhs(side, th, t) : 0.0;
  }
};

struct BulkSolution {
  std::vector<double> times;
  std::vector<BulkField> fields;
  double sup_abs = 0.0;                 // max |u| over all slices
  std::vector<double> mass;             // integral of rho over Omega_eps(t)
  double mass_drift = 0.0;              // relative conservation drift (f = 0 part)
  std::vector<std::string> warnings;

  // Sup over all grid points and slices of |rho - eta(pi(x))|, the surface
  // solution evaluated by interpolation at the node's base parameter.
  double sup_error_vs_surface(const LimitSolution& limit) const {
    double best = 0.0;
    for (const BulkField& f : fields) {
      if (f.t < limit.times.front() - 1e-9 || f.t > limit.times.back() + 1e-9)
        throw TimeGridMismatch("sup_error_vs_surface: limit solution does not cover slice");
      for (int j = 0; j < f.n_theta; ++j) {
        double eta = limit.eval(two_pi * j / f.n_theta, std::min(f.t, limit.times.back()));
        for (int m = 0; m <= f.n_s; ++m)
          best = std::max(best, std::abs(f.at(j, m) - eta));
      }
    }
    return best;
  }
};

class BulkSolver {
 public:
  struct Options {
    int n_theta = 64;
    int n_s = 16;
    bool rannacher_startup = true;
    double diffusion_number_guard = 1e6;
  };

  explicit BulkSolver(Options opt) : opt_(opt) {
    if (opt_.n_theta < 8 || opt_.n_s < 4)
      throw ConfigError("bulk solver: grid too small (need n_theta >= 8, n_s >= 4)");
  }

  BulkField advance(const BulkField& state, double t, double dt,
                    const BulkProblem& pb) const {
    check_grid(state);
    Workspace ws(opt_);
    BulkField out = state;
    step_cn(state.values, out.values, t, dt, pb, ws);
    out.t = t + dt;
    return out;
  }

  BulkSolution solve(const BulkProblem& pb, double t_end, int n_steps) const {
    if (n_steps < 1) throw ConfigError("bulk solver: n_steps must be >= 1");
    const int nth = opt_.n_theta, ns = opt_.n_s;
    double dt = t_end / n_steps;

    BulkSolution sol;
    BulkField u;
    u.t = 0.0;
    u.n_theta = nth;
    u.n_s = ns;
    u.values.resize(static_cast<std::size_t>(nth) * (ns + 1));
    for (int j = 0; j < nth; ++j)
      for (int m = 0; m <= ns; ++m)
        u.at(j, m) = pb.rho0 ? pb.rho0(two_pi * j / nth, double(m) / ns) : 0.0;

    check_diffusion_number(pb, dt, sol);

    Workspace ws(opt_);
    sol.times.push_back(0.0);
    sol.fields.push_back(u);
    sol.mass.push_back(domain_integral(u.values, 0.0, pb, nullptr));
    for (double v : u.values) sol.sup_abs = std::max(sol.sup_abs, std::abs(v));

    double source_acc = 0.0;
    double m0 = sol.mass.front();
    std::vector<double> next(u.values.size());
    for (int k = 0; k < n_steps; ++k) {
      double t = k * dt, t1 = t + dt;
      double s_before = domain_integral(u.values, t, pb, &BulkProblem::source);
      if (k == 0 && opt_.rannacher_startup) {
        std::vector<double> half(u.values.size());
        step_be(u.values, half, t, 0.5 * dt, pb, ws);
        step_be(half, next, t + 0.5 * dt, 0.5 * dt, pb, ws);
      } else {
        step_cn(u.values, next, t, dt, pb, ws);
      }
      u.values.swap(next);
      u.t = t1;
      sol.times.push_back(t1);
      sol.fields.push_back(u);
      source_acc +=
          0.5 * dt * (s_before + domain_integral(u.values, t1, pb, &BulkProblem::source));
      double m = domain_integral(u.values, t1, pb, nullptr);
      sol.mass.push_back(m);
      if (std::abs(m0) > 1e-300)
        sol.mass_drift = std::max(sol.mass_drift, std::abs(m - m0 - source_acc) / std::abs(m0));
      for (double v : u.values) sol.sup_abs = std::max(sol.sup_abs, std::abs(v));
    }
    return sol;
  }

 private:
  struct Workspace {
    Eigen::SparseMatrix<double> A;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    std::vector<Eigen::Triplet<double>> trips;
    bool analyzed = false;
    explicit Workspace(const Options& o) {
      int N = o.n_theta * (o.n_s + 1);
      A.resize(N, N);
    }
  };

  // Pointwise geometry of the reference map at (theta, s, t).
  struct NodeGeom {
    Mat2 F, Finv;
    double D;        // |det F|
    Vec2 xdot;       // grid velocity
    Vec2 x;          // physical position
  };

  NodeGeom geom(double th, double s, double t, const ThinDomainSpec& spec) const {
    const CurveFamily& fam = spec.family;
    const ProfilePair& prof = spec.profiles;
    double eps = spec.epsilon;
    double J = fam.speed(th, t);
    Vec2 tau = fam.tangent(th, t), nu = fam.normal(th, t);
    double kappa = fam.curvature(th, t);
    double g0 = prof.g0(th, t), w = prof.width(th, t);
    double r = eps * (g0 + s * w);
    double r_th = eps * (prof.side(0).dtheta(th, t) +
                         s * (prof.side(1).dtheta(th, t) - prof.side(0).dtheta(th, t)));
    double r_t = eps * (prof.side(0).dtime(th, t) +
                        s * (prof.side(1).dtime(th, t) - prof.side(0).dtime(th, t)));
    NodeGeom g;
    Vec2 x_th = J * (1.0 - r * kappa) * tau + r_th * nu;
    Vec2 x_s = (eps * w) * nu;
    g.F.col(0) = x_th;
    g.F.col(1) = x_s;
    double det = g.F(0, 0) * g.F(1, 1) - g.F(0, 1) * g.F(1, 0);
    if (std::abs(det) < 1e-300) throw SolveFailure("bulk solver: degenerate reference map");
    g.Finv << g.F(1, 1) / det, -g.F(0, 1) / det, -g.F(1, 0) / det, g.F(0, 0) / det;
    g.D = std::abs(det);
    double mu = nu.dot(fam.d_time_theta(th, t)) / J;  // dnu/dt = -mu * tau
    g.xdot = fam.d_time(th, t) + r_t * nu - r * mu * tau;
    g.x = fam.position(th, t) + r * nu;
    return g;
  }

  // Metric coefficients of the conservative Laplacian at (theta, s, t):
  // alpha = M_ss/D, beta = -M_theta_s/D, gamma = M_theta_theta/D.
  struct MetricCoef {
    double alpha, beta, gamma;
  };
  MetricCoef metric(double th, double s, double t, const ThinDomainSpec& spec) const {
    NodeGeom g = geom(th, s, t, spec);
    Vec2 x_th = g.F.col(0), x_s = g.F.col(1);
    double Mtt = x_th.squaredNorm(), Mts = x_th.dot(x_s), Mss = x_s.squaredNorm();
    return {Mss / g.D, -Mts / g.D, Mtt / g.D};
  }

  void check_grid(const BulkField& f) const {
    if (f.n_theta != opt_.n_theta || f.n_s != opt_.n_s)
      throw GridMismatch("bulk solver: field grid does not match solver grid");
  }

  void check_diffusion_number(const BulkProblem& pb, double dt, BulkSolution& sol) const {
    double ds = 1.0 / opt_.n_s;
    double worst = 0.0;
    for (int j = 0; j < opt_.n_theta; ++j) {
      double th = two_pi * j / opt_.n_theta;
      double w = pb.spec.profiles.width(th, 0.0);
      double cell = pb.spec.epsilon * w * ds;
      worst = std::max(worst, pb.spec.k_d * dt / (cell * cell));
    }
    if (worst > opt_.diffusion_number_guard)
      sol.warnings.push_back("StabilityWarning: s-direction diffusion number " +
                             std::to_string(worst) + " exceeds conditioning guard");
  }

  int idx(int j, int m) const { return ((j + opt_.n_theta) % opt_.n_theta) * (opt_.n_s + 1) + m; }

  // Emits the row entries of the interior spatial operator L at time t.
  // emit(row, col, weight); the affine source part is returned via `src`.
  template <class Emit>
  void interior_rows(double t, const BulkProblem& pb, Emit&& emit,
                     std::vector<double>* src) const {
    const int nth = opt_.n_theta, ns = opt_.n_s;
    const double dth = two_pi / nth, ds = 1.0 / ns;
    const double kd = pb.spec.k_d;

    // metric at flux half-points, evaluated exactly once per step
    std::vector<MetricCoef> mth(static_cast<std::size_t>(nth) * (ns + 1));   // (j+1/2, m)
    std::vector<MetricCoef> msv(static_cast<std::size_t>(nth) * ns);         // (j, m+1/2)
    for (int j = 0; j < nth; ++j) {
      for (int m = 0; m <= ns; ++m)
        mth[static_cast<std::size_t>(j) * (ns + 1) + m] =
            metric((j + 0.5) * dth, m * ds, t, pb.spec);
      for (int m = 0; m < ns; ++m)
        msv[static_cast<std::size_t>(j) * ns + m] =
            metric(j * dth, (m + 0.5) * ds, t, pb.spec);
    }

    for (int j = 0; j < nth; ++j) {
      double th = j * dth;
      for (int m = 1; m < ns; ++m) {
        double s = m * ds;
        int row = idx(j, m);
        NodeGeom g = geom(th, s, t, pb.spec);
        double invD = 1.0 / g.D;

        // diffusion: (1/D) [ Dtheta(alpha Dtheta u + beta Ds u) + Ds(beta Dtheta u + gamma Ds u) ]
        const MetricCoef& cp = mth[static_cast<std::size_t>(j) * (ns + 1) + m];
        const MetricCoef& cm = mth[static_cast<std::size_t>((j - 1 + nth) % nth) * (ns + 1) + m];
        const MetricCoef& cu = msv[static_cast<std::size_t>(j) * ns + m];
        const MetricCoef& cd = msv[static_cast<std::size_t>(j) * ns + m - 1];
        double fac = kd * invD / dth;
        // theta-flux at j+1/2
        emit(row, idx(j + 1, m), fac * cp.alpha / dth);
        emit(row, idx(j, m), -fac * cp.alpha / dth);
        // beta * average of centered s-derivatives at (j, m) and (j+1, m)
        double bq = fac * cp.beta * 0.5 / (2.0 * ds);
        emit(row, idx(j, m + 1), bq);
        emit(row, idx(j, m - 1), -bq);
        emit(row, idx(j + 1, m + 1), bq);
        emit(row, idx(j + 1, m - 1), -bq);
        // minus theta-flux at j-1/2
        emit(row, idx(j - 1, m), fac * cm.alpha / dth);
        emit(row, idx(j, m), -fac * cm.alpha / dth);
        double bq2 = fac * cm.beta * 0.5 / (2.0 * ds);
        emit(row, idx(j, m + 1), -bq2);
        emit(row, idx(j, m - 1), bq2);
        emit(row, idx(j - 1, m + 1), -bq2);
        emit(row, idx(j - 1, m - 1), bq2);

        double fs = kd * invD / ds;
        // s-flux at m+1/2
        emit(row, idx(j, m + 1), fs * cu.gamma / ds);
        emit(row, idx(j, m), -fs * cu.gamma / ds);
        double bu = fs * cu.beta * 0.5 / (2.0 * dth);
        emit(row, idx(j + 1, m), bu);
        emit(row, idx(j - 1, m), -bu);
        emit(row, idx(j + 1, m + 1), bu);
        emit(row, idx(j - 1, m + 1), -bu);
        // minus s-flux at m-1/2
        emit(row, idx(j, m - 1), fs * cd.gamma / ds);
        emit(row, idx(j, m), -fs * cd.gamma / ds);
        double bd = fs * cd.beta * 0.5 / (2.0 * dth);
        emit(row, idx(j + 1, m), -bd);
        emit(row, idx(j - 1, m), bd);
        emit(row, idx(j + 1, m - 1), -bd);
        emit(row, idx(j - 1, m - 1), bd);

        // advection by (grid velocity - drift), centered
        Vec2 v = g.xdot;
        if (pb.drift) v -= pb.drift(th, s, t);
        Vec2 a = g.Finv * v;
        emit(row, idx(j + 1, m), a.x() / (2.0 * dth));
        emit(row, idx(j - 1, m), -a.x() / (2.0 * dth));
        emit(row, idx(j, m + 1), a.y() / (2.0 * ds));
        emit(row, idx(j, m - 1), -a.y() / (2.0 * ds));

        // zeroth-order term
        if (pb.zeroth) emit(row, idx(j, m), -pb.zeroth(th, s, t));

        if (src) (*src)[row] = pb.f(th, s, t);
      }
    }
  }

  // Robin boundary rows at time t: emit matrix entries; rhs gets psi.
  template <class Emit>
  void boundary_rows(double t, const BulkProblem& pb, Emit&& emit,
                     std::vector<double>* rhs) const {
    const int nth = opt_.n_theta, ns = opt_.n_s;
    const double dth = two_pi / nth, ds = 1.0 / ns;
    for (int j = 0; j < nth; ++j) {
      double th = j * dth;
      for (int side = 0; side < 2; ++side) {
        int m = (side == 0) ? 0 : ns;
        int row = idx(j, m);
        SurfacePoint p(th, t);
        NodeGeom g = geom(th, double(m) / ns, t, pb.spec);
        Vec2 nu_e = boundary_normal(p, side, pb.spec);
        Vec2 b = g.Finv * nu_e;
        double beta = pb.robin_coeff
                          ? pb.robin_coeff(side, th, t)
                          : boundary_velocity(p, side, pb.spec) / pb.spec.k_d;
        emit(row, idx(j + 1, m), b.x() / (2.0 * dth));
        emit(row, idx(j - 1, m), -b.x() / (2.0 * dth));
        double sg = (side == 0) ? 1.0 : -1.0;  // one-sided stencil direction
        int st = (side == 0) ? 1 : -1;
        emit(row, idx(j, m), sg * (-3.0) * b.y() / (2.0 * ds));
        emit(row, idx(j, m + st), sg * 4.0 * b.y() / (2.0 * ds));
        emit(row, idx(j, m + 2 * st), sg * (-1.0) * b.y() / (2.0 * ds));
        emit(row, idx(j, m), beta);
        if (rhs) (*rhs)[row] = pb.psi(side, th, t);
      }
    }
  }

  void step_cn(const std::vector<double>& u, std::vector<double>& out, double t,
               double dt, const BulkProblem& pb, Workspace& ws) const {
    step_theta(u, out, t, dt, pb, ws, 0.5);
  }
  void step_be(const std::vector<double>& u, std::vector<double>& out, double t,
               double dt, const BulkProblem& pb, Workspace& ws) const {
    step_theta(u, out, t, dt, pb, ws, 1.0);
  }

  // theta-method step: theta = 1/2 (Crank-Nicolson) or 1 (backward Euler).
  void step_theta(const std::vector<double>& u, std::vector<double>& out, double t,
                  double dt, const BulkProblem& pb, Workspace& ws, double theta) const {
    const int N = opt_.n_theta * (opt_.n_s + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);
    std::vector<double> src_new(static_cast<std::size_t>(N), 0.0);

    if (theta < 1.0) {
      // explicit part: u + (1-theta) dt (L^n u + f^n)
      std::vector<double> Lu(static_cast<std::size_t>(N), 0.0);
      std::vector<double> src_old(static_cast<std::size_t>(N), 0.0);
      interior_rows(
          t, pb,
          [&](int row, int col, double w) { Lu[row] += w * u[static_cast<std::size_t>(col)]; },
          &src_old);
      for (int i = 0; i < N; ++i)
        rhs[i] = u[static_cast<std::size_t>(i)] +
                 (1.0 - theta) * dt * (Lu[static_cast<std::size_t>(i)] +
                                       src_old[static_cast<std::size_t>(i)]);
    } else {
      for (int i = 0; i < N; ++i) rhs[i] = u[static_cast<std::size_t>(i)];
    }

    // implicit part: (I - theta dt L^{n+1}) with Robin rows replacing s-extremes
    ws.trips.clear();
    std::vector<double> rhs_bc(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < N; ++i) ws.trips.emplace_back(i, i, 1.0);
    interior_rows(
        t + dt, pb,
        [&](int row, int col, double w) { ws.trips.emplace_back(row, col, -theta * dt * w); },
        &src_new);
    for (int j = 0; j < opt_.n_theta; ++j)
      for (int m = 1; m < opt_.n_s; ++m) {
        int row = idx(j, m);
        rhs[row] += theta * dt * src_new[static_cast<std::size_t>(row)];
      }

    // boundary rows: wipe the identity row and install the BC stencil
    std::vector<Eigen::Triplet<double>> bc_trips;
    boundary_rows(
        t + dt, pb,
        [&](int row, int col, double w) { bc_trips.emplace_back(row, col, w); }, &rhs_bc);

    // assemble: identity+interior triplets, then zero out boundary rows and add BC
    const int ns = opt_.n_s;
    auto is_boundary = [ns](int row) {
      int m = row % (ns + 1);
      return m == 0 || m == ns;
    };
    std::vector<Eigen::Triplet<double>> all;
    all.reserve(ws.trips.size() + bc_trips.size());
    for (const auto& tr : ws.trips)
      if (!is_boundary(tr.row())) all.push_back(tr);
    for (const auto& tr : bc_trips) all.push_back(tr);
    ws.A.setFromTriplets(all.begin(), all.end());

    for (int i = 0; i < N; ++i)
      if (is_boundary(i)) rhs[i] = rhs_bc[static_cast<std::size_t>(i)];

    if (!ws.analyzed) {
      ws.lu.analyzePattern(ws.A);
      ws.analyzed = true;
    }
    ws.lu.factorize(ws.A);
    if (ws.lu.info() != Eigen::Success)
      throw SolveFailure("bulk solver: sparse factorization failed");
    Eigen::VectorXd x = ws.lu.solve(rhs);
    if (ws.lu.info() != Eigen::Success)
      throw SolveFailure("bulk solver: sparse solve failed");
    out.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) out[static_cast<std::size_t>(i)] = x[i];
  }

  // integral over Omega_eps(t) of u (weight = nullptr) or of the source term.
  double domain_integral(const std::vector<double>& u, double t, const BulkProblem& pb,
                         std::function<double(double, double, double)> BulkProblem::*which) const {
    const int nth = opt_.n_theta, ns = opt_.n_s;
    const double dth = two_pi / nth, ds = 1.0 / ns;
    double acc = 0.0;
    for (int j = 0; j < nth; ++j) {
      double th = j * dth;
      for (int m = 0; m <= ns; ++m) {
        double s = m * ds;
        double w = (m == 0 || m == ns) ? 0.5 : 1.0;
        double val;
        if (which == nullptr) {
          val = u[static_cast<std::size_t>(idx(j, m))];
        } else {
          const auto& fn = pb.*which;
          val = fn ? fn(th, s, t) : 0.0;
        }
        acc += w * val * ref_jacobian_det(th, s, t, pb.spec);
      }
    }
    return acc * dth * ds;
  }

  Options opt_;
};

}  // namespace thinheat
