#pragma once

// Crank-Nicolson solver for the limit equation on the moving curve,
//   d°(g eta) - g V H eta - k_d div_Gamma(g grad_Gamma eta) = g f,
// written in the fixed parameter theta of Phi, where the normal time
// derivative turns into a time derivative at fixed theta plus a tangential
// advection correction:
//   dt(g eta)|_theta - (Phi_t . tau)/J * dtheta(g eta) - g V H eta
//     - k_d (1/J) dtheta( (g/J) dtheta eta ) = g f.
// A Lagrangian variant that rides the normal flow (so d° is a plain time
// derivative at fixed label) is kept as a cross-check.

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "thinheat/curve_family.hpp"
#include "thinheat/periodic_tridiag.hpp"
#include "thinheat/profiles.hpp"
#include "thinheat/surface_field.hpp"

namespace thinheat {

struct LimitProblem {
  CurveFamily family;
  ProfilePair profiles;
  double k_d = 1.0;
  std::vector<double> eta0;                        // initial values on the theta grid
  std::function<double(double, double)> source;    // f(theta, t); empty means 0

  double f(double th, double t) const { return source ? source(th, t) : 0.0; }
};

enum class LimitScheme { fixed_parameter, lagrangian_normal_flow };

struct LimitSolution {
  std::vector<double> times;
  std::vector<std::vector<double>> slices;       // values per time slice
  std::vector<std::vector<double>> node_theta;   // node positions (Lagrangian only)
  LimitScheme scheme = LimitScheme::fixed_parameter;
  CurveFamily family;
  ProfilePair profiles;
  double k_d = 1.0;
  FieldBackend backend = FieldBackend::cubic_spline;
  bool startup_smoothed = false;
  double conservation_drift = 0.0;  // max |I(t) - I(0) - integral of g f| / |I(0)|

  int n_theta() const { return static_cast<int>(slices.front().size()); }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }

  const SurfaceField& slice_field(int k) const {
    build_cache();
    return cache_[static_cast<std::size_t>(k)];
  }

  // Interpolated evaluation in theta (per-slice backend) and t (cubic in the
  // four nearest slices). Only available for the fixed-parameter scheme.
  double eval(double th, double t) const { return eval_impl<0>(th, t); }
  double eval_dtheta(double th, double t) const { return eval_impl<1>(th, t); }
  double eval_dtheta2(double th, double t) const { return eval_impl<2>(th, t); }

  double eval_dt(double th, double t) const {
    // The startup half-steps leave a kink in the error between the first two
    // slices; derivative stencils start past it.
    auto [k0, w] = time_stencil(t, startup_smoothed ? 1 : 0);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) acc += w[4 + i] * slice_field(k0 + i).value(th);
    return acc;
  }

  MovingScalar as_moving_scalar() const {
    const LimitSolution* self = this;
    return {[self](double th, double t) { return self->eval(th, t); },
            [self](double th, double t) { return self->eval_dtheta(th, t); },
            [self](double th, double t) { return self->eval_dtheta2(th, t); },
            [self](double th, double t) { return self->eval_dt(th, t); }};
  }

  // Sup over sampled slices and nodes of |eta| + |d°eta| + |grad eta| + |hess eta|.
  double c21_norm() const {
    if (times.size() < 3) throw GridMismatch("c21_norm: need at least 3 time slices");
    SurfaceCalculus calc{family};
    MovingScalar ms = as_moving_scalar();
    double best = 0.0;
    int n = n_theta();
    for (std::size_t k = 0; k < times.size(); ++k) {
      double t = times[k];
      for (int j = 0; j < n; ++j) {
        double th = two_pi * j / n;
        double v = std::abs(ms.value(th, t));
        double dc = std::abs(calc.material_dt(ms, th, t));
        double gr = calc.surface_gradient(ms, th, t).norm();
        double h2 = calc.second_tangential_norm(ms, th, t);
        best = std::max(best, v + dc + gr + h2);
      }
    }
    return best;
  }

 private:
  template <int Deriv>
  double eval_impl(double th, double t) const {
    auto [k0, w] = time_stencil(t, 0);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      const SurfaceField& f = slice_field(k0 + i);
      if constexpr (Deriv == 0)
        acc += w[i] * f.value(th);
      else if constexpr (Deriv == 1)
        acc += w[i] * f.dtheta(th);
      else
        acc += w[i] * f.dtheta2(th);
    }
    return acc;
  }

  // Cubic Lagrange stencil: start index and 8 weights (4 value, 4 derivative).
  std::pair<int, std::array<double, 8>> time_stencil(double t, int k_min) const {
    if (scheme != LimitScheme::fixed_parameter)
      throw GridMismatch("limit solution interpolation requires the fixed-parameter scheme");
    int nk = static_cast<int>(times.size());
    if (nk < 4 + k_min) throw TimeGridMismatch("limit solution: not enough slices");
    double h = dt();
    int k0 = static_cast<int>(std::floor((t - times.front()) / h)) - 1;
    k0 = std::clamp(k0, k_min, nk - 4);
    std::array<double, 8> w{};
    for (int i = 0; i < 4; ++i) {
      double li = 1.0, dli = 0.0;
      for (int m = 0; m < 4; ++m) {
        if (m == i) continue;
        li *= (t - times[k0 + m]) / (times[k0 + i] - times[k0 + m]);
        double term = 1.0 / (times[k0 + i] - times[k0 + m]);
        for (int r = 0; r < 4; ++r)
          if (r != i && r != m) term *= (t - times[k0 + r]) / (times[k0 + i] - times[k0 + r]);
        dli += term;
      }
      w[i] = li;
      w[4 + i] = dli;
    }
    return {k0, w};
  }

  void build_cache() const {
    if (!cache_.empty()) return;
    cache_.reserve(slices.size());
    for (std::size_t k = 0; k < slices.size(); ++k)
      cache_.emplace_back(times[k], slices[k], backend);
  }

  mutable std::vector<SurfaceField> cache_;
};

class LimitSolver {
 public:
  struct Options {
    int n_theta = 128;
    LimitScheme scheme = LimitScheme::fixed_parameter;
    FieldBackend backend = FieldBackend::cubic_spline;
    bool rannacher_startup = true;  // two backward-Euler half-steps
  };

  explicit LimitSolver(Options opt) : opt_(opt) {
    if (opt_.n_theta < 16 || opt_.n_theta % 2 != 0)
      throw ConfigError("limit solver: n_theta must be even and >= 16");
  }

  // One implicit step from `state` at time t to t + dt.
  std::vector<double> advance(const std::vector<double>& state, double t, double dt,
                              const LimitProblem& pb) const {
    if (static_cast<int>(state.size()) != opt_.n_theta)
      throw GridMismatch("limit solver: state size mismatch");
    std::vector<double> th(opt_.n_theta), q(opt_.n_theta, 1.0);
    for (int j = 0; j < opt_.n_theta; ++j) th[j] = two_pi * j / opt_.n_theta;
    return step_cn(state, th, q, t, dt, pb).first;
  }

  LimitSolution solve(const LimitProblem& pb, double t_end, int n_steps) const {
    if (n_steps < 1) throw ConfigError("limit solver: n_steps must be >= 1");
    const int n = opt_.n_theta;
    if (static_cast<int>(pb.eta0.size()) != n)
      throw GridMismatch("limit solver: eta0 grid does not match solver grid");
    double dt = t_end / n_steps;

    LimitSolution sol;
    sol.scheme = opt_.scheme;
    sol.family = pb.family;
    sol.profiles = pb.profiles;
    sol.k_d = pb.k_d;
    sol.backend = opt_.backend;
    sol.startup_smoothed = opt_.rannacher_startup;

    std::vector<double> w = pb.eta0;
    std::vector<double> th(n), q(n, 1.0);
    for (int j = 0; j < n; ++j) th[j] = two_pi * j / n;

    sol.times.push_back(0.0);
    sol.slices.push_back(w);
    if (opt_.scheme == LimitScheme::lagrangian_normal_flow) sol.node_theta.push_back(th);

    double mass0 = functional_mass(w, th, q, 0.0, pb);
    double source_acc = 0.0;
    double drift = 0.0;

    for (int k = 0; k < n_steps; ++k) {
      double t = k * dt;
      double s_before = source_rate(th, q, t, pb);
      if (k == 0 && opt_.rannacher_startup) {
        auto [w1, g1] = step_be(w, th, q, t, 0.5 * dt, pb);
        auto [w2, g2] = step_be(w1, g1.first, g1.second, t + 0.5 * dt, 0.5 * dt, pb);
        w = w2;
        th = g2.first;
        q = g2.second;
      } else {
        auto [wn, grid] = step_cn(w, th, q, t, dt, pb);
        w = wn;
        th = grid.first;
        q = grid.second;
      }
      double t1 = (k + 1) * dt;
      sol.times.push_back(t1);
      sol.slices.push_back(w);
      if (opt_.scheme == LimitScheme::lagrangian_normal_flow) sol.node_theta.push_back(th);
      source_acc += 0.5 * dt * (s_before + source_rate(th, q, t1, pb));
      double mass = functional_mass(w, th, q, t1, pb);
      if (std::abs(mass0) > 1e-300)
        drift = std::max(drift, std::abs(mass - mass0 - source_acc) / std::abs(mass0));
    }
    sol.conservation_drift = drift;
    if (opt_.scheme == LimitScheme::fixed_parameter)
      sol.slice_field(0);  // build the interpolation cache eagerly
    return sol;
  }

 private:
  using Grid = std::pair<std::vector<double>, std::vector<double>>;  // (theta, dtheta/dY)

  // Row coefficients of the spatial operator L at one node: w' = lo*w_{j-1} +
  // di*w_j + up*w_{j+1} + f.
  struct Stencil {
    double lo, di, up;
  };

  Stencil stencil_at(int j, const std::vector<double>& th, const std::vector<double>& q,
                     double t, const LimitProblem& pb) const {
    const int n = opt_.n_theta;
    const CurveFamily& fam = pb.family;
    double dY = two_pi / n;
    double thj = th[j];
    double G = pb.profiles.width(thj, t);
    double J = fam.speed(thj, t);
    double V = fam.normal_velocity(thj, t);
    double H = fam.curvature(thj, t);
    Stencil st{0.0, 0.0, 0.0};

    if (opt_.scheme == LimitScheme::fixed_parameter) {
      // metric at half points, evaluated exactly
      auto half = [&](double a, double b) {
        double thh = 0.5 * (a + b);
        return pb.profiles.width(thh, t) / fam.speed(thh, t);
      };
      double thm = th[(j - 1 + n) % n], thp = th[(j + 1) % n];
      // unwrap neighbours for half-point evaluation
      double lo_th = thj - dY, up_th = thj + dY;
      double cm = half(lo_th, thj), cp = half(thj, up_th);
      double diff = pb.k_d / (J * dY * dY);
      st.lo += diff * cm;
      st.up += diff * cp;
      st.di -= diff * (cm + cp);
      // advection of (G w) by the tangential parameter speed
      double a_th = fam.tangential_speed(thj, t) / J;
      double Gm = pb.profiles.width(thm, t), Gp = pb.profiles.width(thp, t);
      st.lo += -a_th * Gm / (2.0 * dY);
      st.up += a_th * Gp / (2.0 * dY);
      // reaction: -dt(G)|_theta + G V H
      st.di += -pb.profiles.width_dtime(thj, t) + G * V * H;
      (void)q;
    } else {
      // Lagrangian labels: d° is a plain time derivative; metric J_nu = J * q.
      double Jn = J * q[j];
      double qm = q[(j - 1 + n) % n], qp = q[(j + 1) % n];
      double thm = th[(j - 1 + n) % n], thp = th[(j + 1) % n];
      double cj = G / Jn;
      double cm = 0.5 * (pb.profiles.width(thm, t) / (fam.speed(thm, t) * qm) + cj);
      double cp = 0.5 * (pb.profiles.width(thp, t) / (fam.speed(thp, t) * qp) + cj);
      double diff = pb.k_d / (Jn * dY * dY);
      st.lo += diff * cm;
      st.up += diff * cp;
      st.di -= diff * (cm + cp);
      // reaction: -(d°g) + G V H; d°g along the moving node
      double dg = pb.profiles.exact_material_dt(1, thj, t, fam) -
                  pb.profiles.exact_material_dt(0, thj, t, fam);
      st.di += -dg + G * V * H;
    }
    // divide through by G
    st.lo /= G;
    st.di /= G;
    st.up /= G;
    return st;
  }

  double node_source(int j, const std::vector<double>& th, double t,
                     const LimitProblem& pb) const {
    return pb.f(th[j], t);
  }

  // Advance the Lagrangian node positions/stretch one RK4 step of the
  // parameter form of the normal flow, theta' = -(Phi_t . tau)/J.
  Grid advance_grid(const std::vector<double>& th, const std::vector<double>& q, double t,
                    double dt, const CurveFamily& fam) const {
    if (opt_.scheme == LimitScheme::fixed_parameter) return {th, q};
    auto omega = [&fam](double theta, double tt) {
      return -fam.tangential_speed(theta, tt) / fam.speed(theta, tt);
    };
    auto omega_p = [&fam, &omega](double theta, double tt) {
      double h = 1e-5;
      return (omega(theta + h, tt) - omega(theta - h, tt)) / (2.0 * h);
    };
    Grid g{th, q};
    for (std::size_t j = 0; j < th.size(); ++j) {
      double x = th[j], y = q[j];
      double k1 = omega(x, t), l1 = omega_p(x, t) * y;
      double k2 = omega(x + 0.5 * dt * k1, t + 0.5 * dt),
             l2 = omega_p(x + 0.5 * dt * k1, t + 0.5 * dt) * (y + 0.5 * dt * l1);
      double k3 = omega(x + 0.5 * dt * k2, t + 0.5 * dt),
             l3 = omega_p(x + 0.5 * dt * k2, t + 0.5 * dt) * (y + 0.5 * dt * l2);
      double k4 = omega(x + dt * k3, t + dt),
             l4 = omega_p(x + dt * k3, t + dt) * (y + dt * l3);
      g.first[j] = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
      g.second[j] = y + dt / 6.0 * (l1 + 2 * l2 + 2 * l3 + l4);
    }
    return g;
  }

  std::pair<std::vector<double>, Grid> step_cn(const std::vector<double>& w,
                                               const std::vector<double>& th,
                                               const std::vector<double>& q, double t,
                                               double dt, const LimitProblem& pb) const {
    const int n = opt_.n_theta;
    Grid g1 = advance_grid(th, q, t, dt, pb.family);
    std::vector<double> lo(n), di(n), up(n), rhs(n);
    for (int j = 0; j < n; ++j) {
      Stencil s0 = stencil_at(j, th, q, t, pb);
      Stencil s1 = stencil_at(j, g1.first, g1.second, t + dt, pb);
      int jm = (j - 1 + n) % n, jp = (j + 1) % n;
      double Lw = s0.lo * w[jm] + s0.di * w[j] + s0.up * w[jp];
      rhs[j] = w[j] + 0.5 * dt * (Lw + node_source(j, th, t, pb) +
                                  node_source(j, g1.first, t + dt, pb));
      lo[j] = -0.5 * dt * s1.lo;
      di[j] = 1.0 - 0.5 * dt * s1.di;
      up[j] = -0.5 * dt * s1.up;
    }
    return {solve_periodic_tridiag(lo, di, up, rhs), g1};
  }

  std::pair<std::vector<double>, Grid> step_be(const std::vector<double>& w,
                                               const std::vector<double>& th,
                                               const std::vector<double>& q, double t,
                                               double dt, const LimitProblem& pb) const {
    const int n = opt_.n_theta;
    Grid g1 = advance_grid(th, q, t, dt, pb.family);
    std::vector<double> lo(n), di(n), up(n), rhs(n);
    for (int j = 0; j < n; ++j) {
      Stencil s1 = stencil_at(j, g1.first, g1.second, t + dt, pb);
      rhs[j] = w[j] + dt * node_source(j, g1.first, t + dt, pb);
      lo[j] = -dt * s1.lo;
      di[j] = 1.0 - dt * s1.di;
      up[j] = -dt * s1.up;
    }
    return {solve_periodic_tridiag(lo, di, up, rhs), g1};
  }

  // integral of g*eta over Gamma(t)
  double functional_mass(const std::vector<double>& w, const std::vector<double>& th,
                         const std::vector<double>& q, double t,
                         const LimitProblem& pb) const {
    double dY = two_pi / opt_.n_theta, acc = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      double metric = pb.family.speed(th[j], t) *
                      (opt_.scheme == LimitScheme::fixed_parameter ? 1.0 : q[j]);
      acc += pb.profiles.width(th[j], t) * w[j] * metric;
    }
    return acc * dY;
  }

  double source_rate(const std::vector<double>& th, const std::vector<double>& q, double t,
                     const LimitProblem& pb) const {
    double dY = two_pi / opt_.n_theta, acc = 0.0;
    for (std::size_t j = 0; j < th.size(); ++j) {
      double metric = pb.family.speed(th[j], t) *
                      (opt_.scheme == LimitScheme::fixed_parameter ? 1.0 : q[j]);
      acc += pb.profiles.width(th[j], t) * pb.f(th[j], t) * metric;
    }
    return acc * dY;
  }

  Options opt_;
};

}  // namespace thinheat
