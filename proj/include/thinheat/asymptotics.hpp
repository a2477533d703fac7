#pragma once

// The asymptotic approximate solution to the thin-domain heat problem built
// from a solution eta of the limit equation:
//
//   rho_eta(x,t) = eta_bar - k_d^{-1} d (V eta)_bar + eps d (g1 z0 - g0 z1)_bar
//                  + (1/2) d^2 (z1 - z0)_bar,
//   z_i = (1/g) { grad_Gamma g_i . grad_Gamma eta - k_d^{-1} (d°g_i) eta
//                 + k_d^{-2} g_i V^2 eta },
//
// together with its bulk and boundary residuals, the solvability-condition
// residual of the limit equation, and the exponential transform
// chi = e^{-lambda} rho with lambda = -k_d^{-1} d V_bar that removes the
// zeroth-order part of the boundary velocity.
//
// The quadratic coefficient of the d^2 term has two published sign variants;
// both are implemented and the residual-order test discriminates them. The
// default (zeta1_minus_zeta0) is the one consistent with the two-point
// problem that defines the second-order term, and is the one for which the
// boundary residual measures O(eps^2).

#include <cmath>
#include <functional>
#include <optional>

#include "thinheat/bulk_solver.hpp"
#include "thinheat/profiles.hpp"
#include "thinheat/sampling.hpp"
#include "thinheat/surface_calculus.hpp"
#include "thinheat/thin_domain.hpp"

namespace thinheat {

enum class Eta2Variant { zeta1_minus_zeta0, zeta0_minus_zeta1 };

// Left-hand side of the limit equation at (theta, t):
// d°(g eta) - g V H eta - k_d div_Gamma(g grad_Gamma eta).
inline double limit_lhs(const CurveFamily& fam, const ProfilePair& prof, double k_d,
                        const MovingScalar& eta, double th, double t) {
  SurfaceCalculus calc{fam};
  MovingScalar g{[&prof](double a, double b) { return prof.width(a, b); },
                 [&prof](double a, double b) { return prof.width_dtheta(a, b); },
                 [&prof](double a, double b) {
                   return prof.side(1).dtheta2(a, b) - prof.side(0).dtheta2(a, b);
                 },
                 [&prof](double a, double b) { return prof.width_dtime(a, b); }};
  double G = g.value(th, t);
  double eta_v = eta.value(th, t);
  double dcirc_g_eta = calc.material_dt(g, th, t) * eta_v + G * calc.material_dt(eta, th, t);
  double V = fam.normal_velocity(th, t);
  double H = fam.curvature(th, t);
  double J = fam.speed(th, t);
  double div_term = G * calc.surface_laplacian(eta, th, t) +
                    g.dtheta(th, t) * eta.dtheta(th, t) / (J * J);
  return dcirc_g_eta - G * V * H * eta_v - k_d * div_term;
}

struct ApproxSolution {
  CurveFamily family;
  ProfilePair profiles;
  double k_d = 1.0;
  double eps = 0.1;
  MovingScalar eta;
  std::function<double(double, double)> source;  // limit source f(theta, t); empty = 0
  bool ablate_grad_term = false;                 // drop grad g_i . grad eta from zeta_i
  Eta2Variant variant = Eta2Variant::zeta1_minus_zeta0;

  double f_surface(double th, double t) const { return source ? source(th, t) : 0.0; }

  double zeta(int i, double th, double t) const {
    const Profile& gi = profiles.side(i);
    double G = profiles.width(th, t);
    double J = family.speed(th, t);
    double V = family.normal_velocity(th, t);
    double grad_term =
        ablate_grad_term ? 0.0 : gi.dtheta(th, t) * eta.dtheta(th, t) / (J * J);
    double dg = profiles.material_dt(i, th, t, family);
    double ev = eta.value(th, t);
    return (grad_term - dg * ev / k_d + gi.value(th, t) * V * V * ev / (k_d * k_d)) / G;
  }

  // Expansion coefficients as functions of the stretched offset r = d / eps.
  double eta1_r(double r, double th, double t) const {
    return -r * family.normal_velocity(th, t) * eta.value(th, t) / k_d;
  }
  double eta2_r(double r, double th, double t) const {
    double z0 = zeta(0, th, t), z1 = zeta(1, th, t);
    double g0 = profiles.g0(th, t), g1 = profiles.g1(th, t);
    double quad = (variant == Eta2Variant::zeta1_minus_zeta0) ? (z1 - z0) : (z0 - z1);
    return r * (g1 * z0 - g0 * z1) + 0.5 * r * r * quad;
  }

  // rho_eta at an ambient point, assembled from constant extensions.
  double value(const Vec2& x, double t, std::optional<double> hint = std::nullopt) const {
    Projection pr = closest_point(x, t, family, hint);
    double th = pr.p.theta, d = pr.d;
    double ev = eta.value(th, t);
    double V = family.normal_velocity(th, t);
    double z0 = zeta(0, th, t), z1 = zeta(1, th, t);
    double quad = (variant == Eta2Variant::zeta1_minus_zeta0) ? (z1 - z0) : (z0 - z1);
    double eta2_eps = eps * d * (profiles.g1(th, t) * z0 - profiles.g0(th, t) * z1) +
                      0.5 * d * d * quad;
    return ev - d * V * ev / k_d + eta2_eps;
  }

  // Same value assembled as eta + eps*eta1(r) + eps^2*eta2(r) with r = d/eps.
  double value_powers(const Vec2& x, double t) const {
    Projection pr = closest_point(x, t, family);
    double r = pr.d / eps;
    return eta.value(pr.p.theta, t) + eps * eta1_r(r, pr.p.theta, t) +
           eps * eps * eta2_r(r, pr.p.theta, t);
  }
};

struct ResidualEstimate {
  double sup = 0.0;
  double fd_noise = 0.0;  // |sup(h) - sup(2h)| from a repeated coarse-step pass
  int n_samples = 0;
};

namespace detail {

// 4th-order FD time derivative and spatial Laplacian of the evaluator.
inline double fd_dt(const ApproxSolution& ap, const Vec2& x, double t, double h,
                    double hint) {
  return (ap.value(x, t - 2 * h, hint) - 8.0 * ap.value(x, t - h, hint) +
          8.0 * ap.value(x, t + h, hint) - ap.value(x, t + 2 * h, hint)) /
         (12.0 * h);
}

inline double fd_laplacian(const ApproxSolution& ap, const Vec2& x, double t, double h,
                           double hint) {
  double acc = 0.0;
  for (int axis = 0; axis < 2; ++axis) {
    Vec2 e = Vec2::Zero();
    e[axis] = h;
    acc += (-ap.value(x + 2 * e, t, hint) + 16.0 * ap.value(x + e, t, hint) -
            30.0 * ap.value(x, t, hint) + 16.0 * ap.value(x - e, t, hint) -
            ap.value(x - 2 * e, t, hint)) /
           (12.0 * h * h);
  }
  return acc;
}

inline Vec2 fd_gradient(const ApproxSolution& ap, const Vec2& x, double t, double h,
                        double hint) {
  Vec2 g;
  for (int axis = 0; axis < 2; ++axis) {
    Vec2 e = Vec2::Zero();
    e[axis] = h;
    g[axis] = (ap.value(x - 2 * e, t, hint) - 8.0 * ap.value(x - e, t, hint) +
               8.0 * ap.value(x + e, t, hint) - ap.value(x + 2 * e, t, hint)) /
              (12.0 * h);
  }
  return g;
}

}  // namespace detail

// Sup over interior Halton samples of |dt rho_eta - k_d Lap rho_eta - f_bar|.
// Derivatives by 4th-order finite differences (h = 1e-3 in space, 1e-4 in
// time). Throws DerivativeNoise when a doubled-step pass shifts the sup by
// more than 10%.
inline ResidualEstimate bulk_residual(const ApproxSolution& ap, int n_samples,
                                      std::uint64_t seed, double t_end,
                                      bool check_noise = true) {
  ThinDomainSpec spec(ap.family, ap.profiles, ap.eps, ap.k_d);
  const double hx = 1e-3, ht = 1e-4;
  double t_lo = std::max(0.02, 4.0 * ht), t_hi = t_end - t_lo;
  auto sweep = [&](double fx, double ft) {
    double sup = 0.0;
    Halton3 seq(seed);
    for (int i = 0; i < n_samples; ++i) {
      double a, b, c;
      seq(a, b, c);
      double th = two_pi * a, s = b, t = t_lo + (t_hi - t_lo) * c;
      Vec2 x = map_ref_to_phys(th, s, t, spec);
      double r = detail::fd_dt(ap, x, t, ft, th) -
                 ap.k_d * detail::fd_laplacian(ap, x, t, fx, th) - ap.f_surface(th, t);
      sup = std::max(sup, std::abs(r));
    }
    return sup;
  };
  ResidualEstimate est;
  est.n_samples = n_samples;
  est.sup = sweep(hx, ht);
  if (check_noise) {
    double coarse = sweep(2.0 * hx, 2.0 * ht);
    est.fd_noise = std::abs(est.sup - coarse);
    if (est.fd_noise > 0.1 * est.sup)
      throw DerivativeNoise("bulk residual: finite-difference noise above 10% of the residual");
  }
  return est;
}

// Sup over a uniform product grid on both boundary components of
// |d_{nu_eps} rho_eta + k_d^{-1} V_eps rho_eta|.
inline ResidualEstimate boundary_residual(const ApproxSolution& ap, int n_theta, int n_t,
                                          double t_end, bool check_noise = true) {
  ThinDomainSpec spec(ap.family, ap.profiles, ap.eps, ap.k_d);
  const double hx = 1e-3;
  auto sweep = [&](double fx) {
    double sup = 0.0;
    for (int side = 0; side < 2; ++side)
      for (int kt = 1; kt <= n_t; ++kt) {
        double t = t_end * kt / n_t;
        for (int j = 0; j < n_theta; ++j) {
          double th = two_pi * j / n_theta;
          BoundarySample bs = boundary_sample(SurfacePoint(th, t), side, spec);
          Vec2 grad = detail::fd_gradient(ap, bs.x, t, fx, th);
          double r = bs.nu_eps.dot(grad) + bs.V_eps * ap.value(bs.x, t, th) / ap.k_d;
          sup = std::max(sup, std::abs(r));
        }
      }
    return sup;
  };
  ResidualEstimate est;
  est.n_samples = 2 * n_theta * n_t;
  est.sup = sweep(hx);
  if (check_noise) {
    double coarse = sweep(2.0 * hx);
    est.fd_noise = std::abs(est.sup - coarse);
    if (est.fd_noise > 0.1 * est.sup)
      throw DerivativeNoise("boundary residual: finite-difference noise above 10% of the residual");
  }
  return est;
}

// Residual of the compatibility equation tying the second-order expansion
// term to the limit equation:
//   g { k_d^{-1} d°eta + k_d^{-2} V^2 eta - Lap_Gamma eta - k_d^{-1} V H eta
//       - k_d^{-1} f }  -  { grad g . grad eta - k_d^{-1} (d°g) eta
//                            + k_d^{-2} g V^2 eta }.
inline double solvability_lhs_minus_rhs(const CurveFamily& fam, const ProfilePair& prof,
                                        double k_d, const MovingScalar& eta,
                                        const std::function<double(double, double)>& f,
                                        double th, double t) {
  SurfaceCalculus calc{fam};
  double G = prof.width(th, t);
  double J = fam.speed(th, t);
  double V = fam.normal_velocity(th, t);
  double H = fam.curvature(th, t);
  double ev = eta.value(th, t);
  double fv = f ? f(th, t) : 0.0;
  double lhs = G * (calc.material_dt(eta, th, t) / k_d + V * V * ev / (k_d * k_d) -
                    calc.surface_laplacian(eta, th, t) - V * H * ev / k_d - fv / k_d);
  double dg = prof.width_dtime(th, t) -
              fam.tangential_speed(th, t) * prof.width_dtheta(th, t) / J;
  double rhs = prof.width_dtheta(th, t) * eta.dtheta(th, t) / (J * J) - dg * ev / k_d +
               G * V * V * ev / (k_d * k_d);
  return lhs - rhs;
}

inline double solvability_residual(const CurveFamily& fam, const ProfilePair& prof,
                                   double k_d, const MovingScalar& eta,
                                   const std::function<double(double, double)>& f,
                                   double t_end, int n_theta = 128, int n_t = 32) {
  double sup = 0.0;
  for (int kt = 1; kt <= n_t; ++kt)
    for (int j = 0; j < n_theta; ++j)
      sup = std::max(sup, std::abs(solvability_lhs_minus_rhs(
                              fam, prof, k_d, eta, f, two_pi * j / n_theta,
                              t_end * kt / n_t)));
  return sup;
}

// Pointwise gap between the two algebraic forms of the compatibility
// equation: k_d * (LHS - RHS) must equal the limit-equation residual.
inline double solvability_dual_form_gap(const CurveFamily& fam, const ProfilePair& prof,
                                        double k_d, const MovingScalar& eta,
                                        const std::function<double(double, double)>& f,
                                        double t_end, int n_theta = 64, int n_t = 16) {
  double sup = 0.0;
  for (int kt = 1; kt <= n_t; ++kt)
    for (int j = 0; j < n_theta; ++j) {
      double th = two_pi * j / n_theta, t = t_end * kt / n_t;
      double a = k_d * solvability_lhs_minus_rhs(fam, prof, k_d, eta, f, th, t);
      double b = limit_lhs(fam, prof, k_d, eta, th, t) -
                 prof.width(th, t) * (f ? f(th, t) : 0.0);
      sup = std::max(sup, std::abs(a - b));
    }
  return sup;
}

// lambda(x,t) = -k_d^{-1} d(x,t) V_bar(x,t), with full derivative bundle.
inline ScalarBundle lambda_bundle(const Vec2& x, double t, const CurveFamily& fam,
                                  double k_d, std::optional<double> hint = std::nullopt) {
  Projection pr = closest_point(x, t, fam, hint);
  ExtensionFrame fr(fam, pr);
  MovingScalar V = normal_velocity_field(fam);
  SurfaceCalculus calc{fam};
  ScalarBundle vb = fr.extension_bundle(V.value(pr.p.theta, t), V.dtheta(pr.p.theta, t),
                                        V.dtheta2(pr.p.theta, t),
                                        calc.material_dt(V, pr.p.theta, t));
  return (fr.distance_bundle() * vb).scaled(-1.0 / k_d);
}

inline double lambda_value(const Vec2& x, double t, const CurveFamily& fam, double k_d) {
  Projection pr = closest_point(x, t, fam);
  return -pr.d * fam.normal_velocity(pr.p.theta, t) / k_d;
}

enum class TransformDirection { forward, inverse };

// chi = e^{-lambda} rho (forward) and rho = e^{lambda} chi (inverse),
// evaluated pointwise on the reference grid.
inline BulkField lambda_transform(const BulkField& field, TransformDirection dir,
                                  const ThinDomainSpec& spec) {
  BulkField out = field;
  for (int j = 0; j < field.n_theta; ++j) {
    double th = two_pi * j / field.n_theta;
    double V = spec.family.normal_velocity(th, field.t);
    for (int m = 0; m <= field.n_s; ++m) {
      double s = double(m) / field.n_s;
      double r = spec.epsilon *
                 (spec.profiles.g0(th, field.t) + s * spec.profiles.width(th, field.t));
      double lam = -r * V / spec.k_d;
      out.at(j, m) = field.at(j, m) * std::exp(dir == TransformDirection::forward ? -lam : lam);
    }
  }
  return out;
}

// The exponentially transformed problem: chi = e^{-lambda} rho solves the
// general parabolic problem with the coefficients below; solving it and
// mapping back must reproduce the heat solution.
inline BulkProblem lambda_transformed_problem(const BulkProblem& pb) {
  const ThinDomainSpec spec = pb.spec;
  const CurveFamily fam = spec.family;
  double kd = spec.k_d;
  auto lam_at = [spec, fam, kd](double th, double s, double t) {
    Vec2 x = map_ref_to_phys(th, s, t, spec);
    return lambda_bundle(x, t, fam, kd, th);
  };
  BulkProblem out = pb;
  out.drift = [lam_at, kd](double th, double s, double t) -> Vec2 {
    return -2.0 * kd * lam_at(th, s, t).grad;
  };
  out.zeroth = [lam_at, kd](double th, double s, double t) {
    ScalarBundle b = lam_at(th, s, t);
    return b.dt - kd * (b.laplacian() + b.grad.squaredNorm());
  };
  out.robin_coeff = [spec, fam, kd, lam_at](int side, double th, double t) {
    SurfacePoint p(th, t);
    Vec2 nu_e = boundary_normal(p, side, spec);
    double s = (side == 0) ? 0.0 : 1.0;
    return nu_e.dot(lam_at(th, s, t).grad) + boundary_velocity(p, side, spec) / kd;
  };
  auto old_rho0 = pb.rho0;
  out.rho0 = [old_rho0, lam_at](double th, double s) {
    double v = old_rho0 ? old_rho0(th, s) : 0.0;
    return v * std::exp(-lam_at(th, s, 0.0).value);
  };
  if (pb.source) {
    auto old_src = pb.source;
    out.source = [old_src, lam_at](double th, double s, double t) {
      return old_src(th, s, t) * std::exp(-lam_at(th, s, t).value);
    };
  }
  if (pb.robin_rhs) {
    auto old_psi = pb.robin_rhs;
    out.robin_rhs = [old_psi, lam_at](int side, double th, double t) {
      double s = (side == 0) ? 0.0 : 1.0;
      return old_psi(side, th, t) * std::exp(-lam_at(th, s, t).value);
    };
  }
  return out;
}

}  // namespace thinheat
