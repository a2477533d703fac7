#pragma once

// The moving thin domain Omega_eps(t) between the offsets eps*g0 and eps*g1 of
// Gamma(t): boundary normal and velocity, the auxiliary tangent vector tau_eps
// and auxiliary function sigma_eps, and the reference-coordinate map
// (theta, s) in [0,2pi) x [0,1] -> Omega_eps(t).

#include <cmath>

#include "thinheat/curve_family.hpp"
#include "thinheat/profiles.hpp"
#include "thinheat/surface_calculus.hpp"
#include "thinheat/tubular.hpp"

namespace thinheat {

struct ThinDomainSpec {
  CurveFamily family;
  ProfilePair profiles;
  double epsilon = 0.1;
  double k_d = 1.0;  // diffusivity

  ThinDomainSpec(CurveFamily fam, ProfilePair prof, double eps, double kd)
      : family(std::move(fam)), profiles(prof), epsilon(eps), k_d(kd) {
    validate();
  }

  void validate() const {
    if (k_d <= 0.0) throw ConfigError("thin domain: k_d must be positive");
    if (epsilon <= 0.0) throw ConfigError("thin domain: epsilon must be positive");
    double T = family.time_horizon();
    double cg = profiles.min_width(T);
    if (cg <= 0.0) throw ConfigError("thin domain: profile positivity violated (g1 <= g0)");
    double eps0 = family.tubular_radius() / profiles.max_abs_offset(T);
    if (epsilon > eps0)
      throw ConfigError("thin domain: epsilon exceeds admissible eps0 = " +
                        std::to_string(eps0));
  }

  // Largest epsilon for which eps*|g_i| stays within the tubular radius.
  double admissible_eps0() const {
    return family.tubular_radius() / profiles.max_abs_offset(family.time_horizon());
  }
};

// One evaluated point of a boundary component Gamma_eps^i(t).
struct BoundarySample {
  int side = 1;  // 0 = inner offset g0, 1 = outer offset g1
  SurfacePoint p;
  Vec2 x = Vec2::Zero();
  Vec2 nu_eps = Vec2::Zero();
  double V_eps = 0.0;
};

// tau_eps^i = (I - eps*g_i*W)^{-1} grad_Gamma g_i; tangential by construction.
inline Vec2 tau_vector(const SurfacePoint& p, int side, const ThinDomainSpec& spec) {
  const CurveFamily& fam = spec.family;
  double gi = spec.profiles.side(side).value(p.theta, p.t);
  double kappa = fam.curvature(p.theta, p.t);
  double q = 1.0 - spec.epsilon * gi * kappa;
  if (q <= 1e-12) throw SingularMatrix("tau_vector: 1 - eps*g_i*kappa <= 0");
  double J = fam.speed(p.theta, p.t);
  double gth = spec.profiles.side(side).dtheta(p.theta, p.t);
  return (gth / (J * q)) * fam.tangent(p.theta, p.t);
}

// Unit outward normal of Gamma_eps^i(t):
// nu_eps = (-1)^{i+1} (nu - eps*tau_eps^i) / sqrt(1 + eps^2 |tau_eps^i|^2).
inline Vec2 boundary_normal(const SurfacePoint& p, int side, const ThinDomainSpec& spec) {
  Vec2 tau_e = tau_vector(p, side, spec);
  Vec2 nu = spec.family.normal(p.theta, p.t);
  double sgn = (side == 1) ? 1.0 : -1.0;
  double eps = spec.epsilon;
  return sgn / std::sqrt(1.0 + eps * eps * tau_e.squaredNorm()) * (nu - eps * tau_e);
}

// Scalar outer normal velocity of Gamma_eps^i(t):
// V_eps = (-1)^{i+1} (V + eps d°g_i + eps^2 g_i tau_eps^i . grad_Gamma V)
//         / sqrt(1 + eps^2 |tau_eps^i|^2).
inline double boundary_velocity(const SurfacePoint& p, int side,
                                const ThinDomainSpec& spec) {
  const CurveFamily& fam = spec.family;
  double eps = spec.epsilon;
  Vec2 tau_e = tau_vector(p, side, spec);
  double V = fam.normal_velocity(p.theta, p.t);
  double dg = spec.profiles.material_dt(side, p.theta, p.t, fam);
  double gi = spec.profiles.side(side).value(p.theta, p.t);
  Vec2 gradV = (fam.normal_velocity_dtheta(p.theta, p.t) / fam.speed(p.theta, p.t)) *
               fam.tangent(p.theta, p.t);
  double sgn = (side == 1) ? 1.0 : -1.0;
  return sgn / std::sqrt(1.0 + eps * eps * tau_e.squaredNorm()) *
         (V + eps * dg + eps * eps * gi * tau_e.dot(gradV));
}

inline BoundarySample boundary_sample(const SurfacePoint& p, int side,
                                      const ThinDomainSpec& spec) {
  BoundarySample s;
  s.side = side;
  s.p = p;
  double gi = spec.profiles.side(side).value(p.theta, p.t);
  s.x = spec.family.position(p.theta, p.t) +
        spec.epsilon * gi * spec.family.normal(p.theta, p.t);
  s.nu_eps = boundary_normal(p, side, spec);
  s.V_eps = boundary_velocity(p, side, spec);
  return s;
}

// sigma_eps(x,t) = (d - eps*g0_bar)(d - eps*g1_bar): nonpositive inside the
// domain, zero on both boundary components. Returns the full derivative
// bundle, assembled from the constant-extension bundles of g0, g1 and d.
inline ScalarBundle sigma_aux(const Vec2& x, double t, const ThinDomainSpec& spec) {
  const CurveFamily& fam = spec.family;
  Projection pr = closest_point(x, t, fam);
  ExtensionFrame fr(fam, pr);
  SurfaceCalculus calc{fam};
  ScalarBundle db = fr.distance_bundle();
  ScalarBundle fac[2];
  for (int i = 0; i < 2; ++i) {
    MovingScalar gi = spec.profiles.side(i).as_moving_scalar();
    ScalarBundle gb =
        fr.extension_bundle(gi.value(pr.p.theta, t), gi.dtheta(pr.p.theta, t),
                            gi.dtheta2(pr.p.theta, t), calc.material_dt(gi, pr.p.theta, t));
    fac[i] = db - gb.scaled(spec.epsilon);
  }
  return fac[0] * fac[1];
}

// Reference map x(theta, s, t) = Phi + eps*(g0 + s*(g1-g0)) * nu.
inline Vec2 map_ref_to_phys(double theta, double s, double t,
                            const ThinDomainSpec& spec) {
  double g0 = spec.profiles.g0(theta, t);
  double w = spec.profiles.width(theta, t);
  double r = spec.epsilon * (g0 + s * w);
  return spec.family.position(theta, t) + r * spec.family.normal(theta, t);
}

// Inverse of the reference map. Throws OutsideDomain when x is not in the
// closure of Omega_eps(t) (up to a small projection tolerance).
inline std::pair<double, double> map_phys_to_ref(const Vec2& x, double t,
                                                 const ThinDomainSpec& spec) {
  Projection pr = closest_point(x, t, spec.family);
  double g0 = spec.profiles.g0(pr.p.theta, t);
  double w = spec.profiles.width(pr.p.theta, t);
  double s = (pr.d / spec.epsilon - g0) / w;
  if (s < -1e-9 || s > 1.0 + 1e-9)
    throw OutsideDomain("map_phys_to_ref: point outside the thin domain");
  return {pr.p.theta, std::clamp(s, 0.0, 1.0)};
}

// Unsigned Jacobian determinant of the reference map, (1 - r*kappa) J eps g.
inline double ref_jacobian_det(double theta, double s, double t,
                               const ThinDomainSpec& spec) {
  double g0 = spec.profiles.g0(theta, t);
  double w = spec.profiles.width(theta, t);
  double r = spec.epsilon * (g0 + s * w);
  double J = spec.family.speed(theta, t);
  double kappa = spec.family.curvature(theta, t);
  return (1.0 - r * kappa) * J * spec.epsilon * w;
}

}  // namespace thinheat
