#pragma once

// Tubular-neighborhood geometry of a moving curve: closest-point projection,
// signed distance, the Fermi decomposition x = pi(x) + d(x) nu(pi(x)), and the
// resolvent matrix R = (I - d W)^{-1} that converts tangential gradients of
// surface fields into ambient gradients of their constant extensions.

#include <cmath>
#include <optional>

#include "thinheat/curve_family.hpp"
#include "thinheat/errors.hpp"

namespace thinheat {

// Result of projecting an ambient point onto Gamma(t).
struct Projection {
  SurfacePoint p;    // parameter of the closest point
  double d = 0.0;    // signed distance, positive along the outward normal
  Vec2 foot;         // Phi(theta*, t)
  Vec2 nu;           // outward normal at the foot
};

namespace detail {

// Damped Newton on the stationarity condition (x - Phi(theta)).Phi_theta = 0,
// started from the given guess. Returns nullopt if it fails to converge.
inline std::optional<double> newton_closest(const CurveFamily& fam, const Vec2& x,
                                            double t, double guess) {
  double th = guess;
  for (int it = 0; it < 50; ++it) {
    Vec2 phi = fam.position(th, t);
    Vec2 p1 = fam.d_theta(th, t);
    Vec2 r = x - phi;
    double F = r.dot(p1);
    double J = p1.norm();
    // relative stationarity tolerance plus an absolute floor for points
    // sitting on (or within roundoff of) the curve
    double tol = J * (1e-12 * r.norm() + 1e-15 * (x.norm() + 1.0));
    double Fp = -J * J + r.dot(fam.d_theta2(th, t));
    if (std::abs(F) <= tol) {
      if (Fp >= 0.0) return std::nullopt;  // stationary but not a minimum
      return wrap_angle(th);
    }
    if (Fp == 0.0) return std::nullopt;
    double step = -F / Fp;
    // Backtrack until the stationarity residual decreases.
    double lam = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k) {
      double cand = th + lam * step;
      Vec2 rc = x - fam.position(cand, t);
      double Fc = rc.dot(fam.d_theta(cand, t));
      if (std::abs(Fc) < std::abs(F)) {
        th = cand;
        moved = true;
        break;
      }
      lam *= 0.5;
    }
    if (!moved) {
      // stuck at the roundoff floor; accept if already near-stationary
      if (std::abs(F) <= 1e3 * tol && Fp < 0.0) return wrap_angle(th);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

inline double coarse_scan(const CurveFamily& fam, const Vec2& x, double t, int n) {
  double best = 0.0, best_d2 = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    double th = two_pi * j / n;
    double d2 = (x - fam.position(th, t)).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = th;
    }
  }
  return best;
}

}  // namespace detail

// Closest-point projection of x onto Gamma(t). Throws NoConvergence if the
// damped root-find fails even after a dense fallback scan, OutsideTubular if
// the point lies beyond the tubular radius. A caller that already knows an
// approximate parameter can pass it as `hint` to skip the coarse scan.
inline Projection closest_point(const Vec2& x, double t, const CurveFamily& fam,
                                std::optional<double> hint = std::nullopt) {
  std::optional<double> th;
  if (hint) th = detail::newton_closest(fam, x, t, *hint);
  if (!th) th = detail::newton_closest(fam, x, t, detail::coarse_scan(fam, x, t, 256));
  if (!th) th = detail::newton_closest(fam, x, t, detail::coarse_scan(fam, x, t, 4096));
  if (!th) throw NoConvergence("closest_point: Newton failed after fallback scan");
  Projection pr;
  pr.p = SurfacePoint(*th, t);
  pr.foot = fam.position(pr.p.theta, t);
  pr.nu = fam.normal(pr.p.theta, t);
  pr.d = (x - pr.foot).dot(pr.nu);
  // 2% slack: the sampled radius estimate sits marginally below degenerate
  // configurations (e.g. the focal point of a circle).
  if (std::abs(pr.d) > fam.projection_radius() * 1.02)
    throw OutsideTubular("closest_point: |d| exceeds the projection radius");
  return pr;
}

inline double signed_distance(const Vec2& x, double t, const CurveFamily& fam) {
  return closest_point(x, t, fam).d;
}

// R(x) = (I - d(x) W(pi(x)))^{-1}; in the plane this is the rank-one update
// I + (d kappa / (1 - d kappa)) tau tau^T. Throws SingularMatrix when
// 1 - d*kappa <= 0 (the tubular assumption is violated).
inline Mat2 resolvent(const CurveFamily& fam, const SurfacePoint& p, double d) {
  double kappa = fam.curvature(p.theta, p.t);
  double q = 1.0 - d * kappa;
  if (q <= 1e-12) throw SingularMatrix("resolvent: 1 - d*kappa <= 0");
  Vec2 tau = fam.tangent(p.theta, p.t);
  return Mat2::Identity() + (d * kappa / q) * (tau * tau.transpose());
}

inline Mat2 resolvent(const Vec2& x, double t, const CurveFamily& fam) {
  Projection pr = closest_point(x, t, fam);
  return resolvent(fam, pr.p, pr.d);
}

}  // namespace thinheat
