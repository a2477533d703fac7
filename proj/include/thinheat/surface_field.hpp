#pragma once

// Periodic grid samples of a scalar field on Gamma(t) with tangential-calculus
// accessors. Off-grid evaluation goes through a periodic cubic spline by
// default; a trigonometric (spectral) interpolant is available for residual
// studies where spline smoothness limits the achievable accuracy.

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "thinheat/curve_family.hpp"
#include "thinheat/errors.hpp"
#include "thinheat/periodic_tridiag.hpp"
#include "thinheat/surface_calculus.hpp"

namespace thinheat {

enum class FieldBackend { cubic_spline, spectral };

class SurfaceField {
 public:
  SurfaceField() = default;

  SurfaceField(double t, std::vector<double> values,
               FieldBackend backend = FieldBackend::cubic_spline)
      : t_(t), v_(std::move(values)), backend_(backend) {
    n_ = static_cast<int>(v_.size());
    if (n_ < 16 || n_ % 2 != 0)
      throw GridMismatch("surface field: n_theta must be even and >= 16");
    for (double x : v_)
      if (!std::isfinite(x)) throw GridMismatch("surface field: non-finite value");
    if (backend_ == FieldBackend::cubic_spline)
      build_spline();
    else
      build_spectrum();
  }

  static SurfaceField sample(double t, int n_theta,
                             const std::function<double(double)>& f,
                             FieldBackend backend = FieldBackend::cubic_spline) {
    std::vector<double> v(n_theta);
    for (int j = 0; j < n_theta; ++j) v[j] = f(two_pi * j / n_theta);
    return SurfaceField(t, std::move(v), backend);
  }

  double t() const { return t_; }
  int n_theta() const { return n_; }
  const std::vector<double>& values() const { return v_; }
  FieldBackend backend() const { return backend_; }

  double value(double theta) const {
    return backend_ == FieldBackend::cubic_spline ? spline_eval<0>(theta)
                                                  : spectral_eval<0>(theta);
  }
  double dtheta(double theta) const {
    return backend_ == FieldBackend::cubic_spline ? spline_eval<1>(theta)
                                                  : spectral_eval<1>(theta);
  }
  double dtheta2(double theta) const {
    return backend_ == FieldBackend::cubic_spline ? spline_eval<2>(theta)
                                                  : spectral_eval<2>(theta);
  }

  // 4th-order centered periodic stencils at a grid node.
  double fd4_dtheta(int j) const {
    double h = two_pi / n_;
    return (-at(j + 2) + 8.0 * at(j + 1) - 8.0 * at(j - 1) + at(j - 2)) / (12.0 * h);
  }
  double fd4_dtheta2(int j) const {
    double h = two_pi / n_;
    return (-at(j + 2) + 16.0 * at(j + 1) - 30.0 * at(j) + 16.0 * at(j - 1) -
            at(j - 2)) /
           (12.0 * h * h);
  }

  // View of the field as a (time-frozen) MovingScalar quartet.
  MovingScalar as_moving_scalar() const {
    auto self = *this;  // value copy keeps the interpolant alive in the closures
    return {[self](double th, double) { return self.value(th); },
            [self](double th, double) { return self.dtheta(th); },
            [self](double th, double) { return self.dtheta2(th); },
            [](double, double) { return 0.0; }};
  }

 private:
  double at(int j) const { return v_[((j % n_) + n_) % n_]; }

  void build_spline() {
    // Natural periodic cubic spline: cyclic tridiagonal solve for the second
    // derivatives m_j at the knots.
    double h = two_pi / n_;
    std::vector<double> lo(n_, h / 6.0), di(n_, 2.0 * h / 3.0), up(n_, h / 6.0),
        rhs(n_);
    for (int j = 0; j < n_; ++j) rhs[j] = (at(j + 1) - 2.0 * at(j) + at(j - 1)) / h;
    m_ = solve_periodic_tridiag(lo, di, up, rhs);
  }

  template <int Deriv>
  double spline_eval(double theta) const {
    double th = wrap_angle(theta);
    double h = two_pi / n_;
    int j = std::min(static_cast<int>(th / h), n_ - 1);
    double a = th - j * h, b = h - a;
    double vj = v_[j], vj1 = v_[(j + 1) % n_];
    double mj = m_[j], mj1 = m_[(j + 1) % n_];
    if constexpr (Deriv == 0) {
      return (b * vj + a * vj1) / h +
             (b * (b * b - h * h) * mj + a * (a * a - h * h) * mj1) / (6.0 * h);
    } else if constexpr (Deriv == 1) {
      return (vj1 - vj) / h +
             ((3.0 * a * a - h * h) * mj1 - (3.0 * b * b - h * h) * mj) / (6.0 * h);
    } else {
      return (b * mj + a * mj1) / h;
    }
  }

  void build_spectrum() {
    // Real DFT by direct summation; grids stay small enough that the O(n^2)
    // transform is irrelevant next to the solves it supports.
    int half = n_ / 2;
    ca_.assign(half + 1, 0.0);
    cb_.assign(half + 1, 0.0);
    for (int k = 0; k <= half; ++k) {
      double sc = 0.0, ss = 0.0;
      for (int j = 0; j < n_; ++j) {
        double ang = two_pi * k * j / n_;
        sc += v_[j] * std::cos(ang);
        ss += v_[j] * std::sin(ang);
      }
      double fac = (k == 0 || k == half) ? 1.0 / n_ : 2.0 / n_;
      ca_[k] = fac * sc;
      cb_[k] = fac * ss;
    }
  }

  template <int Deriv>
  double spectral_eval(double theta) const {
    int half = n_ / 2;
    double acc = 0.0;
    for (int k = 0; k <= half; ++k) {
      double c = std::cos(k * theta), s = std::sin(k * theta);
      double kk = static_cast<double>(k);
      if constexpr (Deriv == 0)
        acc += ca_[k] * c + cb_[k] * s;
      else if constexpr (Deriv == 1)
        acc += kk * (-ca_[k] * s + cb_[k] * c);
      else
        acc += kk * kk * (-ca_[k] * c - cb_[k] * s);
    }
    return acc;
  }

  double t_ = 0.0;
  std::vector<double> v_;
  int n_ = 0;
  FieldBackend backend_ = FieldBackend::cubic_spline;
  std::vector<double> m_;        // spline second derivatives
  std::vector<double> ca_, cb_;  // cosine/sine coefficients
};

// Tangential gradient of a sampled field at a surface point.
inline Vec2 surface_gradient(const SurfaceField& f, const SurfacePoint& p,
                             const CurveFamily& fam) {
  if (std::abs(p.t - f.t()) > 1e-12)
    throw GridMismatch("surface_gradient: field sampled at a different time");
  double J = fam.speed(p.theta, p.t);
  return (f.dtheta(p.theta) / J) * fam.tangent(p.theta, p.t);
}

inline double surface_laplacian(const SurfaceField& f, const SurfacePoint& p,
                                const CurveFamily& fam) {
  if (std::abs(p.t - f.t()) > 1e-12)
    throw GridMismatch("surface_laplacian: field sampled at a different time");
  double J = fam.speed(p.theta, p.t);
  double Jp = fam.speed_dtheta(p.theta, p.t);
  return (f.dtheta2(p.theta) - f.dtheta(p.theta) * Jp / J) / (J * J);
}

// Constant extension of a single-time sampled field: value plus the spatial
// part (grad, hess) of the derivative bundle.
inline ScalarBundle constant_extension_spatial(const SurfaceField& f, const Vec2& x,
                                               const CurveFamily& fam) {
  Projection pr = closest_point(x, f.t(), fam);
  ExtensionFrame fr(fam, pr);
  ScalarBundle b = fr.extension_bundle(f.value(pr.p.theta), f.dtheta(pr.p.theta),
                                       f.dtheta2(pr.p.theta), 0.0);
  b.dt = 0.0;  // no time information in a single slice
  return b;
}

// Full bundle from three consecutive slices at t - dt, t, t + dt; the time
// part uses the normal-flow differencing of the middle slice's neighbours.
inline ScalarBundle constant_extension_bundle(const std::array<SurfaceField, 3>& seq,
                                              const Vec2& x, const CurveFamily& fam) {
  double dt = seq[1].t() - seq[0].t();
  if (std::abs((seq[2].t() - seq[1].t()) - dt) > 1e-10 * std::max(1.0, std::abs(dt)))
    throw TimeGridMismatch("constant_extension_bundle: slices not equispaced");
  Projection pr = closest_point(x, seq[1].t(), fam);
  ExtensionFrame fr(fam, pr);
  double dcirc = normal_time_derivative(
      fam,
      [&seq, dt](double th, double tt) {
        int k = static_cast<int>(std::llround((tt - seq[0].t()) / dt));
        return seq[static_cast<std::size_t>(k)].value(th);
      },
      pr.p, dt);
  return fr.extension_bundle(seq[1].value(pr.p.theta), seq[1].dtheta(pr.p.theta),
                             seq[1].dtheta2(pr.p.theta), dcirc);
}

}  // namespace thinheat
