#pragma once

// Analytic families of smooth closed plane curves Gamma(t) with exact
// parametric derivatives. Everything downstream (projection, thin-domain
// geometry, both solvers) reads the curve exclusively through this class.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "thinheat/errors.hpp"

namespace thinheat {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

constexpr double two_pi = 2.0 * std::numbers::pi;

inline double wrap_angle(double theta) {
  double w = std::fmod(theta, two_pi);
  if (w < 0) w += two_pi;
  return w;
}

// Parameter-space handle for a point y = Phi(theta, t) on Gamma(t).
struct SurfacePoint {
  double theta = 0.0;  // normalized to [0, 2*pi)
  double t = 0.0;

  SurfacePoint() = default;
  SurfacePoint(double theta_, double t_) : theta(wrap_angle(theta_)), t(t_) {}
};

class CurveFamily {
 public:
  enum class Kind { circle, ellipse, perturbed_circle };

  // Circle of radius R(t) = radius0 + growth * t.
  static CurveFamily circle(double radius0, double growth, double time_horizon) {
    CurveFamily f;
    f.kind_ = Kind::circle;
    f.p_ = {radius0, growth, 0, 0, 0, 0};
    f.T_ = time_horizon;
    f.finish_init();
    return f;
  }

  // Ellipse with axes a(t) = a0 + a_rate*t, b(t) = b0 + b_rate*t.
  static CurveFamily ellipse(double a0, double a_rate, double b0, double b_rate,
                             double time_horizon) {
    CurveFamily f;
    f.kind_ = Kind::ellipse;
    f.p_ = {a0, a_rate, b0, b_rate, 0, 0};
    f.T_ = time_horizon;
    f.finish_init();
    return f;
  }

  // Radius R(theta, t) = radius0 + growth*t + amp*cos(mode*theta).
  static CurveFamily perturbed_circle(double radius0, double growth, double amp,
                                      int mode, double time_horizon) {
    CurveFamily f;
    f.kind_ = Kind::perturbed_circle;
    f.p_ = {radius0, growth, amp, static_cast<double>(mode), 0, 0};
    f.T_ = time_horizon;
    f.finish_init();
    return f;
  }

  Kind kind() const { return kind_; }
  double time_horizon() const { return T_; }

  // --- parametrization Phi and its exact partial derivatives ---

  Vec2 position(double th, double t) const {
    switch (kind_) {
      case Kind::circle:
        return radius(t) * dir(th);
      case Kind::ellipse:
        return {axis_a(t) * std::cos(th), axis_b(t) * std::sin(th)};
      case Kind::perturbed_circle:
        return pr(th, t) * dir(th);
    }
    return {};
  }

  Vec2 d_theta(double th, double t) const {
    switch (kind_) {
      case Kind::circle:
        return radius(t) * dir_p(th);
      case Kind::ellipse:
        return {-axis_a(t) * std::sin(th), axis_b(t) * std::cos(th)};
      case Kind::perturbed_circle:
        return pr_th(th) * dir(th) + pr(th, t) * dir_p(th);
    }
    return {};
  }

  Vec2 d_theta2(double th, double t) const {
    switch (kind_) {
      case Kind::circle:
        return -radius(t) * dir(th);
      case Kind::ellipse:
        return {-axis_a(t) * std::cos(th), -axis_b(t) * std::sin(th)};
      case Kind::perturbed_circle:
        return (pr_th2(th) - pr(th, t)) * dir(th) + 2.0 * pr_th(th) * dir_p(th);
    }
    return {};
  }

  Vec2 d_theta3(double th, double t) const {
    switch (kind_) {
      case Kind::circle:
        return -radius(t) * dir_p(th);
      case Kind::ellipse:
        return {axis_a(t) * std::sin(th), -axis_b(t) * std::cos(th)};
      case Kind::perturbed_circle:
        return (pr_th3(th) - 3.0 * pr_th(th)) * dir(th) +
               (3.0 * pr_th2(th) - pr(th, t)) * dir_p(th);
    }
    return {};
  }

  Vec2 d_time(double th, double t) const {
    (void)t;
    switch (kind_) {
      case Kind::circle:
        return p_[1] * dir(th);
      case Kind::ellipse:
        return {p_[1] * std::cos(th), p_[3] * std::sin(th)};
      case Kind::perturbed_circle:
        return p_[1] * dir(th);
    }
    return {};
  }

  Vec2 d_time_theta(double th, double t) const {
    (void)t;
    switch (kind_) {
      case Kind::circle:
        return p_[1] * dir_p(th);
      case Kind::ellipse:
        return {-p_[1] * std::sin(th), p_[3] * std::cos(th)};
      case Kind::perturbed_circle:
        return p_[1] * dir_p(th);
    }
    return {};
  }

  Vec2 d_time_theta2(double th, double t) const {
    (void)t;
    switch (kind_) {
      case Kind::circle:
        return -p_[1] * dir(th);
      case Kind::ellipse:
        return {-p_[1] * std::cos(th), -p_[3] * std::sin(th)};
      case Kind::perturbed_circle:
        return -p_[1] * dir(th);
    }
    return {};
  }

  Vec2 d_time2(double, double) const { return Vec2::Zero(); }  // families are linear in t

  // --- derived pointwise geometry ---

  double speed(double th, double t) const { return d_theta(th, t).norm(); }

  Vec2 tangent(double th, double t) const { return d_theta(th, t).normalized(); }

  // Outward unit normal (families are parametrized counterclockwise).
  Vec2 normal(double th, double t) const {
    Vec2 tau = tangent(th, t);
    return {tau.y(), -tau.x()};
  }

  // d/dtheta of |Phi_theta|.
  double speed_dtheta(double th, double t) const {
    Vec2 p1 = d_theta(th, t), p2 = d_theta2(th, t);
    return p1.dot(p2) / p1.norm();
  }

  // Curvature with the sign fixed by H = -div_Gamma(nu): the unit circle has
  // curvature -1. Equals the mean curvature H in the plane-curve case.
  double curvature(double th, double t) const {
    Vec2 p1 = d_theta(th, t), p2 = d_theta2(th, t);
    double J = p1.norm();
    double cross = p1.x() * p2.y() - p1.y() * p2.x();
    return -cross / (J * J * J);
  }

  double curvature_dtheta(double th, double t) const {
    Vec2 p1 = d_theta(th, t), p2 = d_theta2(th, t), p3 = d_theta3(th, t);
    double J = p1.norm();
    double cross = p1.x() * p2.y() - p1.y() * p2.x();
    double cross_p = p1.x() * p3.y() - p1.y() * p3.x();
    double Jp = p1.dot(p2) / J;
    return -cross_p / (J * J * J) + 3.0 * cross * Jp / (J * J * J * J);
  }

  // Weingarten map W = kappa * tau tau^T (symmetric, W nu = 0, tr W = H).
  Mat2 weingarten(double th, double t) const {
    Vec2 tau = tangent(th, t);
    return curvature(th, t) * (tau * tau.transpose());
  }

  // Scalar outer normal velocity V_Gamma = dPhi/dt . nu.
  double normal_velocity(double th, double t) const {
    return d_time(th, t).dot(normal(th, t));
  }

  double normal_velocity_dtheta(double th, double t) const {
    // d/dtheta (Phi_t . nu); nu_theta = -kappa*J*tau.
    double J = speed(th, t);
    Vec2 tau = tangent(th, t), nu = normal(th, t);
    return d_time_theta(th, t).dot(nu) -
           curvature(th, t) * J * d_time(th, t).dot(tau);
  }

  double normal_velocity_dtheta2(double th, double t) const {
    double J = speed(th, t), Jp = speed_dtheta(th, t);
    double ka = curvature(th, t), kap = curvature_dtheta(th, t);
    Vec2 tau = tangent(th, t), nu = normal(th, t);
    Vec2 nu_th = -ka * J * tau;
    Vec2 tau_th = ka * J * nu;
    Vec2 nu_th2 = -(kap * J + ka * Jp) * tau - ka * J * tau_th;
    return d_time_theta2(th, t).dot(nu) + 2.0 * d_time_theta(th, t).dot(nu_th) +
           d_time(th, t).dot(nu_th2);
  }

  // d/dt of V_Gamma at fixed parameter theta.
  double normal_velocity_dt(double th, double t) const {
    double J = speed(th, t);
    Vec2 tau = tangent(th, t), nu = normal(th, t);
    double mu = nu.dot(d_time_theta(th, t)) / J;  // dtau/dt = mu*nu, dnu/dt = -mu*tau
    return d_time2(th, t).dot(nu) - mu * d_time(th, t).dot(tau);
  }

  // Tangential speed of the parametrization, Phi_t . tau. Converts time
  // derivatives at fixed theta into normal time derivatives.
  double tangential_speed(double th, double t) const {
    return d_time(th, t).dot(tangent(th, t));
  }

  // --- tubular radius ---

  // Safe tubular radius: 0.9 * min over sampled times of
  // min( 1/max|kappa|, half the minimal self-distance at separation >= n/6 ).
  // This is the band used for thin-domain admissibility (eps * |g_i| <= delta).
  double tubular_radius() const { return delta_; }

  // Hard projection bound: min( 1/max|kappa|, half the shortest double-normal
  // chord ). Closest-point projection is rejected beyond this distance.
  double projection_radius() const { return proj_radius_; }

 private:
  void finish_init() {
    // Orientation and regularity sanity on a sample grid.
    const int n = 256;
    for (int k = 0; k <= 8; ++k) {
      double t = T_ * k / 8.0;
      double area2 = 0.0;
      for (int j = 0; j < n; ++j) {
        double th = two_pi * j / n;
        Vec2 p = position(th, t), dp = d_theta(th, t);
        if (dp.norm() <= 0.0)
          throw ConfigError("curve family: parametrization is not regular");
        area2 += p.x() * dp.y() - p.y() * dp.x();
      }
      if (area2 <= 0.0)
        throw ConfigError("curve family: parametrization must be counterclockwise");
    }
    estimate_radii();
    if (delta_ <= 0.0) throw ConfigError("curve family: tubular radius is not positive");
  }

  void estimate_radii() {
    const int n = 1024, nt = 16, sep = n / 6;
    double delta = std::numeric_limits<double>::infinity();
    double hard = std::numeric_limits<double>::infinity();
    std::vector<Vec2> pts(n), taus(n);
    for (int k = 0; k <= nt; ++k) {
      double t = T_ * k / nt;
      double kmax = 0.0;
      for (int j = 0; j < n; ++j) {
        double th = two_pi * j / n;
        pts[j] = position(th, t);
        taus[j] = tangent(th, t);
        kmax = std::max(kmax, std::abs(curvature(th, t)));
      }
      double focal = (kmax > 0.0) ? 1.0 / kmax : std::numeric_limits<double>::infinity();
      double min_chord = std::numeric_limits<double>::infinity();
      double min_pinch = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        for (int j = i + sep; j <= i + n - sep; ++j) {
          Vec2 c = pts[i] - pts[j % n];
          double len = c.norm();
          min_chord = std::min(min_chord, len);
          // double-normal chords are the pinch candidates
          Vec2 ch = c / len;
          if (std::abs(ch.dot(taus[i])) < 0.1 && std::abs(ch.dot(taus[j % n])) < 0.1)
            min_pinch = std::min(min_pinch, len);
        }
      }
      delta = std::min(delta, std::min(focal, 0.5 * min_chord));
      hard = std::min(hard, std::min(focal, 0.5 * min_pinch));
    }
    delta_ = 0.9 * delta;
    proj_radius_ = hard;
  }

  double radius(double t) const { return p_[0] + p_[1] * t; }
  double axis_a(double t) const { return p_[0] + p_[1] * t; }
  double axis_b(double t) const { return p_[2] + p_[3] * t; }
  double pr(double th, double t) const {
    return p_[0] + p_[1] * t + p_[2] * std::cos(p_[3] * th);
  }
  double pr_th(double th) const { return -p_[2] * p_[3] * std::sin(p_[3] * th); }
  double pr_th2(double th) const {
    return -p_[2] * p_[3] * p_[3] * std::cos(p_[3] * th);
  }
  double pr_th3(double th) const {
    return p_[2] * p_[3] * p_[3] * p_[3] * std::sin(p_[3] * th);
  }
  static Vec2 dir(double th) { return {std::cos(th), std::sin(th)}; }
  static Vec2 dir_p(double th) { return {-std::sin(th), std::cos(th)}; }

  Kind kind_ = Kind::circle;
  std::array<double, 6> p_{};
  double T_ = 1.0;
  double delta_ = 0.0;
  double proj_radius_ = 0.0;
};

}  // namespace thinheat
