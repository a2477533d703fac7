#pragma once

// Tangential calculus on the moving curve and constant-extension derivative
// bundles in the tubular neighborhood. A scalar field on the space-time
// surface is represented by its value and (theta, theta^2, t)-partials in the
// fixed parametrization; everything else (tangential gradient, Laplace-
// Beltrami, normal time derivative, ambient extension derivatives) is derived
// from that quartet and the curve geometry.

#include <functional>

#include "thinheat/curve_family.hpp"
#include "thinheat/tubular.hpp"

namespace thinheat {

// Closed-form (or interpolated) scalar field on the moving curve. `dtime` is
// the partial at fixed parameter theta, not the normal time derivative.
struct MovingScalar {
  std::function<double(double, double)> value;
  std::function<double(double, double)> dtheta;
  std::function<double(double, double)> dtheta2;
  std::function<double(double, double)> dtime;

  static MovingScalar constant(double c) {
    auto zero = [](double, double) { return 0.0; };
    return {[c](double, double) { return c; }, zero, zero, zero};
  }
};

// Pointwise tangential calculus at (theta, t).
struct SurfaceCalculus {
  const CurveFamily& fam;

  Vec2 surface_gradient(const MovingScalar& f, double th, double t) const {
    double J = fam.speed(th, t);
    return (f.dtheta(th, t) / J) * fam.tangent(th, t);
  }

  // Laplace-Beltrami: (1/J) d/dtheta ( f_theta / J ).
  double surface_laplacian(const MovingScalar& f, double th, double t) const {
    double J = fam.speed(th, t);
    double Jp = fam.speed_dtheta(th, t);
    return (f.dtheta2(th, t) - f.dtheta(th, t) * Jp / J) / (J * J);
  }

  // Normal time derivative along trajectories of the normal flow:
  // d°f = f_t|_theta - (Phi_t . tau) f_theta / J.
  double material_dt(const MovingScalar& f, double th, double t) const {
    double J = fam.speed(th, t);
    return f.dtime(th, t) - fam.tangential_speed(th, t) * f.dtheta(th, t) / J;
  }

  // Frobenius norm of the second tangential derivative matrix D_i D_j f,
  // which for a plane curve is sqrt( (Lap f)^2 + (kappa |grad f|)^2 ).
  double second_tangential_norm(const MovingScalar& f, double th, double t) const {
    double lap = surface_laplacian(f, th, t);
    double kg = fam.curvature(th, t) * f.dtheta(th, t) / fam.speed(th, t);
    return std::sqrt(lap * lap + kg * kg);
  }
};

// Value and full first/second ambient derivative data of a scalar function of
// (x, t) defined in the tubular neighborhood.
struct ScalarBundle {
  double value = 0.0;
  double dt = 0.0;
  Vec2 grad = Vec2::Zero();
  Mat2 hess = Mat2::Zero();

  ScalarBundle operator*(const ScalarBundle& o) const {
    ScalarBundle r;
    r.value = value * o.value;
    r.dt = dt * o.value + value * o.dt;
    r.grad = grad * o.value + value * o.grad;
    r.hess = hess * o.value + value * o.hess + grad * o.grad.transpose() +
             o.grad * grad.transpose();
    return r;
  }
  ScalarBundle operator+(const ScalarBundle& o) const {
    return {value + o.value, dt + o.dt, grad + o.grad, hess + o.hess};
  }
  ScalarBundle operator-(const ScalarBundle& o) const {
    return {value - o.value, dt - o.dt, grad - o.grad, hess - o.hess};
  }
  ScalarBundle scaled(double a) const { return {a * value, a * dt, a * grad, a * hess}; }
  double laplacian() const { return hess.trace(); }
};

// Geometry shared by all extension bundles at one projected point.
struct ExtensionFrame {
  SurfacePoint p;
  double d;
  double J, Jp;        // |Phi_theta| and its theta-derivative
  double kappa, kappa_p;
  double q;            // 1 - d*kappa
  Vec2 tau, nu;
  double V, V_p;       // normal velocity and its theta-derivative

  ExtensionFrame(const CurveFamily& fam, const Projection& pr)
      : p(pr.p), d(pr.d) {
    J = fam.speed(p.theta, p.t);
    Jp = fam.speed_dtheta(p.theta, p.t);
    kappa = fam.curvature(p.theta, p.t);
    kappa_p = fam.curvature_dtheta(p.theta, p.t);
    q = 1.0 - d * kappa;
    if (q <= 1e-12) throw SingularMatrix("extension bundle: 1 - d*kappa <= 0");
    tau = fam.tangent(p.theta, p.t);
    nu = fam.normal(p.theta, p.t);
    V = fam.normal_velocity(p.theta, p.t);
    V_p = fam.normal_velocity_dtheta(p.theta, p.t);
  }

  // Bundle of the signed distance d(x,t) itself.
  ScalarBundle distance_bundle() const {
    ScalarBundle b;
    b.value = d;
    b.dt = -V;
    b.grad = nu;
    b.hess = (-kappa / q) * (tau * tau.transpose());
    return b;
  }

  // Bundle of the constant extension of a field given by its quartet values
  // at the projected parameter.
  ScalarBundle extension_bundle(double f, double f_th, double f_th2,
                                double f_dcirc) const {
    ScalarBundle b;
    b.value = f;
    // time derivative of the extension at fixed x
    b.dt = f_dcirc + d * V_p * f_th / (J * J * q);
    // gradient: R * (tangential gradient extension)
    double Q = f_th / (J * q);
    b.grad = Q * tau;
    // Hessian: symmetric rank structure in the (tau, nu) frame
    double Qth = f_th2 / (J * q) - f_th * Jp / (J * J * q) +
                 f_th * d * kappa_p / (J * q * q);
    double A = Qth / (J * q);
    double B = Q * kappa / q;
    b.hess = A * (tau * tau.transpose()) +
             B * (tau * nu.transpose() + nu * tau.transpose());
    return b;
  }
};

// Full bundle of the constant extension of a MovingScalar at an ambient point.
inline ScalarBundle constant_extension_bundle(const CurveFamily& fam,
                                              const MovingScalar& f, const Vec2& x,
                                              double t) {
  Projection pr = closest_point(x, t, fam);
  ExtensionFrame fr(fam, pr);
  SurfaceCalculus calc{fam};
  double th = pr.p.theta;
  return fr.extension_bundle(f.value(th, t), f.dtheta(th, t), f.dtheta2(th, t),
                             calc.material_dt(f, th, t));
}

inline double constant_extension_value(const CurveFamily& fam, const MovingScalar& f,
                                       const Vec2& x, double t) {
  Projection pr = closest_point(x, t, fam);
  return f.value(pr.p.theta, t);
}

// The quartet of the normal velocity V_Gamma as a field on the moving curve.
inline MovingScalar normal_velocity_field(const CurveFamily& fam) {
  return {[&fam](double th, double t) { return fam.normal_velocity(th, t); },
          [&fam](double th, double t) { return fam.normal_velocity_dtheta(th, t); },
          [&fam](double th, double t) { return fam.normal_velocity_dtheta2(th, t); },
          [&fam](double th, double t) { return fam.normal_velocity_dt(th, t); }};
}

// One RK4 step of the normal flow y' = (V_Gamma nu)(y, t). `theta_hint` seeds
// the closest-point solves along the step.
inline Vec2 normal_flow_step(const CurveFamily& fam, const Vec2& y, double t,
                             double dt, double theta_hint) {
  auto vel = [&fam, theta_hint](const Vec2& z, double tt) -> Vec2 {
    Projection pr;
    try {
      pr = closest_point(z, tt, fam, theta_hint);
    } catch (const OutsideTubular&) {
      throw TrajectoryLeftTubular("normal flow left the tubular neighborhood");
    }
    return fam.normal_velocity(pr.p.theta, tt) * fam.normal(pr.p.theta, tt);
  };
  Vec2 k1 = vel(y, t);
  Vec2 k2 = vel(y + 0.5 * dt * k1, t + 0.5 * dt);
  Vec2 k3 = vel(y + 0.5 * dt * k2, t + 0.5 * dt);
  Vec2 k4 = vel(y + dt * k3, t + dt);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Normal time derivative of a sampled quantity by flowing one step each way
// along the normal flow and central-differencing along the trajectory.
// `sample(theta, t)` evaluates the quantity on Gamma(t) at the given slice
// times; dt is the slice spacing.
inline double normal_time_derivative(const CurveFamily& fam,
                                     const std::function<double(double, double)>& sample,
                                     const SurfacePoint& p, double dt) {
  Vec2 y = fam.position(p.theta, p.t);
  Vec2 yp = normal_flow_step(fam, y, p.t, dt, p.theta);
  Vec2 ym = normal_flow_step(fam, y, p.t, -dt, p.theta);
  Projection prp, prm;
  try {
    prp = closest_point(yp, p.t + dt, fam, p.theta);
    prm = closest_point(ym, p.t - dt, fam, p.theta);
  } catch (const OutsideTubular&) {
    throw TrajectoryLeftTubular("normal flow endpoint could not be projected");
  }
  return (sample(prp.p.theta, p.t + dt) - sample(prm.p.theta, p.t - dt)) / (2.0 * dt);
}

}  // namespace thinheat
