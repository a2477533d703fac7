#pragma once

// Boundary offset profiles g0, g1 of the thin domain. Each profile is
// g_i(theta, t) = const + rate*t + amp*cos(mode*theta), which covers the
// constant, time-dependent and theta-dependent presets.

#include <algorithm>
#include <cmath>

#include "thinheat/curve_family.hpp"
#include "thinheat/surface_calculus.hpp"

namespace thinheat {

struct Profile {
  double c = 0.0;
  double rate = 0.0;
  double amp = 0.0;
  int mode = 1;

  double value(double th, double t) const { return c + rate * t + amp * std::cos(mode * th); }
  double dtheta(double th, double) const { return -amp * mode * std::sin(mode * th); }
  double dtheta2(double th, double) const { return -amp * mode * mode * std::cos(mode * th); }
  double dtime(double, double) const { return rate; }
  bool time_only() const { return amp == 0.0; }

  MovingScalar as_moving_scalar() const {
    Profile p = *this;
    return {[p](double th, double t) { return p.value(th, t); },
            [p](double th, double t) { return p.dtheta(th, t); },
            [p](double th, double t) { return p.dtheta2(th, t); },
            [p](double th, double t) { return p.dtime(th, t); }};
  }
};

class ProfilePair {
 public:
  ProfilePair() = default;
  ProfilePair(Profile g0, Profile g1) : g0_(g0), g1_(g1) {}

  static ProfilePair constants(double g0, double g1) { return {{g0}, {g1}}; }
  static ProfilePair time_linear(double g0, double r0, double g1, double r1) {
    return {{g0, r0}, {g1, r1}};
  }
  static ProfilePair theta_cos(double g0, double g1c, double g1amp, int g1mode) {
    return {{g0}, {g1c, 0.0, g1amp, g1mode}};
  }

  const Profile& side(int i) const { return i == 0 ? g0_ : g1_; }

  double g0(double th, double t) const { return g0_.value(th, t); }
  double g1(double th, double t) const { return g1_.value(th, t); }
  double width(double th, double t) const { return g1(th, t) - g0(th, t); }
  double width_dtheta(double th, double t) const {
    return g1_.dtheta(th, t) - g0_.dtheta(th, t);
  }
  double width_dtime(double th, double t) const {
    return g1_.dtime(th, t) - g0_.dtime(th, t);
  }

  // Minimum width and largest |g_i| over a sample of the space-time surface.
  double min_width(double T) const {
    double m = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 32; ++k)
      for (int j = 0; j < 256; ++j)
        m = std::min(m, width(two_pi * j / 256, T * k / 32.0));
    return m;
  }
  double max_abs_offset(double T) const {
    double m = 0.0;
    for (int k = 0; k <= 32; ++k)
      for (int j = 0; j < 256; ++j) {
        double th = two_pi * j / 256, t = T * k / 32.0;
        m = std::max({m, std::abs(g0(th, t)), std::abs(g1(th, t))});
      }
    return m;
  }

  // Normal time derivative of g_i. Time-only profiles supply it directly;
  // theta-dependent ones go through the normal-flow differencing machinery.
  double material_dt(int i, double th, double t, const CurveFamily& fam) const {
    const Profile& g = side(i);
    if (g.time_only()) return g.dtime(th, t);
    double dt_fd = 1e-4;
    if (t < dt_fd || t > fam.time_horizon() - dt_fd) {
      // near the ends of the horizon fall back to the exact parameter-flow form
      return exact_material_dt(i, th, t, fam);
    }
    Profile gp = g;
    return normal_time_derivative(
        fam, [gp](double th2, double t2) { return gp.value(th2, t2); },
        SurfacePoint(th, t), dt_fd);
  }

  // d°g_i written out through the fixed parametrization; used as a
  // cross-check oracle and at the ends of the time horizon.
  double exact_material_dt(int i, double th, double t, const CurveFamily& fam) const {
    const Profile& g = side(i);
    return g.dtime(th, t) -
           fam.tangential_speed(th, t) * g.dtheta(th, t) / fam.speed(th, t);
  }

 private:
  Profile g0_, g1_;
};

}  // namespace thinheat
