#include <catch2/catch_amalgamated.hpp>

#include "thinheat/sampling.hpp"
#include "thinheat/surface_calculus.hpp"
#include "thinheat/surface_field.hpp"

using namespace thinheat;
using Catch::Approx;

namespace {

MovingScalar test_field() {
  // smooth field with genuine theta and t dependence
  return {[](double th, double t) { return std::sin(th) + 0.3 * std::cos(2 * th) * (1 + t); },
          [](double th, double t) { return std::cos(th) - 0.6 * std::sin(2 * th) * (1 + t); },
          [](double th, double t) { return -std::sin(th) - 1.2 * std::cos(2 * th) * (1 + t); },
          [](double th, double) { return 0.3 * std::cos(2 * th); }};
}

}  // namespace

TEST_CASE("extension of a constant has vanishing derivatives") {
  auto fam = CurveFamily::circle(1.0, 0.5, 1.0);
  auto b = constant_extension_bundle(fam, MovingScalar::constant(4.2), {1.1, 0.2}, 0.3);
  REQUIRE(b.value == Approx(4.2).margin(1e-14));
  REQUIRE(b.dt == Approx(0.0).margin(1e-14));
  REQUIRE(b.grad.norm() < 1e-14);
  REQUIRE(b.hess.norm() < 1e-14);
}

TEST_CASE("normal derivative of a constant extension vanishes off the curve") {
  auto fam = CurveFamily::ellipse(1.2, 0.1, 0.9, 0.0, 1.0);
  MovingScalar f = test_field();
  for (int i = 0; i < 1000; ++i) {
    double th = two_pi * halton(i + 1, 2);
    double d = fam.tubular_radius() * (2.0 * halton(i + 1, 3) - 1.0);
    double t = halton(i + 1, 5);
    Vec2 x = fam.position(th, t) + d * fam.normal(th, t);
    ScalarBundle b = constant_extension_bundle(fam, f, x, t);
    Projection pr = closest_point(x, t, fam);
    REQUIRE(std::abs(pr.nu.dot(b.grad)) < 1e-8);
  }
}

TEST_CASE("extension bundle agrees with 4th-order finite differences") {
  auto fam = CurveFamily::ellipse(1.1, 0.1, 0.9, 0.05, 1.0);
  MovingScalar f = test_field();
  Vec2 x(1.05, 0.35);
  double t = 0.4;
  ScalarBundle b = constant_extension_bundle(fam, f, x, t);
  auto val = [&](const Vec2& z, double tt) { return constant_extension_value(fam, f, z, tt); };

  double ht = 1e-4;
  double fd_t = (val(x, t - 2 * ht) - 8 * val(x, t - ht) + 8 * val(x, t + ht) - val(x, t + 2 * ht)) / (12 * ht);
  REQUIRE(b.dt == Approx(fd_t).margin(1e-8));

  double h = 1e-3;
  for (int axis = 0; axis < 2; ++axis) {
    Vec2 e = Vec2::Zero();
    e[axis] = h;
    double fd1 = (val(x - 2 * e, t) - 8 * val(x - e, t) + 8 * val(x + e, t) - val(x + 2 * e, t)) / (12 * h);
    REQUIRE(b.grad[axis] == Approx(fd1).margin(1e-8));
    double fd2 = (-val(x + 2 * e, t) + 16 * val(x + e, t) - 30 * val(x, t) + 16 * val(x - e, t) - val(x - 2 * e, t)) / (12 * h * h);
    REQUIRE(b.hess(axis, axis) == Approx(fd2).margin(1e-6));
  }
  // mixed second derivative via the cross stencil
  auto cross = [&](double sx, double sy) { return val(x + Vec2(sx * h, sy * h), t); };
  double fd_xy = (cross(1, 1) - cross(1, -1) - cross(-1, 1) + cross(-1, -1)) / (4 * h * h);
  REQUIRE(b.hess(0, 1) == Approx(fd_xy).margin(1e-5));
  REQUIRE(b.hess(1, 0) == Approx(b.hess(0, 1)).margin(1e-12));
}

TEST_CASE("gradient of the extension approaches the tangential gradient near the curve") {
  auto fam = CurveFamily::ellipse(1.2, 0.0, 0.9, 0.0, 1.0);
  MovingScalar f = test_field();
  SurfaceCalculus calc{fam};
  // |grad ext - grad_Gamma| <= C |d| with C stable under halving the band
  double C_prev = -1.0;
  for (double band : {0.1, 0.05, 0.025}) {
    double C = 0.0;
    for (int i = 0; i < 300; ++i) {
      double th = two_pi * halton(i + 1, 2);
      double d = band * (2.0 * halton(i + 1, 3) - 1.0);
      if (std::abs(d) < 1e-4) continue;
      Vec2 x = fam.position(th, 0.0) + d * fam.normal(th, 0.0);
      ScalarBundle b = constant_extension_bundle(fam, f, x, 0.0);
      Vec2 gs = calc.surface_gradient(f, th, 0.0);
      C = std::max(C, (b.grad - gs).norm() / std::abs(d));
    }
    if (C_prev >= 0.0) {
      REQUIRE(C <= C_prev * 1.5 + 1e-12);
      REQUIRE(C >= C_prev / 1.5 - 1e-12);
    }
    C_prev = C;
  }
}

TEST_CASE("normal time derivative") {
  SECTION("time-independent field on a stationary curve") {
    auto fam = CurveFamily::ellipse(1.2, 0.0, 0.9, 0.0, 1.0);
    auto sample = [](double th, double) { return std::sin(th); };
    double d = normal_time_derivative(fam, sample, SurfacePoint(0.8, 0.5), 1e-4);
    REQUIRE(d == Approx(0.0).margin(1e-9));
  }
  SECTION("purely radial field on the growing circle") {
    auto fam = CurveFamily::circle(1.0, 0.5, 1.0);
    auto sample = [](double, double t) { return 1.0 / (1.0 + 0.5 * t); };
    double t = 0.4, R = 1.0 + 0.5 * t;
    double d = normal_time_derivative(fam, sample, SurfacePoint(2.0, t), 1e-4);
    REQUIRE(d == Approx(-0.5 / (R * R)).margin(1e-9));
  }
  SECTION("d°nu = -grad_Gamma V on a moving ellipse") {
    auto fam = CurveFamily::ellipse(1.0, 0.1, 0.9, 0.0, 1.0);
    SurfaceCalculus calc{fam};
    for (double th : {0.0, 0.9, 2.5, 4.0}) {
      SurfacePoint p(th, 0.5);
      Vec2 gv = (fam.normal_velocity_dtheta(th, 0.5) / fam.speed(th, 0.5)) * fam.tangent(th, 0.5);
      for (int comp = 0; comp < 2; ++comp) {
        auto sample = [&fam, comp](double a, double b) { return fam.normal(a, b)[comp]; };
        double dn = normal_time_derivative(fam, sample, p, 1e-4);
        REQUIRE(dn == Approx(-gv[comp]).margin(1e-5));
      }
    }
  }
}

TEST_CASE("extension bundle from three sampled slices") {
  auto fam = CurveFamily::circle(1.0, 0.5, 1.0);
  MovingScalar f = test_field();
  double t = 0.3, dt = 1e-3;
  std::array<SurfaceField, 3> seq = {
      SurfaceField::sample(t - dt, 128, [&](double th) { return f.value(th, t - dt); }),
      SurfaceField::sample(t, 128, [&](double th) { return f.value(th, t); }),
      SurfaceField::sample(t + dt, 128, [&](double th) { return f.value(th, t + dt); })};
  Vec2 x = fam.position(0.7, t) + 0.08 * fam.normal(0.7, t);
  ScalarBundle sampled = constant_extension_bundle(seq, x, fam);
  ScalarBundle exact = constant_extension_bundle(fam, f, x, t);
  REQUIRE(sampled.value == Approx(exact.value).margin(1e-8));
  REQUIRE(sampled.dt == Approx(exact.dt).margin(1e-5));
  REQUIRE((sampled.grad - exact.grad).norm() < 1e-6);
}

TEST_CASE("constant-extension Laplacian bounds with stable constants") {
  auto fam = CurveFamily::ellipse(1.2, 0.1, 0.9, 0.0, 1.0);
  MovingScalar f = test_field();
  SurfaceCalculus calc{fam};
  double C1p = -1, C2p = -1, C3p = -1;
  for (double band : {0.1, 0.05, 0.025}) {
    double C1 = 0, C2 = 0, C3 = 0;
    for (int i = 0; i < 400; ++i) {
      double th = two_pi * halton(i + 1, 2);
      double d = band * (2.0 * halton(i + 1, 3) - 1.0);
      double t = halton(i + 1, 5);
      if (std::abs(d) < 1e-3) continue;
      Vec2 x = fam.position(th, t) + d * fam.normal(th, t);
      Projection pr = closest_point(x, t, fam);
      ExtensionFrame fr(fam, pr);
      ScalarBundle fb = fr.extension_bundle(f.value(th, t), f.dtheta(th, t), f.dtheta2(th, t),
                                            calc.material_dt(f, th, t));
      ScalarBundle db = fr.distance_bundle();
      double lap_s = calc.surface_laplacian(f, th, t);
      double H = fam.curvature(th, t);
      C1 = std::max(C1, std::abs(fb.laplacian() - lap_s) / std::abs(d));
      C2 = std::max(C2, std::abs((db * fb).laplacian() + H * fb.value) / std::abs(d));
      C3 = std::max(C3, std::abs((db * db * fb).laplacian() - 2.0 * fb.value) / std::abs(d));
    }
    if (C1p >= 0) {
      REQUIRE(C1 <= C1p * 1.5);
      REQUIRE(C2 <= C2p * 1.5);
      REQUIRE(C3 <= C3p * 1.5);
    }
    C1p = C1;
    C2p = C2;
    C3p = C3;
  }
}
