#include <catch2/catch_amalgamated.hpp>

#include "thinheat/sampling.hpp"
#include "thinheat/thin_domain.hpp"

using namespace thinheat;
using Catch::Approx;

namespace {

ThinDomainSpec theta_spec(double eps) {
  return ThinDomainSpec(CurveFamily::circle(1.0, 0.0, 1.0),
                        ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1), eps, 1.0);
}

}  // namespace

TEST_CASE("tau vector") {
  SECTION("vanishes for constant profiles") {
    ThinDomainSpec spec(CurveFamily::circle(1.0, 0.5, 1.0), ProfilePair::constants(-0.5, 0.5),
                        0.1, 1.0);
    REQUIRE(tau_vector(SurfacePoint(0.7, 0.2), 0, spec).norm() < 1e-15);
    REQUIRE(tau_vector(SurfacePoint(0.7, 0.2), 1, spec).norm() < 1e-15);
  }
  SECTION("is tangential and approaches grad_Gamma g_i as eps -> 0") {
    double prev_gap = -1.0;
    for (double eps : {0.1, 0.05, 0.025}) {
      auto spec = theta_spec(eps);
      SurfacePoint p(1.1, 0.0);
      Vec2 tau_e = tau_vector(p, 1, spec);
      REQUIRE(std::abs(tau_e.dot(spec.family.normal(p.theta, p.t))) < 1e-12);
      Vec2 grad = (spec.profiles.side(1).dtheta(p.theta, p.t) / spec.family.speed(p.theta, p.t)) *
                  spec.family.tangent(p.theta, p.t);
      double gap = (tau_e - grad).norm();
      if (prev_gap > 0.0) REQUIRE(gap == Approx(prev_gap / 2.0).epsilon(0.2));
      prev_gap = gap;
    }
  }
  SECTION("matches a direct 2x2 linear solve") {
    auto spec = theta_spec(0.1);
    SurfacePoint p(0.9, 0.0);
    Mat2 A = Mat2::Identity() -
             spec.epsilon * spec.profiles.side(1).value(p.theta, p.t) *
                 spec.family.weingarten(p.theta, p.t);
    Vec2 grad = (spec.profiles.side(1).dtheta(p.theta, p.t) / spec.family.speed(p.theta, p.t)) *
                spec.family.tangent(p.theta, p.t);
    Vec2 direct = A.fullPivLu().solve(grad);
    REQUIRE((tau_vector(p, 1, spec) - direct).norm() < 1e-12);
  }
}

TEST_CASE("boundary normal") {
  SECTION("constant profiles give +/- the curve normal") {
    ThinDomainSpec spec(CurveFamily::circle(1.0, 0.5, 1.0), ProfilePair::constants(-0.5, 0.5),
                        0.1, 1.0);
    SurfacePoint p(2.2, 0.3);
    Vec2 nu = spec.family.normal(p.theta, p.t);
    REQUIRE((boundary_normal(p, 1, spec) - nu).norm() < 1e-14);
    REQUIRE((boundary_normal(p, 0, spec) + nu).norm() < 1e-14);
  }
  SECTION("is orthogonal to the numerically differentiated boundary tangent") {
    auto spec = theta_spec(0.1);
    for (double th : {0.0, 0.8, 2.0, 3.9, 5.6}) {
      for (int side : {0, 1}) {
        SurfacePoint p(th, 0.0);
        Vec2 nu_e = boundary_normal(p, side, spec);
        REQUIRE(nu_e.norm() == Approx(1.0).margin(1e-13));
        double h = 1e-5;
        auto bode = [&](double a) {
          double gi = spec.profiles.side(side).value(a, 0.0);
          return (spec.family.position(a, 0.0) +
                  spec.epsilon * gi * spec.family.normal(a, 0.0))
              .eval();
        };
        Vec2 tangent = (bode(th + h) - bode(th - h)) / (2 * h);
        REQUIRE(std::abs(nu_e.dot(tangent.normalized())) < 1e-6);
      }
    }
  }
  SECTION("agrees with the gradient of sigma up to the component sign") {
    auto spec = theta_spec(0.05);
    for (double th : {0.4, 1.7, 4.2}) {
      for (int side : {0, 1}) {
        BoundarySample bs = boundary_sample(SurfacePoint(th, 0.0), side, spec);
        ScalarBundle sig = sigma_aux(bs.x, 0.0, spec);
        Vec2 oriented = ((side == 1) ? 1.0 : -1.0) * sig.grad.normalized();
        REQUIRE((bs.nu_eps - oriented).norm() < 1e-6);
      }
    }
  }
}

TEST_CASE("boundary velocity") {
  SECTION("rigid radial motion") {
    ThinDomainSpec spec(CurveFamily::circle(1.0, 0.5, 1.0), ProfilePair::constants(-0.4, 0.6),
                        0.1, 1.0);
    REQUIRE(boundary_velocity(SurfacePoint(1.0, 0.2), 1, spec) == Approx(0.5).margin(1e-12));
    REQUIRE(boundary_velocity(SurfacePoint(1.0, 0.2), 0, spec) == Approx(-0.5).margin(1e-12));
  }
  SECTION("pure thickness change on a stationary curve") {
    ThinDomainSpec spec(CurveFamily::circle(1.0, 0.0, 1.0),
                        ProfilePair::time_linear(-0.5, -0.2, 0.5, 0.3), 0.1, 1.0);
    REQUIRE(boundary_velocity(SurfacePoint(0.3, 0.5), 1, spec) ==
            Approx(0.1 * 0.3).margin(1e-12));
    REQUIRE(boundary_velocity(SurfacePoint(0.3, 0.5), 0, spec) ==
            Approx(-0.1 * (-0.2)).margin(1e-12));
  }
  SECTION("matches the kinematic trajectory oracle") {
    ThinDomainSpec spec(CurveFamily::ellipse(1.0, 0.1, 0.9, 0.0, 1.0),
                        ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1), 0.05, 1.0);
    const CurveFamily& fam = spec.family;
    for (double th : {0.3, 1.9, 4.7}) {
      for (int side : {0, 1}) {
        double t = 0.4, dt = 1e-4;
        // boundary material point rides the normal flow of its base point
        auto boundary_point = [&](double tt) {
          Vec2 y = fam.position(th, t);
          int n_sub = 4;
          double h = (tt - t) / n_sub;
          for (int k = 0; k < n_sub; ++k)
            y = normal_flow_step(fam, y, t + k * h, h, th);
          Projection pr = closest_point(y, tt, fam);
          double gi = spec.profiles.side(side).value(pr.p.theta, tt);
          return (y + spec.epsilon * gi * fam.normal(pr.p.theta, tt)).eval();
        };
        Vec2 vel = (boundary_point(t + dt) - boundary_point(t - dt)) / (2 * dt);
        BoundarySample bs = boundary_sample(SurfacePoint(th, t), side, spec);
        REQUIRE(bs.V_eps == Approx(vel.dot(bs.nu_eps)).margin(1e-5));
      }
    }
  }
}

TEST_CASE("sigma vanishes on the boundary and has stable interior bounds") {
  SECTION("zero on both components") {
    auto spec = theta_spec(0.1);
    for (double th : {0.0, 1.0, 3.3})
      for (int side : {0, 1}) {
        BoundarySample bs = boundary_sample(SurfacePoint(th, 0.0), side, spec);
        REQUIRE(std::abs(sigma_aux(bs.x, 0.0, spec).value) < 1e-12);
      }
  }
  SECTION("normal derivative formula on the boundary") {
    // nu_eps . grad sigma = eps * g * sqrt(1 + eps^2 |tau|^2)
    auto spec = theta_spec(0.1);
    for (double th : {0.5, 2.6}) {
      for (int side : {0, 1}) {
        BoundarySample bs = boundary_sample(SurfacePoint(th, 0.0), side, spec);
        ScalarBundle sig = sigma_aux(bs.x, 0.0, spec);
        double g = spec.profiles.width(th, 0.0);
        double tau2 = tau_vector(SurfacePoint(th, 0.0), side, spec).squaredNorm();
        double expected = spec.epsilon * g * std::sqrt(1.0 + spec.epsilon * spec.epsilon * tau2);
        REQUIRE(bs.nu_eps.dot(sig.grad) == Approx(expected).margin(1e-9));
        REQUIRE(bs.nu_eps.dot(sig.grad) >= 0.9 * spec.epsilon * g);
      }
    }
  }
  SECTION("interior bounds scale as eps^2, eps, eps, 1 with stable constants") {
    double c_prev[4] = {-1, -1, -1, -1};
    for (double eps : {0.1, 0.05, 0.025}) {
      ThinDomainSpec spec(CurveFamily::ellipse(1.0, 0.1, 0.9, 0.0, 1.0),
                          ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1), eps, 1.0);
      double c[4] = {0, 0, 0, 0};
      for (int i = 0; i < 500; ++i) {
        double th = two_pi * halton(i + 1, 2), s = halton(i + 1, 3),
               t = 0.8 * halton(i + 1, 5);
        Vec2 x = map_ref_to_phys(th, s, t, spec);
        ScalarBundle b = sigma_aux(x, t, spec);
        REQUIRE(b.value <= 1e-15);  // nonpositive inside
        c[0] = std::max(c[0], std::abs(b.value) / (eps * eps));
        c[1] = std::max(c[1], std::abs(b.dt) / eps);
        c[2] = std::max(c[2], b.grad.norm() / eps);
        c[3] = std::max(c[3], b.hess.norm());
      }
      for (int k = 0; k < 4; ++k) {
        if (c_prev[k] >= 0.0) {
          REQUIRE(c[k] <= c_prev[k] * 1.5);
          REQUIRE(c[k] >= c_prev[k] / 1.5);
        }
        c_prev[k] = c[k];
      }
    }
  }
}

TEST_CASE("reference map") {
  auto spec = theta_spec(0.1);
  SECTION("s = 0 and s = 1 land on the boundary components") {
    for (double th : {0.2, 2.8}) {
      Vec2 x0 = map_ref_to_phys(th, 0.0, 0.0, spec);
      Projection pr = closest_point(x0, 0.0, spec.family);
      REQUIRE(pr.d == Approx(spec.epsilon * spec.profiles.g0(th, 0.0)).margin(1e-12));
      Vec2 x1 = map_ref_to_phys(th, 1.0, 0.0, spec);
      pr = closest_point(x1, 0.0, spec.family);
      REQUIRE(pr.d == Approx(spec.epsilon * spec.profiles.g1(th, 0.0)).margin(1e-12));
    }
  }
  SECTION("round trip to 1e-10 on random points") {
    auto mspec = ThinDomainSpec(CurveFamily::ellipse(1.2, 0.1, 0.9, 0.0, 1.0),
                                ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1), 0.1, 1.0);
    for (int i = 0; i < 1000; ++i) {
      double th = two_pi * halton(i + 1, 2), s = halton(i + 1, 3), t = halton(i + 1, 5);
      Vec2 x = map_ref_to_phys(th, s, t, mspec);
      auto [th2, s2] = map_phys_to_ref(x, t, mspec);
      REQUIRE(std::abs(wrap_angle(th2 - th + std::numbers::pi) - std::numbers::pi) < 1e-10);
      REQUIRE(s2 == Approx(s).margin(1e-10));
    }
  }
  SECTION("rejects points outside the band") {
    REQUIRE_THROWS_AS(map_phys_to_ref({1.3, 0.0}, 0.0, spec), OutsideDomain);
  }
  SECTION("Jacobian determinant matches finite differences") {
    auto mspec = ThinDomainSpec(CurveFamily::ellipse(1.2, 0.1, 0.9, 0.0, 1.0),
                                ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1), 0.1, 1.0);
    double h = 1e-6;
    for (double th : {0.4, 2.2})
      for (double s : {0.25, 0.75}) {
        Vec2 dth = (map_ref_to_phys(th + h, s, 0.3, mspec) -
                    map_ref_to_phys(th - h, s, 0.3, mspec)) /
                   (2 * h);
        Vec2 dss = (map_ref_to_phys(th, s + h, 0.3, mspec) -
                    map_ref_to_phys(th, s - h, 0.3, mspec)) /
                   (2 * h);
        double det_fd = std::abs(dth.x() * dss.y() - dth.y() * dss.x());
        REQUIRE(ref_jacobian_det(th, s, 0.3, mspec) == Approx(det_fd).margin(1e-6));
      }
  }
}

TEST_CASE("|V_eps -/+ V_Gamma| is first order in eps") {
  double prev = -1.0;
  for (double eps : {0.1, 0.05, 0.025}) {
    ThinDomainSpec spec(CurveFamily::ellipse(1.0, 0.1, 0.9, 0.0, 1.0),
                        ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1), eps, 1.0);
    double worst = 0.0;
    for (double th : {0.1, 1.3, 2.7, 4.1, 5.3})
      for (int side : {0, 1}) {
        SurfacePoint p(th, 0.5);
        double V = spec.family.normal_velocity(th, 0.5);
        double Ve = boundary_velocity(p, side, spec);
        double sgn = side == 1 ? 1.0 : -1.0;
        worst = std::max(worst, std::abs(Ve - sgn * V) / eps);
      }
    if (prev >= 0.0) REQUIRE(worst <= prev * 1.5);
    prev = worst;
  }
}

TEST_CASE("spec validation rejects bad thin domains") {
  auto fam = CurveFamily::circle(1.0, 0.0, 1.0);
  REQUIRE_THROWS_AS(ThinDomainSpec(fam, ProfilePair::constants(0.5, -0.5), 0.1, 1.0),
                    ConfigError);
  REQUIRE_THROWS_AS(ThinDomainSpec(fam, ProfilePair::constants(-1.0, 1.0), 0.5, 1.0),
                    ConfigError);
  REQUIRE_THROWS_AS(ThinDomainSpec(fam, ProfilePair::constants(-0.5, 0.5), 0.1, -1.0),
                    ConfigError);
}
