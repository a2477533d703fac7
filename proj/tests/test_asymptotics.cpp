#include <catch2/catch_amalgamated.hpp>

#include "thinheat/asymptotics.hpp"
#include "thinheat/harness.hpp"

using namespace thinheat;
using Catch::Approx;

namespace {

// eta = R0 / R(t) on the growing circle: the exact limit solution with f = 0
// and constant profiles.
MovingScalar growing_circle_eta() {
  auto zero = [](double, double) { return 0.0; };
  return {[](double, double t) { return 1.0 / (1.0 + 0.5 * t); }, zero, zero,
          [](double, double t) {
            double R = 1.0 + 0.5 * t;
            return -0.5 / (R * R);
          }};
}

}  // namespace

TEST_CASE("zeta fields") {
  SECTION("vanish on a stationary curve with constant profiles") {
    ApproxSolution ap{CurveFamily::circle(1.0, 0.0, 1.0), ProfilePair::constants(-0.5, 0.5),
                      1.0, 0.1, growing_circle_eta(), nullptr};
    REQUIRE(ap.zeta(0, 0.3, 0.2) == Approx(0.0).margin(1e-14));
    REQUIRE(ap.zeta(1, 0.3, 0.2) == Approx(0.0).margin(1e-14));
  }
  SECTION("reduce to the velocity-squared term for constant profiles") {
    ApproxSolution ap{CurveFamily::circle(1.0, 0.5, 1.0), ProfilePair::constants(-0.3, 0.7),
                      2.0, 0.1, growing_circle_eta(), nullptr};
    double t = 0.2, eta = 1.0 / 1.1;
    // zeta_i = k_d^{-2} g_i V^2 eta / g
    REQUIRE(ap.zeta(1, 1.0, t) == Approx(0.7 * 0.25 * eta / 4.0).margin(1e-13));
    REQUIRE(ap.zeta(0, 1.0, t) == Approx(-0.3 * 0.25 * eta / 4.0).margin(1e-13));
  }
  SECTION("growing circle closed form") {
    ApproxSolution ap{CurveFamily::circle(1.0, 0.5, 1.0), ProfilePair::constants(0.0, 1.0),
                      1.0, 0.1, growing_circle_eta(), nullptr};
    double t = 0.2;
    REQUIRE(ap.zeta(1, 2.0, t) == Approx(0.25 / 1.1).margin(1e-13));
    REQUIRE(ap.zeta(0, 2.0, t) == Approx(0.0).margin(1e-14));
  }
}

TEST_CASE("approximate solution assembly") {
  SECTION("reduces to eta on a stationary curve with constant profiles") {
    auto zero = [](double, double) { return 0.0; };
    MovingScalar eta{[](double th, double) { return 1.0 + 0.5 * std::cos(th); },
                     [](double th, double) { return -0.5 * std::sin(th); },
                     [](double th, double) { return -0.5 * std::cos(th); }, zero};
    ApproxSolution ap{CurveFamily::circle(1.0, 0.0, 1.0), ProfilePair::constants(-0.5, 0.5),
                      1.0, 0.1, eta, nullptr};
    Vec2 x(1.03, 0.02);
    Projection pr = closest_point(x, 0.0, ap.family);
    REQUIRE(ap.value(x, 0.0) == Approx(eta.value(pr.p.theta, 0.0)).margin(1e-14));
  }
  SECTION("equals eta on the curve itself") {
    ApproxSolution ap{CurveFamily::circle(1.0, 0.5, 1.0), ProfilePair::constants(0.0, 1.0),
                      1.0, 0.1, growing_circle_eta(), nullptr};
    Vec2 x = ap.family.position(1.2, 0.3);
    REQUIRE(ap.value(x, 0.3) == Approx(growing_circle_eta().value(1.2, 0.3)).margin(1e-14));
  }
  SECTION("matches the eps-power assembly to 1e-12") {
    ApproxSolution ap{CurveFamily::circle(1.0, 0.5, 1.0), ProfilePair::constants(0.0, 1.0),
                      1.0, 0.1, growing_circle_eta(), nullptr};
    Vec2 x(1.3, 0.0);
    REQUIRE(std::abs(ap.value(x, 0.2) - ap.value_powers(x, 0.2)) < 1e-12);
  }
}

TEST_CASE("expansion coefficient identities") {
  ThinDomainSpec spec(CurveFamily::ellipse(1.0, 0.1, 0.9, 0.0, 1.0),
                      ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1), 0.05, 1.3);
  ManufacturedEta mf;
  ApproxSolution ap{spec.family, spec.profiles, spec.k_d, spec.epsilon, mf.field(), nullptr};
  SurfaceCalculus calc{spec.family};
  for (double th : {0.2, 1.5, 4.0}) {
    double t = 0.4;
    double g = spec.profiles.width(th, t);
    double V = spec.family.normal_velocity(th, t);
    double eta = ap.eta.value(th, t);
    SECTION("d_r eta1 = -k_d^{-1} V eta at theta " + std::to_string(th)) {
      double h = 1e-6;
      double d1 = (ap.eta1_r(h, th, t) - ap.eta1_r(-h, th, t)) / (2 * h);
      REQUIRE(d1 == Approx(-V * eta / spec.k_d).margin(1e-9));
    }
    SECTION("d_r eta2(g_i) equals the boundary data g zeta_i at theta " + std::to_string(th)) {
      double h = 1e-5;
      for (int side : {0, 1}) {
        double gi = spec.profiles.side(side).value(th, t);
        double d1 = (ap.eta2_r(gi + h, th, t) - ap.eta2_r(gi - h, th, t)) / (2 * h);
        // reference bracket evaluated through the exact material derivative
        const Profile& gp = spec.profiles.side(side);
        double J = spec.family.speed(th, t);
        double bracket = gp.dtheta(th, t) * ap.eta.dtheta(th, t) / (J * J) -
                         spec.profiles.exact_material_dt(side, th, t, spec.family) * eta / spec.k_d +
                         gi * V * V * eta / (spec.k_d * spec.k_d);
        REQUIRE(d1 == Approx(bracket).margin(1e-8));
        REQUIRE(d1 == Approx(g * ap.zeta(side, th, t)).margin(1e-8));
      }
    }
    SECTION("d_r^2 eta2 = zeta_1 - zeta_0 at theta " + std::to_string(th)) {
      double h = 1e-4, r = 0.1;
      double d2 = (ap.eta2_r(r + h, th, t) - 2 * ap.eta2_r(r, th, t) + ap.eta2_r(r - h, th, t)) /
                  (h * h);
      REQUIRE(d2 == Approx(ap.zeta(1, th, t) - ap.zeta(0, th, t)).margin(1e-6));
    }
  }
}

TEST_CASE("lambda transform") {
  auto fam = CurveFamily::circle(1.0, 0.5, 1.0);
  SECTION("closed-form value on the growing circle") {
    REQUIRE(lambda_value({1.2, 0.0}, 0.0, fam, 1.0) == Approx(-0.1).margin(1e-12));
  }
  SECTION("identity on a stationary curve and on the curve itself") {
    auto stat = CurveFamily::circle(1.0, 0.0, 1.0);
    REQUIRE(lambda_value({1.3, 0.0}, 0.0, stat, 1.0) == Approx(0.0).margin(1e-14));
    REQUIRE(lambda_value(fam.position(0.7, 0.2), 0.2, fam, 1.0) == Approx(0.0).margin(1e-12));
  }
  SECTION("forward then inverse is the identity to 1e-14") {
    ThinDomainSpec spec(fam, ProfilePair::constants(-0.5, 0.5), 0.1, 1.0);
    BulkField f;
    f.t = 0.3;
    f.n_theta = 16;
    f.n_s = 4;
    f.values.resize(16 * 5);
    for (int j = 0; j < 16; ++j)
      for (int m = 0; m <= 4; ++m) f.at(j, m) = std::sin(j + m);
    BulkField g = lambda_transform(lambda_transform(f, TransformDirection::forward, spec),
                                   TransformDirection::inverse, spec);
    for (std::size_t i = 0; i < f.values.size(); ++i)
      REQUIRE(g.values[i] == Approx(f.values[i]).margin(1e-14));
  }
  SECTION("bundle derivatives agree with finite differences") {
    double t = 0.3;
    Vec2 x(1.17, 0.21);
    ScalarBundle b = lambda_bundle(x, t, fam, 0.7);
    auto val = [&](const Vec2& z, double tt) { return lambda_value(z, tt, fam, 0.7); };
    double ht = 1e-4;
    double fd_t = (val(x, t - 2 * ht) - 8 * val(x, t - ht) + 8 * val(x, t + ht) - val(x, t + 2 * ht)) / (12 * ht);
    REQUIRE(b.dt == Approx(fd_t).margin(1e-8));
    double h = 1e-3;
    for (int axis = 0; axis < 2; ++axis) {
      Vec2 e = Vec2::Zero();
      e[axis] = h;
      double fd1 = (val(x - 2 * e, t) - 8 * val(x - e, t) + 8 * val(x + e, t) - val(x + 2 * e, t)) / (12 * h);
      REQUIRE(b.grad[axis] == Approx(fd1).margin(1e-9));
      double fd2 = (-val(x + 2 * e, t) + 16 * val(x + e, t) - 30 * val(x, t) + 16 * val(x - e, t) - val(x - 2 * e, t)) / (12 * h * h);
      REQUIRE(b.hess(axis, axis) == Approx(fd2).margin(1e-6));
    }
  }
}

TEST_CASE("solvability condition") {
  auto fam = CurveFamily::circle(1.0, 0.5, 1.0);
  auto prof = ProfilePair::constants(0.0, 1.0);
  SECTION("vanishes on the exact growing-circle solution") {
    REQUIRE(solvability_residual(fam, prof, 1.0, growing_circle_eta(), nullptr, 0.8) < 1e-10);
  }
  SECTION("is order one on a perturbed non-solution") {
    MovingScalar bad{[](double th, double t) { return 1.0 / (1.0 + 0.5 * t) + 0.3 * std::cos(th); },
                     [](double th, double) { return -0.3 * std::sin(th); },
                     [](double th, double) { return -0.3 * std::cos(th); },
                     [](double, double t) {
                       double R = 1 + 0.5 * t;
                       return -0.5 / (R * R);
                     }};
    REQUIRE(solvability_residual(fam, prof, 1.0, bad, nullptr, 0.8) > 0.1);
  }
  SECTION("both algebraic forms agree pointwise") {
    ManufacturedEta mf;
    auto ell = CurveFamily::ellipse(1.0, 0.1, 0.9, 0.0, 1.0);
    auto tprof = ProfilePair::theta_cos(-0.5, 1.0, 0.2, 1);
    REQUIRE(solvability_dual_form_gap(ell, tprof, 1.3, mf.field(), nullptr, 0.8) < 1e-10);
  }
}

TEST_CASE("bulk residual turns order-one when eta is not a solution") {
  auto fam = CurveFamily::circle(1.0, 0.5, 0.8);
  auto prof = ProfilePair::constants(0.0, 1.0);
  MovingScalar bad{[](double th, double t) { return 1.0 / (1.0 + 0.5 * t) + 0.5 * std::cos(th); },
                   [](double th, double) { return -0.5 * std::sin(th); },
                   [](double th, double) { return -0.5 * std::cos(th); },
                   [](double, double t) {
                     double R = 1 + 0.5 * t;
                     return -0.5 / (R * R);
                   }};
  double sup_good = 0.0, sup_bad = 0.0;
  for (double eps : {0.1, 0.05}) {
    ApproxSolution good{fam, prof, 1.0, eps, growing_circle_eta(), nullptr};
    ApproxSolution pert{fam, prof, 1.0, eps, bad, nullptr};
    sup_good = bulk_residual(good, 600, 1, 0.8).sup;
    sup_bad = bulk_residual(pert, 600, 1, 0.8).sup;
    REQUIRE(sup_bad > 10.0 * sup_good);
  }
  REQUIRE(sup_bad > 0.3);  // order one, does not shrink with eps
}

TEST_CASE("boundary residual sits at the noise floor for the trivial setup") {
  // stationary curve, constant profiles, stationary constant eta
  ApproxSolution ap{CurveFamily::circle(1.0, 0.0, 0.8), ProfilePair::constants(-0.5, 0.5),
                    1.0, 0.1, MovingScalar::constant(1.0), nullptr};
  ResidualEstimate est = boundary_residual(ap, 32, 8, 0.8, false);
  REQUIRE(est.sup < 1e-9);
}

TEST_CASE("eta2 sign variants are discriminated by the boundary residual order") {
  auto fam = CurveFamily::circle(1.0, 0.5, 0.8);
  auto prof = ProfilePair::constants(0.0, 1.0);
  auto slope_of = [&](Eta2Variant v) {
    std::vector<std::pair<double, double>> rows;
    for (double eps : {0.1, 0.05, 0.025}) {
      ApproxSolution ap{fam, prof, 1.0, eps, growing_circle_eta(), nullptr, false, v};
      rows.emplace_back(eps, boundary_residual(ap, 48, 12, 0.8, false).sup);
    }
    return fit_slope(rows).slope;
  };
  REQUIRE(slope_of(Eta2Variant::zeta1_minus_zeta0) > 1.7);
  REQUIRE(slope_of(Eta2Variant::zeta0_minus_zeta1) < 1.4);
}
