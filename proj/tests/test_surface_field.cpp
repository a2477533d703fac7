#include <catch2/catch_amalgamated.hpp>

#include "thinheat/surface_field.hpp"

using namespace thinheat;
using Catch::Approx;

TEST_CASE("constant fields have vanishing tangential derivatives") {
  auto fam = CurveFamily::ellipse(1.2, 0.0, 0.9, 0.0, 1.0);
  auto f = SurfaceField::sample(0.0, 64, [](double) { return 3.7; });
  SurfacePoint p(1.234, 0.0);
  REQUIRE(surface_gradient(f, p, fam).norm() < 1e-12);
  REQUIRE(surface_laplacian(f, p, fam) == Approx(0.0).margin(1e-10));
}

TEST_CASE("cos(theta) is a Laplace-Beltrami eigenfunction of the unit circle") {
  auto fam = CurveFamily::circle(1.0, 0.0, 1.0);
  auto f = SurfaceField::sample(0.0, 256, [](double th) { return std::cos(th); },
                                FieldBackend::spectral);
  for (double th : {0.0, 0.4, 2.2, 5.9}) {
    REQUIRE(surface_laplacian(f, SurfacePoint(th, 0.0), fam) ==
            Approx(-std::cos(th)).margin(1e-8));
  }
  // 4th-order stencil route stays within its truncation error
  auto g = SurfaceField::sample(0.0, 256, [](double th) { return std::cos(th); });
  int j = 37;
  REQUIRE(g.fd4_dtheta2(j) == Approx(-std::cos(two_pi * j / 256)).margin(1e-8));
  REQUIRE(g.fd4_dtheta(j) == Approx(-std::sin(two_pi * j / 256)).margin(1e-10));
}

TEST_CASE("ellipse surface Laplacian matches a dense-grid reference") {
  auto fam = CurveFamily::ellipse(1.2, 0.0, 0.9, 0.0, 1.0);
  auto eta = [](double th) { return std::sin(2.0 * th); };
  auto f = SurfaceField::sample(0.0, 256, eta, FieldBackend::spectral);
  // reference: 4th-order stencils of the raw samples on a 2^14 grid
  const int N = 1 << 14;
  auto dense = SurfaceField::sample(0.0, N, eta);
  for (int jj : {0, 977, 5000, 12345}) {
    double th = two_pi * jj / N;
    double d1 = dense.fd4_dtheta(jj), d2 = dense.fd4_dtheta2(jj);
    double J = fam.speed(th, 0.0), Jp = fam.speed_dtheta(th, 0.0);
    double ref = (d2 - d1 * Jp / J) / (J * J);
    REQUIRE(surface_laplacian(f, SurfacePoint(th, 0.0), fam) == Approx(ref).margin(1e-6));
  }
}

TEST_CASE("spline interpolation reproduces the nodes and stays smooth") {
  std::vector<double> v(64);
  for (int j = 0; j < 64; ++j) v[static_cast<std::size_t>(j)] = std::exp(std::sin(two_pi * j / 64));
  SurfaceField f(0.0, v);
  for (int j = 0; j < 64; ++j)
    REQUIRE(f.value(two_pi * j / 64) == Approx(v[static_cast<std::size_t>(j)]).margin(1e-13));
  // derivative consistency against a fine difference of the interpolant
  double th = 1.37, h = 1e-6;
  REQUIRE(f.dtheta(th) == Approx((f.value(th + h) - f.value(th - h)) / (2 * h)).margin(1e-7));
}

TEST_CASE("spectral backend is exact on band-limited data") {
  auto f = SurfaceField::sample(0.0, 32, [](double th) { return 1.0 + std::cos(3 * th) - 0.5 * std::sin(5 * th); },
                                FieldBackend::spectral);
  for (double th : {0.123, 2.9, 4.56}) {
    double exact = 1.0 + std::cos(3 * th) - 0.5 * std::sin(5 * th);
    REQUIRE(f.value(th) == Approx(exact).margin(1e-12));
    double dexact = -3.0 * std::sin(3 * th) - 2.5 * std::cos(5 * th);
    REQUIRE(f.dtheta(th) == Approx(dexact).margin(1e-11));
  }
}

TEST_CASE("grid and time mismatches are rejected") {
  auto fam = CurveFamily::circle(1.0, 0.0, 1.0);
  auto f = SurfaceField::sample(0.25, 64, [](double) { return 1.0; });
  REQUIRE_THROWS_AS(surface_gradient(f, SurfacePoint(0.0, 0.5), fam), GridMismatch);
  REQUIRE_THROWS_AS(SurfaceField(0.0, std::vector<double>(10, 1.0)), GridMismatch);
  REQUIRE_THROWS_AS(SurfaceField(0.0, std::vector<double>(15, 1.0)), GridMismatch);
  std::vector<double> bad(32, 1.0);
  bad[3] = std::nan("");
  REQUIRE_THROWS_AS(SurfaceField(0.0, bad), GridMismatch);
}
