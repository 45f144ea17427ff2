#include <doctest.h>

#include <cmath>

#include "uwqkd/channel.hpp"
#include "uwqkd/constants.hpp"
#include "uwqkd/errors.hpp"

using namespace uwqkd;

namespace {

const double kSixDeg = 6.0 * constants::deg;

LinkGeometry geometry(double d) {
  LinkGeometry g;
  g.tx_diameter = g.rx_diameter = d;
  return g;
}

// Composite Simpson on the vacuum power-transfer integral.
double simpson_mu0(double d, double L, double lambda, int n) {
  const double rootF = M_PI * d * d / (4.0 * lambda * L);
  auto f = [&](double x) { return (std::acos(x) - x * std::sqrt(1.0 - x * x)) * std::cyl_bessel_j(1.0, 4.0 * x * rootF); };
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return 8.0 * rootF / M_PI * s * h / 3.0;
}

}  // namespace

TEST_CASE("water types carry their extinction coefficients") {
  CHECK(WaterType::clear_ocean(0.16).extinction == 0.151);
  CHECK(WaterType::coastal(0.16).extinction == 0.339);
  CHECK(WaterType::turbid_harbor(0.16).extinction == 2.195);
  CHECK(WaterType::named("coastal", 0.13).correction_T == 0.13);
  CHECK_THROWS_AS(WaterType::named("lake", 0.13), DomainError);
  WaterType bad = WaterType::clear_ocean(0.16);
  bad.extinction = -0.1;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("extinction"), DomainError);
}

TEST_CASE("correction exponent table and interpolation") {
  CHECK(correction_coefficient(kSixDeg, 0.05) == doctest::Approx(0.13));
  CHECK(correction_coefficient(kSixDeg, 0.10) == doctest::Approx(0.16));
  CHECK(correction_coefficient(kSixDeg, 0.20) == doctest::Approx(0.21));
  CHECK(correction_coefficient(kSixDeg, 0.30) == doctest::Approx(0.26));
  CHECK(correction_coefficient(kSixDeg, 0.075) == doctest::Approx(0.145));
  CHECK(correction_coefficient(kSixDeg, 0.25) == doctest::Approx(0.235));
  CHECK_THROWS_AS(correction_coefficient(kSixDeg, 0.04), DomainError);
  CHECK_THROWS_AS(correction_coefficient(kSixDeg, 0.31), DomainError);
  CHECK_THROWS_AS(correction_coefficient(5.0 * constants::deg, 0.10), DomainError);
}

TEST_CASE("path loss follows the modified Beer-Lambert law") {
  const LinkGeometry g = geometry(0.10);
  const WaterType w = WaterType::clear_ocean(0.16);
  CHECK(path_loss(g, w, 100.0) == doctest::Approx(0.0007661124145518287).epsilon(1e-12));
  CHECK(path_loss(g, w, 1.0) == doctest::Approx(std::exp(-0.151 * std::pow(0.1 / kSixDeg, 0.16))));
  CHECK_THROWS_AS(path_loss(g, w, 0.0), DomainError);
}

TEST_CASE("turbulence regimes and Kolmogorov microscale") {
  CHECK(kolmogorov_microscale(TurbulenceParams::weak()) == doctest::Approx(0.0004931551612264646));
  CHECK(kolmogorov_microscale(TurbulenceParams::moderate()) == doctest::Approx(0.0012402195714936687));
  CHECK(kolmogorov_microscale(TurbulenceParams::strong()) == doctest::Approx(0.0005864636265308257));
  CHECK(TurbulenceParams::named("strong", 0.5).d_r == 0.5);
  CHECK_THROWS_AS(TurbulenceParams::named("calm"), DomainError);
}

TEST_CASE("closed-form wave structure function") {
  const TurbulenceParams t = TurbulenceParams::moderate();
  const double lambda = 530e-9, k = 2.0 * M_PI / lambda, rho = 0.02, L = 50.0;
  const double eta = 0.0012402195714936687;
  const double expect = 1.44 * M_PI * k * k * L * (2.56e-4 * 2.56e-4 * 1e-6 / (2.2 * 2.2)) * std::pow(5e-7, -1.0 / 3.0) *
                        (1.175 * std::pow(eta, 2.0 / 3.0) * rho + 0.419 * std::pow(rho, 5.0 / 3.0)) * 10.24;
  CHECK(wave_structure_closed(rho, L, t, lambda) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(wave_structure_closed(0.0, L, t, lambda) == 0.0);
  CHECK(wave_structure_closed(rho, 2 * L, t, lambda) == doctest::Approx(2 * wave_structure_closed(rho, L, t, lambda)));
}

TEST_CASE("numeric wave structure function approaches the closed form at large separation") {
  for (const char* r : {"weak", "moderate", "strong"}) {
    const TurbulenceParams t = TurbulenceParams::named(r);
    const double closed = wave_structure_closed(0.1, 100.0, t, 530e-9);
    const double numeric = wave_structure_numeric(0.1, 100.0, t, 530e-9);
    CHECK(numeric == doctest::Approx(closed).epsilon(0.01));
  }
  CHECK(wave_structure_numeric(0.0, 100.0, TurbulenceParams::weak(), 530e-9) == 0.0);
}

TEST_CASE("Nikishov spectrum") {
  const TurbulenceParams t = TurbulenceParams::moderate();
  // inertial range: kappa^(-11/3) scaling
  const double ratio = nikishov_spectrum(2e-3, t) / nikishov_spectrum(1e-3, t);
  CHECK(ratio == doctest::Approx(std::pow(2.0, -11.0 / 3.0)).epsilon(1e-3));
  CHECK_THROWS_AS(nikishov_spectrum(0.0, t), DomainError);
}

TEST_CASE("Fresnel number") {
  const LinkGeometry g = geometry(0.05);
  const double r = M_PI * 0.05 * 0.05 / (4.0 * 530e-9 * 20.0);
  CHECK(fresnel_number(g, 20.0) == doctest::Approx(r * r));
}

TEST_CASE("vacuum power transfer matches Simpson integration") {
  for (double L : {5.0, 30.0, 120.0}) {
    const double ref = simpson_mu0(0.05, L, 530e-9, 400000);
    CHECK(power_transfer_mu(geometry(0.05), std::nullopt, L) == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("power transfer limits") {
  // far field: mu -> F
  const LinkGeometry g = geometry(0.002);
  const double L = 2000.0;
  const double F = fresnel_number(g, L);
  REQUIRE(F < 1e-3);
  CHECK(power_transfer_mu(g, std::nullopt, L) == doctest::Approx(F).epsilon(2e-3));
  // near field: mu -> 1
  CHECK(power_transfer_mu(geometry(0.10), std::nullopt, 1.0) == doctest::Approx(1.0).epsilon(1e-3));
}
