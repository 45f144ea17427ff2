#include "uwqkd/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "uwqkd/constants.hpp"
#include "uwqkd/errors.hpp"

namespace uwqkd {

using constants::pi;

void WaterType::validate() const {
  if (!(extinction > 0.0)) throw DomainError("water.extinction must be > 0");
  if (!(correction_T > 0.0 && correction_T < 1.0)) throw DomainError("water.correction_T must be in (0, 1)");
}

WaterType WaterType::clear_ocean(double t) { return {"clear_ocean", 0.151, t}; }
WaterType WaterType::coastal(double t) { return {"coastal", 0.339, t}; }
WaterType WaterType::turbid_harbor(double t) { return {"turbid_harbor", 2.195, t}; }

WaterType WaterType::named(const std::string& name, double t) {
  if (name == "clear_ocean") return clear_ocean(t);
  if (name == "coastal") return coastal(t);
  if (name == "turbid_harbor") return turbid_harbor(t);
  throw DomainError("unknown water type '" + name + "'");
}

double correction_coefficient(double divergence_rad, double diameter_m) {
  static constexpr std::array<std::array<double, 2>, 4> table{{{0.05, 0.13}, {0.10, 0.16}, {0.20, 0.21}, {0.30, 0.26}}};
  if (std::fabs(divergence_rad - 6.0 * constants::deg) > 1e-9)
    throw DomainError("correction coefficient is only tabulated for a 6 deg divergence");
  const double d = diameter_m;
  if (!(d >= table.front()[0] - 1e-12 && d <= table.back()[0] + 1e-12))
    throw DomainError("correction coefficient: diameter outside tabulated range [0.05, 0.30] m");
  for (std::size_t i = 0; i + 1 < table.size(); ++i) {
    const auto& lo = table[i];
    const auto& hi = table[i + 1];
    if (d <= hi[0] + 1e-12) {
      const double s = std::clamp((d - lo[0]) / (hi[0] - lo[0]), 0.0, 1.0);
      return lo[1] + s * (hi[1] - lo[1]);
    }
  }
  return table.back()[1];
}

void TurbulenceParams::validate() const {
  if (!(chi_T > 0.0)) throw DomainError("turbulence.chi_T must be > 0");
  if (!(epsilon > 0.0)) throw DomainError("turbulence.epsilon must be > 0");
  if (!(viscosity > 0.0)) throw DomainError("turbulence.viscosity must be > 0");
  if (omega == 0.0 || !std::isfinite(omega)) throw DomainError("turbulence.omega must be non-zero");
  if (!(d_r >= 0.0)) throw DomainError("turbulence.d_r must be >= 0");
  if (!(prandtl_T > 0.0 && prandtl_S > 0.0 && prandtl_TS > 0.0))
    throw DomainError("turbulence Prandtl numbers must be > 0");
  if (!std::isfinite(alpha_th)) throw DomainError("turbulence.alpha_th must be finite");
}

TurbulenceParams TurbulenceParams::weak(double d_r) {
  TurbulenceParams t;
  t.chi_T = 2e-7;
  t.epsilon = 2e-5;
  t.d_r = d_r;
  return t;
}

TurbulenceParams TurbulenceParams::moderate(double d_r) {
  TurbulenceParams t;
  t.chi_T = 1e-6;
  t.epsilon = 5e-7;
  t.d_r = d_r;
  return t;
}

TurbulenceParams TurbulenceParams::strong(double d_r) {
  TurbulenceParams t;
  t.chi_T = 1e-5;
  t.epsilon = 1e-5;
  t.d_r = d_r;
  return t;
}

TurbulenceParams TurbulenceParams::named(const std::string& regime, double d_r) {
  if (regime == "weak") return weak(d_r);
  if (regime == "moderate") return moderate(d_r);
  if (regime == "strong") return strong(d_r);
  throw DomainError("unknown turbulence regime '" + regime + "'");
}

void LinkGeometry::validate() const {
  if (!(length > 0.0)) throw DomainError("geometry.length must be > 0");
  if (!(tx_diameter > 0.0 && rx_diameter > 0.0)) throw DomainError("geometry diameters must be > 0");
  if (!(divergence > 0.0 && divergence < pi)) throw DomainError("geometry.divergence must be in (0, 180) deg");
  if (!(wavelength > 0.0)) throw DomainError("geometry.wavelength must be > 0");
  if (relay_count < 0) throw DomainError("geometry.relay_count must be >= 0");
}

double path_loss(const LinkGeometry& geom, const WaterType& water, double distance) {
  if (!(distance > 0.0)) throw DomainError("path_loss: distance must be > 0");
  const double spread = std::pow(geom.rx_diameter / (geom.divergence * distance), water.correction_T);
  return std::exp(-water.extinction * distance * spread);
}

double kolmogorov_microscale(const TurbulenceParams& t) {
  return std::pow(t.viscosity * t.viscosity * t.viscosity / t.epsilon, 0.25);
}

namespace {

double mixing_factor(const TurbulenceParams& t) {
  return t.omega * t.omega + t.d_r - t.omega * (t.d_r + 1.0);
}

double strength(const TurbulenceParams& t) {
  return t.alpha_th * t.alpha_th * t.chi_T / (t.omega * t.omega) * std::pow(t.epsilon, -1.0 / 3.0);
}

}  // namespace

double wave_structure_closed(double rho, double distance, const TurbulenceParams& t, double wavelength) {
  if (!(rho >= 0.0)) throw DomainError("wave_structure_closed: rho must be >= 0");
  if (!(distance > 0.0)) throw DomainError("wave_structure_closed: distance must be > 0");
  const double k = 2.0 * pi / wavelength;
  const double eta = kolmogorov_microscale(t);
  const double shape = 1.175 * std::pow(eta, 2.0 / 3.0) * rho + 0.419 * std::pow(rho, 5.0 / 3.0);
  return 1.44 * pi * k * k * distance * strength(t) * shape * mixing_factor(t);
}

double nikishov_spectrum(double kappa, const TurbulenceParams& t) {
  if (!(kappa > 0.0)) throw DomainError("nikishov_spectrum: kappa must be > 0");
  const double eta = kolmogorov_microscale(t);
  const double e43 = std::pow(eta, 4.0 / 3.0);
  const double e2 = eta * eta;
  const double a = 1.08 / t.prandtl_T * e43, b = 1.692 / t.prandtl_T * e2;
  const double c = 1.08 / t.prandtl_S * e43, d = 1.692 / t.prandtl_S * e2;
  const double e = 0.54 / t.prandtl_TS * e43, f = 0.846 / t.prandtl_TS * e2;
  const double g = 2.35 * std::pow(eta, 2.0 / 3.0);
  const double k43 = std::pow(kappa, 4.0 / 3.0);
  const double k2 = kappa * kappa;
  const double mix = t.omega * t.omega * std::exp(-a * k43 - b * k2) + t.d_r * std::exp(-c * k43 - d * k2) -
                     t.omega * (t.d_r + 1.0) * std::exp(-e * k43 - f * k2);
  return 0.18 * strength(t) * std::pow(kappa, -11.0 / 3.0) / pi * (1.0 + g * std::pow(kappa, 2.0 / 3.0)) * mix;
}

namespace {

// Running integral of J0 on a fixed lattice so repeated lookups stay cheap.
class J0Primitive {
 public:
  explicit J0Primitive(const QuadratureSpec& quad) : quad_(quad) { cum_.push_back(0.0); }

  double operator()(double u) {
    const auto idx = static_cast<std::size_t>(u / kStep);
    while (cum_.size() <= idx) {
      const double lo = (cum_.size() - 1) * kStep;
      cum_.push_back(cum_.back() + integrate(bessel_j0, lo, lo + kStep, quad_));
    }
    const double lo = idx * kStep;
    if (u - lo <= 0.0) return cum_[idx];
    return cum_[idx] + integrate(bessel_j0, lo, u, quad_);
  }

 private:
  static constexpr double kStep = pi / 2.0;
  QuadratureSpec quad_;
  std::vector<double> cum_;
};

// Mean of 1 - J0(u z) over z in [0, 1].
double ring_average(double u, J0Primitive& prim) {
  if (u < 2.0) {
    const double q = 0.25 * u * u;
    double term = 1.0;  // q^n / (n!)^2
    double sum = 0.0;
    for (int n = 1; n < 60; ++n) {
      term *= q / (static_cast<double>(n) * n);
      const double add = term / (2.0 * n + 1.0);
      sum += (n % 2 == 1) ? add : -add;
      if (add < 1e-18 * sum) break;
    }
    return sum;
  }
  return 1.0 - prim(u) / u;
}

}  // namespace

double wave_structure_numeric(double rho, double distance, const TurbulenceParams& t, double wavelength,
                              const QuadratureSpec& quad) {
  if (!(rho >= 0.0)) throw DomainError("wave_structure_numeric: rho must be >= 0");
  if (!(distance > 0.0)) throw DomainError("wave_structure_numeric: distance must be > 0");
  quad.validate();
  if (rho == 0.0) return 0.0;

  QuadratureSpec inner_quad = quad;
  inner_quad.abs_tol = 1e-12;
  inner_quad.rel_tol = 1e-10;
  J0Primitive prim(inner_quad);

  // kappa = s^3 removes the kappa^(-2/3) endpoint behaviour.
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double kappa = s * s * s;
    return 3.0 * s * s * kappa * nikishov_spectrum(kappa, t) * ring_average(kappa * rho, prim);
  };

  double peak = 0.0;
  double s_peak = 0.0;
  double s_max = 0.0;
  for (int i = -80; i <= 200; ++i) {
    const double s = std::cbrt(std::pow(10.0, i / 20.0));
    const double v = std::fabs(integrand(s));
    if (v > peak) {
      peak = v;
      s_peak = s;
    } else if (s > s_peak && v < 1e-12 * peak) {
      s_max = s;
      break;
    }
  }
  if (s_max == 0.0) throw ConvergenceError("wave_structure_numeric: spectrum cutoff not found", 0.0, INFINITY);

  const double eta = kolmogorov_microscale(t);
  std::vector<double> points{0.0};
  for (double kappa : {0.1 / rho, 1.0 / rho, 10.0 / rho, 0.1 / eta, 1.0 / eta, 3.0 / eta}) {
    const double s = std::cbrt(kappa);
    if (s > 0.0 && s < s_max) points.push_back(s);
  }
  points.push_back(s_max);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const double k = 2.0 * pi / wavelength;
  const double inner = integrate_partitioned(integrand, points, quad).value;
  return 8.0 * pi * pi * k * k * distance * inner;
}

double fresnel_number(const LinkGeometry& geom, double hop_length) {
  if (!(hop_length > 0.0)) throw DomainError("fresnel_number: hop length must be > 0");
  const double r = pi * geom.tx_diameter * geom.rx_diameter / (4.0 * geom.wavelength * hop_length);
  return r * r;
}

double power_transfer_mu(const LinkGeometry& geom, const std::optional<TurbulenceParams>& turbulence,
                         double hop_length, const QuadratureSpec& quad) {
  if (!(hop_length > 0.0)) throw DomainError("power_transfer_mu: hop length must be > 0");
  quad.validate();
  const double root_f = std::sqrt(fresnel_number(geom, hop_length));
  const double scale = 8.0 * root_f / pi;

  auto structure = [&](double x) {
    return turbulence ? wave_structure_closed(geom.tx_diameter * x, hop_length, *turbulence, geom.wavelength) : 0.0;
  };

  // Beyond the point where exp(-W/2) < e^-50 the integrand is numerically zero.
  double upper = 1.0;
  if (turbulence && structure(1.0) > 100.0) {
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (structure(mid) > 100.0 ? hi : lo) = mid;
    }
    upper = hi;
  }

  auto integrand = [&](double x) {
    const double overlap = std::acos(x) - x * std::sqrt(std::max(0.0, 1.0 - x * x));
    const double fade = turbulence ? std::exp(-0.5 * structure(x)) : 1.0;
    return fade * overlap * bessel_j1(4.0 * x * root_f);
  };

  // One panel per half period of the Bessel factor.
  const double half_period = pi / (4.0 * root_f);
  const auto panels = std::max<long>(8, static_cast<long>(std::ceil(upper / half_period)));
  std::vector<double> points(panels + 1);
  for (long i = 0; i <= panels; ++i) points[i] = upper * static_cast<double>(i) / panels;

  QuadratureSpec scaled = quad;
  scaled.abs_tol = quad.abs_tol / scale;
  scaled.max_subdivisions = quad.max_subdivisions + static_cast<int>(panels);
  const double mu = scale * integrate_partitioned(integrand, points, scaled).value;
  return std::clamp(mu, 0.0, 1.0);
}

}  // namespace uwqkd
