#include "uwqkd/noise.hpp"

#include <cmath>

#include "uwqkd/constants.hpp"
#include "uwqkd/errors.hpp"

namespace uwqkd {

using constants::pi;

void Environment::validate() const {
  if (!(surface_irradiance >= 0.0)) throw DomainError("environment.surface_irradiance must be >= 0");
  if (!(diffuse_attenuation >= 0.0)) throw DomainError("environment.diffuse_attenuation must be >= 0");
  if (!(depth >= 0.0)) throw DomainError("environment.depth must be >= 0");
}

void ReceiverParams::validate() const {
  if (!(fov > 0.0 && fov <= pi + 1e-12)) throw DomainError("receiver.fov must be in (0, 180] deg");
  if (!(filter_width > 0.0)) throw DomainError("receiver.filter_width must be > 0");
  if (!(bit_period > 0.0 && gate_time > 0.0)) throw DomainError("receiver times must be > 0");
  if (!(dark_rate >= 0.0)) throw DomainError("receiver.dark_rate must be >= 0");
  if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
    throw DomainError("receiver.quantum_efficiency must be in (0, 1]");
  if (!(bob_transmittance > 0.0 && bob_transmittance <= 1.0))
    throw DomainError("receiver.bob_transmittance must be in (0, 1]");
  if (!(aperture_diameter > 0.0)) throw DomainError("receiver.aperture_diameter must be > 0");
}

double ReceiverParams::aperture_area() const { return pi * aperture_diameter * aperture_diameter / 4.0; }

double irradiance_at_depth(const Environment& env) {
  return env.surface_irradiance * std::exp(-env.diffuse_attenuation * env.depth);
}

double background_photons_per_polarization(const Environment& env, const ReceiverParams& rx, double wavelength) {
  const double collected = pi * irradiance_at_depth(env) * rx.aperture_area() * rx.gate_time * wavelength *
                           rx.filter_width * (1.0 - std::cos(rx.fov));
  return collected / (2.0 * constants::planck * constants::light_speed);
}

double dark_counts(const ReceiverParams& rx) { return rx.dark_rate * rx.bit_period; }

double noise_per_detector(const Environment& env, const ReceiverParams& rx, double wavelength) {
  return background_photons_per_polarization(env, rx, wavelength) / 2.0 + dark_counts(rx);
}

double decoy_noise_yield_Y0(const Environment& env, const ReceiverParams& rx, double wavelength) {
  const double background = pi * irradiance_at_depth(env) * rx.aperture_area() * rx.gate_time * wavelength *
                            rx.filter_width * (1.0 - std::cos(rx.fov)) /
                            (constants::planck * constants::light_speed);
  return 4.0 * dark_counts(rx) + background;
}

double relay_accumulated_background(double n_B0, double gamma, int relay_count) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("relay_accumulated_background: gamma outside [0, 1]");
  if (relay_count < 0) throw DomainError("relay_accumulated_background: negative relay count");
  const int terms = relay_count + 1;
  if (gamma == 1.0) return terms * n_B0;
  return n_B0 * (1.0 - std::pow(gamma, terms)) / (1.0 - gamma);
}

double relay_noise_upper(const Environment& env, const ReceiverParams& rx, const WaterType& water,
                         const LinkGeometry& geom) {
  const double n_B0 = background_photons_per_polarization(env, rx, geom.wavelength);
  const int hops = geom.relay_count + 1;
  if (hops == 1) return n_B0 / 2.0 + dark_counts(rx);
  const double L = geom.length;
  const double d = geom.rx_diameter;
  const double T = water.correction_T;
  const double theta = geom.divergence;
  const double total = -std::expm1(-water.extinction * std::pow(L, 1.0 - T) * std::pow(hops * d / theta, T));
  const double hop = -std::expm1(-water.extinction * std::pow(L / hops, 1.0 - T) * std::pow(d / theta, T));
  return n_B0 / 2.0 * total / hop + dark_counts(rx);
}

}  // namespace uwqkd
