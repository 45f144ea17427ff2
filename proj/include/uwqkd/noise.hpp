#pragma once

#include <string>

#include "uwqkd/channel.hpp"
#include "uwqkd/constants.hpp"

namespace uwqkd {

struct Environment {
  double surface_irradiance = 1e-3;  // W/m^2, clear night with full moon
  double diffuse_attenuation = 0.08; // 1/m
  double depth = 100.0;              // m
  std::string condition = "clear night full moon";

  void validate() const;

  bool operator==(const Environment&) const = default;
};

struct ReceiverParams {
  double fov = constants::pi;             // rad
  double filter_width = 30e-9;           // m
  double bit_period = 35e-9;             // s
  double gate_time = 200e-12;            // s
  double dark_rate = 60.0;               // Hz
  double quantum_efficiency = 0.5;
  double bob_transmittance = 0.045;
  double aperture_diameter = 0.10;       // m

  void validate() const;
  double aperture_area() const;

  bool operator==(const ReceiverParams&) const = default;
};

double irradiance_at_depth(const Environment& env);

// Mean background photons per polarization in one gate.
double background_photons_per_polarization(const Environment& env, const ReceiverParams& rx, double wavelength);

double dark_counts(const ReceiverParams& rx);

double noise_per_detector(const Environment& env, const ReceiverParams& rx, double wavelength);

// Noise yield summed over all four detectors.
double decoy_noise_yield_Y0(const Environment& env, const ReceiverParams& rx, double wavelength);

// Background collected along a passive relay chain with per-hop transfer gamma.
double relay_accumulated_background(double n_B0, double gamma, int relay_count);

// Upper bound on the per-detector noise at the end of a relay chain.
double relay_noise_upper(const Environment& env, const ReceiverParams& rx, const WaterType& water,
                         const LinkGeometry& geom);

}  // namespace uwqkd
