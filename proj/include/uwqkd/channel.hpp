#pragma once

#include <optional>
#include <string>

#include "uwqkd/numerics.hpp"

namespace uwqkd {

struct WaterType {
  std::string name = "clear_ocean";
  double extinction = 0.151;     // 1/m
  double correction_T = 0.16;    // beam-spread exponent, dimensionless

  void validate() const;

  static WaterType clear_ocean(double correction_T);
  static WaterType coastal(double correction_T);
  static WaterType turbid_harbor(double correction_T);
  // Looks up the extinction by name ("clear_ocean", "coastal", "turbid_harbor").
  static WaterType named(const std::string& name, double correction_T);

  bool operator==(const WaterType&) const = default;
};

// Tabulated beam-spread correction exponent for a 6 degree divergence,
// interpolated linearly in aperture diameter between 5 and 30 cm.
double correction_coefficient(double divergence_rad, double diameter_m);

struct TurbulenceParams {
  double omega = -2.2;           // temperature/salinity balance, < 0
  double chi_T = 1e-6;           // K^2 s^-3
  double epsilon = 5e-7;         // m^2 s^-3
  double alpha_th = 2.56e-4;     // 1/deg
  double d_r = 1.0;              // eddy diffusivity ratio
  double viscosity = 1.0576e-6;  // m^2/s
  double prandtl_T = 7.0;
  double prandtl_S = 686.0;
  double prandtl_TS = 13.85;

  void validate() const;

  static TurbulenceParams weak(double d_r = 1.0);
  static TurbulenceParams moderate(double d_r = 1.0);
  static TurbulenceParams strong(double d_r = 1.0);
  // "weak" | "moderate" | "strong"
  static TurbulenceParams named(const std::string& regime, double d_r = 1.0);

  bool operator==(const TurbulenceParams&) const = default;
};

struct LinkGeometry {
  double length = 100.0;          // m
  double tx_diameter = 0.10;      // m
  double rx_diameter = 0.10;      // m
  double divergence = 0.10471975511965977;  // rad (6 deg)
  double wavelength = 530e-9;     // m
  int relay_count = 0;

  void validate() const;
  double hop_length() const { return length / (relay_count + 1); }

  bool operator==(const LinkGeometry&) const = default;
};

double path_loss(const LinkGeometry& geom, const WaterType& water, double distance);

double kolmogorov_microscale(const TurbulenceParams& t);

double wave_structure_closed(double rho, double distance, const TurbulenceParams& t, double wavelength);

double nikishov_spectrum(double kappa, const TurbulenceParams& t);

// Numeric double integral over the spectrum; independent check of the closed form.
double wave_structure_numeric(double rho, double distance, const TurbulenceParams& t, double wavelength,
                              const QuadratureSpec& quad = {});

double fresnel_number(const LinkGeometry& geom, double hop_length);

// Average power transfer over one hop. No turbulence gives the vacuum value.
double power_transfer_mu(const LinkGeometry& geom, const std::optional<TurbulenceParams>& turbulence,
                         double hop_length, const QuadratureSpec& quad = {});

}  // namespace uwqkd
