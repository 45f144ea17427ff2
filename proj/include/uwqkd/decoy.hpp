#pragma once

#include <string>

#include "uwqkd/bb84.hpp"

namespace uwqkd {

struct DecoyParams {
  double signal_intensity = 0.48;
  double decoy_intensity = 0.05;
  double detector_error = 0.033;
  double noise_error = 0.5;
  double sift_factor = 0.5;
  double ec_efficiency = 1.22;

  void validate() const;

  bool operator==(const DecoyParams&) const = default;
};

struct DecoyGains {
  double Q_nu_L = 0.0;
  double Q_mu_L = 0.0;
};

struct SinglePhotonBounds {
  double Y1_L = 0.0;
  double Q1_L = 0.0;
  bool collapsed = false;  // raw yield bound was <= 0
};

struct SinglePhotonError {
  double e1_U = 0.0;
  bool invalid = false;  // bound exceeded 1 or the yield bound vanished
};

struct DecoyReport {
  double distance = 0.0;
  double Y0 = 0.0;
  double alpha = 0.0;       // lower bound on the average power transfer
  double path_loss = 0.0;
  double eta_total = 0.0;
  double Q_mu_U = 0.0;
  double Q_mu_L = 0.0;
  double Q_nu_L = 0.0;
  double E_mu_U = 0.0;
  double Y1_L = 0.0;
  double Q1_L = 0.0;
  double e1_U = 0.0;
  double rate_lower = 0.0;
  std::string flag;         // empty when the bounds are meaningful
};

double eta_fraction(double loss, double alpha_power, double eta_bob);

DecoyGains gains_lower(double Y0, double alpha_power, double loss, double eta_bob, const DecoyParams& p);
double gain_upper_mu(double Y0, double loss, double eta_bob, const DecoyParams& p);
double qber_upper_mu(double Y0, double Q_mu_L, double loss, double eta_bob, const DecoyParams& p);
SinglePhotonBounds single_photon_bounds(double Q_nu_L, double Q_mu_U, double Y0, const DecoyParams& p);
SinglePhotonError single_photon_error_upper(double eta_total, double Y1_L, double Y0, const DecoyParams& p);
// Raw rate expression, no validity screening.
double decoy_rate_lower(double Q_mu_U, double E_mu_U, double Q1_L, double e1_U, const DecoyParams& p);
double ideal_bb84_rate(double eta_total, double Y0, const DecoyParams& p);

DecoyReport decoy_report(const LinkParams& link, const DecoyParams& p, double distance);
double ideal_bb84_report_rate(const LinkParams& link, const DecoyParams& p, double distance);

// Largest distance with a strictly positive rate.
double decoy_cutoff_distance(const LinkParams& link, const DecoyParams& p, double lo, double hi);
double ideal_bb84_cutoff_distance(const LinkParams& link, const DecoyParams& p, double lo, double hi);

}  // namespace uwqkd
