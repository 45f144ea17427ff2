#include "uwqkd/decoy.hpp"

#include <algorithm>
#include <cmath>

#include "uwqkd/errors.hpp"

namespace uwqkd {

void DecoyParams::validate() const {
  if (!(decoy_intensity > 0.0 && decoy_intensity < signal_intensity))
    throw DomainError("decoy intensities must satisfy 0 < decoy_intensity < signal_intensity");
  if (!(detector_error >= 0.0 && detector_error < 0.5)) throw DomainError("decoy.detector_error must be in [0, 0.5)");
  if (!(noise_error >= 0.0 && noise_error <= 1.0)) throw DomainError("decoy.noise_error must be in [0, 1]");
  if (!(sift_factor > 0.0 && sift_factor <= 1.0)) throw DomainError("decoy.sift_factor must be in (0, 1]");
  if (!(ec_efficiency > 0.0)) throw DomainError("decoy.ec_efficiency must be > 0");
}

double eta_fraction(double loss, double alpha_power, double eta_bob) { return loss * alpha_power * eta_bob; }

DecoyGains gains_lower(double Y0, double alpha_power, double loss, double eta_bob, const DecoyParams& p) {
  auto gain = [&](double x) { return Y0 - alpha_power * std::expm1(-x * eta_bob * loss); };
  return {gain(p.decoy_intensity), gain(p.signal_intensity)};
}

double gain_upper_mu(double Y0, double loss, double eta_bob, const DecoyParams& p) {
  return Y0 - std::expm1(-p.signal_intensity * eta_bob * loss);
}

double qber_upper_mu(double Y0, double Q_mu_L, double loss, double eta_bob, const DecoyParams& p) {
  if (!(Q_mu_L > 0.0)) throw ModelError("qber_upper_mu: signal gain bound must be > 0");
  const double clicks = -std::expm1(-p.signal_intensity * eta_bob * loss);
  return (p.noise_error * Y0 + p.detector_error * clicks) / Q_mu_L;
}

SinglePhotonBounds single_photon_bounds(double Q_nu_L, double Q_mu_U, double Y0, const DecoyParams& p) {
  const double mu = p.signal_intensity;
  const double nu = p.decoy_intensity;
  const double bracket = Q_nu_L * std::exp(nu) - Q_mu_U * std::exp(mu) * nu * nu / (mu * mu) -
                         (mu * mu - nu * nu) / (mu * mu) * Y0;
  SinglePhotonBounds r;
  const double y1 = mu / (mu * nu - nu * nu) * bracket;
  if (!(y1 > 0.0)) {
    r.collapsed = true;
    return r;
  }
  r.Y1_L = y1;
  r.Q1_L = mu * std::exp(-mu) * y1;
  return r;
}

SinglePhotonError single_photon_error_upper(double eta_total, double Y1_L, double Y0, const DecoyParams& p) {
  SinglePhotonError r;
  const double nu = p.decoy_intensity;
  if (!(Y1_L > 0.0)) {
    r.invalid = true;
    r.e1_U = 1.0;
    return r;
  }
  const double errs = p.noise_error * Y0 - p.detector_error * std::expm1(-nu * eta_total);
  const double e1 = (errs * std::exp(nu) - p.noise_error * Y0) / (Y1_L * nu);
  r.e1_U = std::clamp(e1, 0.0, 1.0);
  r.invalid = e1 > 1.0;
  return r;
}

double decoy_rate_lower(double Q_mu_U, double E_mu_U, double Q1_L, double e1_U, const DecoyParams& p) {
  const double cost = Q_mu_U * p.ec_efficiency * binary_entropy(std::clamp(E_mu_U, 0.0, 0.5));
  const double gain = Q1_L * (1.0 - binary_entropy(std::clamp(e1_U, 0.0, 1.0)));
  return p.sift_factor * (gain - cost);
}

double ideal_bb84_rate(double eta_total, double Y0, const DecoyParams& p) {
  const double e1 = (0.5 * Y0 + p.detector_error * eta_total) / (Y0 + eta_total);
  const double mu = p.signal_intensity;
  const double Q1 = (Y0 + eta_total) * mu * std::exp(-mu);
  return 0.5 * Q1 * (1.0 - binary_entropy(std::clamp(e1, 0.0, 1.0)) * (1.0 + p.ec_efficiency));
}

DecoyReport decoy_report(const LinkParams& link, const DecoyParams& p, double distance) {
  const ReceiverParams rx = link.effective_receiver();
  DecoyReport r;
  r.distance = distance;
  r.Y0 = decoy_noise_yield_Y0(link.environment, rx, link.geometry.wavelength);
  r.path_loss = path_loss(link.geometry, link.water, distance);
  r.alpha = power_transfer_mu(link.geometry, link.turbulence, distance, link.quad);
  const double eta_bob = rx.bob_transmittance;
  r.eta_total = eta_fraction(r.path_loss, r.alpha, eta_bob);

  const DecoyGains g = gains_lower(r.Y0, r.alpha, r.path_loss, eta_bob, p);
  r.Q_nu_L = g.Q_nu_L;
  r.Q_mu_L = g.Q_mu_L;
  r.Q_mu_U = gain_upper_mu(r.Y0, r.path_loss, eta_bob, p);
  r.E_mu_U = qber_upper_mu(r.Y0, r.Q_mu_L, r.path_loss, eta_bob, p);

  const SinglePhotonBounds s = single_photon_bounds(r.Q_nu_L, r.Q_mu_U, r.Y0, p);
  r.Y1_L = s.Y1_L;
  r.Q1_L = s.Q1_L;
  if (s.collapsed) {
    r.flag = "bound-collapsed";
    r.e1_U = 1.0;
    return r;
  }
  const SinglePhotonError e = single_photon_error_upper(r.eta_total, r.Y1_L, r.Y0, p);
  r.e1_U = e.e1_U;
  if (e.invalid || r.e1_U > 0.5) {
    r.flag = "error-bound-exceeded";
    return r;
  }
  r.rate_lower = decoy_rate_lower(r.Q_mu_U, r.E_mu_U, r.Q1_L, r.e1_U, p);
  return r;
}

double ideal_bb84_report_rate(const LinkParams& link, const DecoyParams& p, double distance) {
  const ReceiverParams rx = link.effective_receiver();
  const double Y0 = decoy_noise_yield_Y0(link.environment, rx, link.geometry.wavelength);
  const double loss = path_loss(link.geometry, link.water, distance);
  const double alpha = power_transfer_mu(link.geometry, link.turbulence, distance, link.quad);
  return ideal_bb84_rate(eta_fraction(loss, alpha, rx.bob_transmittance), Y0, p);
}

namespace {

double positive_rate_margin(double rate) { return rate > 0.0 ? -rate : 1.0; }

}  // namespace

double decoy_cutoff_distance(const LinkParams& link, const DecoyParams& p, double lo, double hi) {
  link.validate();
  p.validate();
  return largest_feasible([&](double L) { return positive_rate_margin(decoy_report(link, p, L).rate_lower); }, lo,
                          hi);
}

double ideal_bb84_cutoff_distance(const LinkParams& link, const DecoyParams& p, double lo, double hi) {
  link.validate();
  p.validate();
  return largest_feasible([&](double L) { return positive_rate_margin(ideal_bb84_report_rate(link, p, L)); }, lo,
                          hi);
}

}  // namespace uwqkd
