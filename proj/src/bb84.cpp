#include "uwqkd/bb84.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "uwqkd/errors.hpp"

namespace uwqkd {

void Bb84Params::validate() const {
  if (!(mean_photon_number > 0.0)) throw DomainError("bb84.mean_photon_number must be > 0");
  if (!(ldpc_rate > 0.0 && ldpc_rate < 1.0)) throw DomainError("bb84.ldpc_rate must be in (0, 1)");
  if (!(qber_threshold > 0.0 && qber_threshold < 0.5)) throw DomainError("bb84.qber_threshold must be in (0, 0.5)");
  if (!(qber_security_limit > 0.0 && qber_security_limit <= 0.5))
    throw DomainError("bb84.qber_security_limit must be in (0, 0.5]");
}

void LinkParams::validate() const {
  water.validate();
  if (turbulence) turbulence->validate();
  geometry.validate();
  effective_receiver().validate();
  environment.validate();
  protocol.validate();
  quad.validate();
}

ReceiverParams LinkParams::effective_receiver() const {
  ReceiverParams rx = receiver;
  rx.aperture_diameter = geometry.rx_diameter;
  return rx;
}

double qber_upper_bound(double n_N, double n_S, double mu, double loss, double eta) {
  const double survive = std::exp(-eta * n_S * loss);
  const double noise_term = n_N * (1.0 - mu + mu * survive);
  const double signal_term = 0.5 * n_S * loss * mu * survive;
  const double den = signal_term + 2.0 * noise_term;
  if (!(den > 0.0)) throw ModelError("qber_upper_bound: indeterminate (no signal and no noise)");
  return std::min(0.5, noise_term / den);
}

double qber_nonturbulent(double n_N, double n_S, double mu0, double loss) {
  const double den = n_S * mu0 * loss + 4.0 * n_N;
  if (!(den > 0.0)) throw ModelError("qber_nonturbulent: indeterminate (no signal and no noise)");
  return std::min(0.5, 2.0 * n_N / den);
}

double reconciliation_efficiency(const Bb84Params& p) {
  return (1.0 - p.ldpc_rate) / binary_entropy(p.qber_threshold);
}

double skr_lower_bound(double qber, const Bb84Params& p) {
  const double capped = std::clamp(qber, 0.0, 0.5);
  return 1.0 - (1.0 + reconciliation_efficiency(p)) * binary_entropy(capped);
}

double direct_link_qber(const LinkParams& p, double distance) {
  const ReceiverParams rx = p.effective_receiver();
  const double n_N = noise_per_detector(p.environment, rx, p.geometry.wavelength);
  const double loss = path_loss(p.geometry, p.water, distance);
  const double n_S = p.protocol.mean_photon_number;
  if (!p.turbulence) {
    const double mu0 = power_transfer_mu(p.geometry, std::nullopt, distance, p.quad);
    return qber_nonturbulent(n_N, n_S, mu0, loss);
  }
  const double mu = power_transfer_mu(p.geometry, p.turbulence, distance, p.quad);
  return qber_upper_bound(n_N, n_S, mu, loss, rx.quantum_efficiency);
}

LinkReport direct_link_report(const LinkParams& p, double distance) {
  const ReceiverParams rx = p.effective_receiver();
  LinkReport r;
  r.distance = distance;
  r.noise = noise_per_detector(p.environment, rx, p.geometry.wavelength);
  r.path_loss = path_loss(p.geometry, p.water, distance);
  r.mu0 = power_transfer_mu(p.geometry, std::nullopt, distance, p.quad);
  r.mu = p.turbulence ? power_transfer_mu(p.geometry, p.turbulence, distance, p.quad) : r.mu0;
  const double n_S = p.protocol.mean_photon_number;
  r.qber_upper = p.turbulence ? qber_upper_bound(r.noise, n_S, r.mu, r.path_loss, rx.quantum_efficiency)
                              : qber_nonturbulent(r.noise, n_S, r.mu0, r.path_loss);
  r.skr_lower = skr_lower_bound(r.qber_upper, p.protocol);
  return r;
}

double largest_feasible(const std::function<double(double)>& margin, double lo, double hi, double step,
                        double tol) {
  if (!(lo < hi)) throw DomainError("search range must satisfy lo < hi");
  if (!(step > 0.0 && tol > 0.0)) throw DomainError("search step and tolerance must be > 0");
  if (!(margin(hi) > 0.0)) throw BracketError("criterion still holds at the upper end of the search range");

  std::vector<double> grid;
  for (double x = lo; x < hi; x = lo + step * static_cast<double>(grid.size())) grid.push_back(x);
  grid.push_back(hi);

  // Walk down from hi: the first feasible node is the last feasible one.
  std::size_t last = grid.size();
  for (std::size_t i = grid.size() - 1; i-- > 0;) {
    if (margin(grid[i]) <= 0.0) {
      last = i;
      break;
    }
  }
  if (last == grid.size()) throw InfeasibleError("criterion does not hold anywhere in the search range");

  double good = grid[last];
  double bad = grid[last + 1];
  while (bad - good > tol) {
    const double mid = 0.5 * (good + bad);
    (margin(mid) <= 0.0 ? good : bad) = mid;
  }
  return good;
}

double achievable_distance(Criterion criterion, const LinkParams& p, double lo, double hi) {
  p.validate();
  const double limit = p.protocol.qber_security_limit;
  auto margin = [&](double L) {
    const double q = direct_link_qber(p, L);
    return criterion == Criterion::QberLimit ? q - limit : -skr_lower_bound(q, p.protocol);
  };
  return largest_feasible(margin, lo, hi);
}

}  // namespace uwqkd
