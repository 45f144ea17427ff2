#include "uwqkd/relay.hpp"

#include <algorithm>
#include <cmath>

#include "uwqkd/errors.hpp"

namespace uwqkd {

namespace {

// x + x^2 + ... + x^K
double geometric_tail(double x, int K) {
  if (K == 0) return 0.0;
  if (std::fabs(1.0 - x) < 1e-6) {
    double sum = 0.0, term = 1.0;
    for (int i = 1; i <= K; ++i) sum += (term *= x);
    return sum;
  }
  return (1.0 - std::pow(x, K + 1)) / (1.0 - x) - 1.0;
}

}  // namespace

RelayChain make_relay_chain(const LinkParams& p, double total_length, int relay_count) {
  if (!(total_length > 0.0)) throw DomainError("relay chain: total length must be > 0");
  if (relay_count < 0) throw DomainError("relay chain: negative relay count");
  RelayChain c;
  c.total_length = total_length;
  c.relay_count = relay_count;
  c.hop_length = total_length / (relay_count + 1);
  c.per_hop_loss = path_loss(p.geometry, p.water, c.hop_length);
  c.per_hop_mu = power_transfer_mu(p.geometry, p.turbulence, c.hop_length, p.quad);
  return c;
}

RelayCoefficients relay_coefficients(const RelayChain& chain, double n_S, double n_B0, double n_D, double eta) {
  const int K = chain.relay_count;
  const double h = chain.per_hop_loss;
  const double mh = chain.per_hop_mu * h;
  RelayCoefficients r;
  const double plain = n_S * std::pow(h, K + 1) + 2.0 * n_B0 * geometric_tail(h, K);
  const double faded = n_S * std::pow(mh, K + 1) + 2.0 * n_B0 * geometric_tail(mh, K);
  r.a = eta * plain;
  r.b = eta * (2.0 * n_B0 + 4.0 * n_D);
  r.c = plain > 0.0 ? faded / plain : 1.0;
  return r;
}

namespace {

double relay_numerator(const RelayChain& chain, double noise_upper, double eta, double n_S) {
  const int K = chain.relay_count;
  const double muk = std::pow(chain.per_hop_mu, K + 1);
  const double hk = std::pow(chain.per_hop_loss, K + 1);
  return eta * noise_upper * std::exp(-4.0 * eta * noise_upper) * (1.0 - muk + std::exp(-eta * n_S * hk) * muk);
}

}  // namespace

double relay_qber_upper(const RelayChain& chain, const RelayCoefficients& coef, double noise_upper, double eta,
                        double n_S) {
  const double num = 2.0 * relay_numerator(chain, noise_upper, eta, n_S);
  const double ab = coef.a + coef.b;
  const double den = coef.b * std::exp(-coef.b) * (1.0 - coef.c) + ab * std::exp(-ab) * coef.c;
  if (!(den > 0.0)) throw ModelError("relay_qber_upper: indeterminate (zero denominator)");
  return std::min(0.5, num / den);
}

double relay_qber_upper_halved(const RelayChain& chain, const RelayCoefficients& coef, double noise_upper,
                               double eta, double n_S) {
  const double num = relay_numerator(chain, noise_upper, eta, n_S);
  const double ab = coef.a + coef.b;
  const double den = 0.5 * coef.b * std::exp(-coef.b) * (1.0 - coef.c) + 0.5 * ab * std::exp(-ab) * coef.c;
  if (!(den > 0.0)) throw ModelError("relay_qber_upper: indeterminate (zero denominator)");
  return std::min(0.5, num / den);
}

double relay_skr_lower(double qber_bound, const Bb84Params& ldpc) { return skr_lower_bound(qber_bound, ldpc); }

double relay_link_qber(const LinkParams& p, double total_length) {
  const ReceiverParams rx = p.effective_receiver();
  const int K = p.geometry.relay_count;
  const RelayChain chain = make_relay_chain(p, total_length, K);
  const double n_B0 = background_photons_per_polarization(p.environment, rx, p.geometry.wavelength);
  const double n_D = dark_counts(rx);
  const double eta = rx.quantum_efficiency;
  const double n_S = p.protocol.mean_photon_number;
  LinkGeometry g = p.geometry;
  g.length = total_length;
  const double noise = relay_noise_upper(p.environment, rx, p.water, g);
  return relay_qber_upper(chain, relay_coefficients(chain, n_S, n_B0, n_D, eta), noise, eta, n_S);
}

double relay_achievable_distance(int relay_count, Criterion criterion, const LinkParams& p, double lo, double hi) {
  LinkParams q = p;
  q.geometry.relay_count = relay_count;
  q.validate();
  const double limit = q.protocol.qber_security_limit;
  auto margin = [&](double L) {
    const double v = relay_link_qber(q, L);
    return criterion == Criterion::QberLimit ? v - limit : -relay_skr_lower(v, q.protocol);
  };
  return largest_feasible(margin, lo, hi);
}

RelayOptimum optimal_relay_count(const LinkParams& p, int max_relays, Criterion criterion, double lo, double hi) {
  if (max_relays < 0) throw DomainError("optimal_relay_count: max relays must be >= 0");
  RelayOptimum best;
  best.distances.assign(max_relays + 1, 0.0);
  for (int K = 0; K <= max_relays; ++K) {
    try {
      best.distances[K] = relay_achievable_distance(K, criterion, p, lo, hi);
    } catch (const InfeasibleError&) {
      best.distances[K] = 0.0;
    }
  }
  for (int K = 0; K <= max_relays; ++K) {
    if (best.distances[K] > best.distance) {
      best.distance = best.distances[K];
      best.relay_count = K;
    }
  }
  return best;
}

}  // namespace uwqkd
