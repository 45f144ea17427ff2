#pragma once

#include <vector>

#include "uwqkd/bb84.hpp"

namespace uwqkd {

struct RelayChain {
  double total_length = 0.0;
  int relay_count = 0;
  double hop_length = 0.0;
  double per_hop_mu = 1.0;
  double per_hop_loss = 1.0;
};

struct RelayCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

// Hop decomposition of a link of the given length with the given relay count.
RelayChain make_relay_chain(const LinkParams& p, double total_length, int relay_count);

RelayCoefficients relay_coefficients(const RelayChain& chain, double n_S, double n_B0, double n_D, double eta);

double relay_qber_upper(const RelayChain& chain, const RelayCoefficients& coef, double noise_upper, double eta,
                        double n_S);
// Same bound written with the factor two moved inside, as used in the key-rate expression.
double relay_qber_upper_halved(const RelayChain& chain, const RelayCoefficients& coef, double noise_upper,
                               double eta, double n_S);

double relay_skr_lower(double qber_bound, const Bb84Params& ldpc);

// End-to-end QBER bound; relay count taken from p.geometry.relay_count.
double relay_link_qber(const LinkParams& p, double total_length);

double relay_achievable_distance(int relay_count, Criterion criterion, const LinkParams& p, double lo, double hi);

struct RelayOptimum {
  int relay_count = 0;
  double distance = 0.0;
  std::vector<double> distances;  // indexed by relay count, 0 when the criterion never holds
};

RelayOptimum optimal_relay_count(const LinkParams& p, int max_relays, Criterion criterion, double lo, double hi);

}  // namespace uwqkd
