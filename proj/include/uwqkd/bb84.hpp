#pragma once

#include <functional>
#include <optional>

#include "uwqkd/channel.hpp"
#include "uwqkd/noise.hpp"
#include "uwqkd/numerics.hpp"

namespace uwqkd {

struct Bb84Params {
  double mean_photon_number = 1.0;
  double ldpc_rate = 0.5;
  double qber_threshold = 0.1071;
  double qber_security_limit = 0.11;

  void validate() const;

  bool operator==(const Bb84Params&) const = default;
};

// Everything a direct or relayed link evaluation needs.
struct LinkParams {
  WaterType water;
  std::optional<TurbulenceParams> turbulence;
  LinkGeometry geometry;
  ReceiverParams receiver;
  Environment environment;
  Bb84Params protocol;
  QuadratureSpec quad;

  void validate() const;
  // Receiver with its aperture tied to the link's receive diameter.
  ReceiverParams effective_receiver() const;

  bool operator==(const LinkParams&) const = default;
};

struct LinkReport {
  double distance = 0.0;
  double qber_upper = 0.0;
  double skr_lower = 0.0;
  double mu = 0.0;
  double mu0 = 0.0;
  double path_loss = 0.0;
  double noise = 0.0;
};

double qber_upper_bound(double n_N, double n_S, double mu, double loss, double eta);
double qber_nonturbulent(double n_N, double n_S, double mu0, double loss);
double reconciliation_efficiency(const Bb84Params& p);
double skr_lower_bound(double qber, const Bb84Params& p);

// QBER bound of the direct link at one distance (non-turbulent form without turbulence).
double direct_link_qber(const LinkParams& p, double distance);
LinkReport direct_link_report(const LinkParams& p, double distance);

enum class Criterion { QberLimit, PositiveSkr };

// Largest x in [lo, hi] with margin(x) <= 0, from a step-sized scan walked down
// from hi and refined by bisection. BracketError if margin(hi) <= 0,
// InfeasibleError if no grid node is feasible.
double largest_feasible(const std::function<double(double)>& margin, double lo, double hi, double step = 1.0,
                        double tol = 1e-3);

double achievable_distance(Criterion criterion, const LinkParams& p, double lo, double hi);

}  // namespace uwqkd
