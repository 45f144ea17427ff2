#include "uwqkd/commands.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "uwqkd/channel.hpp"
#include "uwqkd/errors.hpp"
#include "uwqkd/relay.hpp"

namespace uwqkd {

namespace {

// Evaluates fn(i) for i in [0, n) on up to `threads` workers. The first
// failure by index is rethrown, so errors are as deterministic as results.
template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void base_metadata(ResultTable& t, const std::string& command, const Scenario& s) {
  t.metadata["schema_version"] = kTableSchema;
  t.metadata["tool_version"] = kToolVersion;
  t.metadata["command"] = command;
  t.metadata["scenario"] = s.name;
  t.metadata["preset"] = s.preset;
  t.metadata["protocol"] = protocol_name(s.protocol);
  t.metadata["scenario_hash"] = scenario_hash(s);
  t.metadata["seed"] = s.seed;
}

Criterion criterion_of(const Scenario& s) {
  return s.search.criterion == "skr" ? Criterion::PositiveSkr : Criterion::QberLimit;
}

void require_distance_sweep(const Scenario& s, const std::string& command) {
  if (s.sweep.variable != "distance") {
    throw ConfigError(command + " needs sweep.variable = distance");
  }
}

struct SweepPoint {
  double qber = 0.0;
  double skr = 0.0;
  double mu = 0.0;
  double mu0 = 0.0;
  double loss = 0.0;
  double noise = 0.0;
};

SweepPoint evaluate_point(const LinkParams& p, double L) {
  SweepPoint pt;
  if (p.geometry.relay_count == 0) {
    const LinkReport r = direct_link_report(p, L);
    return {r.qber_upper, r.skr_lower, r.mu, r.mu0, r.path_loss, r.noise};
  }
  const RelayChain chain = make_relay_chain(p, L, p.geometry.relay_count);
  LinkGeometry g = p.geometry;
  g.length = L;
  pt.qber = relay_link_qber(p, L);
  pt.skr = relay_skr_lower(pt.qber, p.protocol);
  pt.mu = chain.per_hop_mu;
  pt.mu0 = power_transfer_mu(p.geometry, std::nullopt, chain.hop_length, p.quad);
  pt.loss = chain.per_hop_loss;
  pt.noise = relay_noise_upper(p.environment, p.effective_receiver(), p.water, g);
  return pt;
}

std::vector<SweepPoint> sweep_points(const Scenario& s) {
  const auto& grid = s.sweep.values;
  std::vector<SweepPoint> out(grid.size());
  parallel_for(grid.size(), s.threads, [&](std::size_t i) { out[i] = evaluate_point(s.link, grid[i]); });
  return out;
}

McConfig mc_config_at(const Scenario& s, double distance) {
  McConfig cfg = s.mc.config;
  cfg.detector.plane_z = distance;
  cfg.threads = s.threads;
  return cfg;
}

}  // namespace

std::vector<std::string> command_names() {
  return {"qber-sweep", "skr-sweep", "decoy-rate", "distance", "relay-scan", "mc-run", "gate-opt", "validate-wsf"};
}

std::string scenario_hash(const Scenario& s) {
  Scenario norm = s;
  norm.threads = 1;
  const std::string text = canonical_config(norm);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ResultTable qber_sweep(const Scenario& s) {
  require_distance_sweep(s, "qber-sweep");
  ResultTable t;
  t.schema = {{"distance", "m"}, {"qber_upper", "-"}, {"mu", "-"},     {"mu0", "-"},
              {"path_loss", "-"}, {"noise", "photons"}, {"relay_count", "-"}};
  const auto pts = sweep_points(s);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    t.add_row({s.sweep.values[i], p.qber, p.mu, p.mu0, p.loss, p.noise, static_cast<long>(s.link.geometry.relay_count)});
  }
  base_metadata(t, "qber-sweep", s);
  return t;
}

ResultTable skr_sweep(const Scenario& s) {
  require_distance_sweep(s, "skr-sweep");
  ResultTable t;
  t.schema = {{"distance", "m"}, {"qber_upper", "-"}, {"skr_lower", "bits/pulse"}, {"relay_count", "-"}};
  const auto pts = sweep_points(s);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t.add_row({s.sweep.values[i], pts[i].qber, pts[i].skr, static_cast<long>(s.link.geometry.relay_count)});
  }
  base_metadata(t, "skr-sweep", s);
  t.metadata["reconciliation_efficiency"] = reconciliation_efficiency(s.link.protocol);
  return t;
}

ResultTable decoy_rate(const Scenario& s) {
  require_distance_sweep(s, "decoy-rate");
  ResultTable t;
  t.schema = {{"distance", "m"}, {"Y0", "-"},       {"alpha", "-"},     {"path_loss", "-"},
              {"eta_total", "-"}, {"Q_mu_U", "-"},  {"Q_mu_L", "-"},    {"Q_nu_L", "-"},
              {"E_mu_U", "-"},    {"Y1_L", "-"},    {"Q1_L", "-"},      {"e1_U", "-"},
              {"rate_lower", "bits/pulse"}, {"ideal_bb84_rate", "bits/pulse"}, {"flag", "-"}};
  const auto& grid = s.sweep.values;
  std::vector<DecoyReport> reports(grid.size());
  std::vector<double> ideal(grid.size());
  parallel_for(grid.size(), s.threads, [&](std::size_t i) {
    reports[i] = decoy_report(s.link, s.decoy, grid[i]);
    ideal[i] = ideal_bb84_report_rate(s.link, s.decoy, grid[i]);
  });
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& r = reports[i];
    t.add_row({r.distance, r.Y0, r.alpha, r.path_loss, r.eta_total, r.Q_mu_U, r.Q_mu_L, r.Q_nu_L, r.E_mu_U, r.Y1_L,
               r.Q1_L, r.e1_U, r.rate_lower, ideal[i], r.flag});
  }
  base_metadata(t, "decoy-rate", s);
  return t;
}

ResultTable distance_table(const Scenario& s) {
  ResultTable t;
  t.schema = {{"criterion", "-"}, {"relay_count", "-"}, {"distance", "m"}};
  const double lo = s.search.lo, hi = s.search.hi;
  const long K = s.link.geometry.relay_count;
  switch (s.protocol) {
    case Protocol::MonteCarlo:
      throw ConfigError("distance is not defined for montecarlo scenarios");
    case Protocol::Decoy:
      t.add_row({std::string("decoy-positive-rate"), K, decoy_cutoff_distance(s.link, s.decoy, lo, hi)});
      t.add_row({std::string("ideal-bb84-positive-rate"), K, ideal_bb84_cutoff_distance(s.link, s.decoy, lo, hi)});
      break;
    case Protocol::Bb84:
    case Protocol::Relay: {
      std::vector<std::pair<std::string, Criterion>> wanted;
      if (s.search.criterion != "skr") wanted.emplace_back("qber-limit", Criterion::QberLimit);
      if (s.search.criterion != "qber") wanted.emplace_back("positive-skr", Criterion::PositiveSkr);
      for (const auto& [label, c] : wanted) {
        const double d = K == 0 ? achievable_distance(c, s.link, lo, hi)
                                : relay_achievable_distance(static_cast<int>(K), c, s.link, lo, hi);
        t.add_row({label, K, d});
      }
      break;
    }
  }
  base_metadata(t, "distance", s);
  return t;
}

ResultTable relay_scan(const Scenario& s) {
  require_distance_sweep(s, "relay-scan");
  const Criterion c = criterion_of(s);
  const RelayOptimum best = optimal_relay_count(s.link, s.search.max_relays, c, s.search.lo, s.search.hi);
  const auto& grid = s.sweep.values;
  const int nK = s.search.max_relays + 1;
  std::vector<double> qber(grid.size() * nK);
  parallel_for(qber.size(), s.threads, [&](std::size_t i) {
    LinkParams q = s.link;
    q.geometry.relay_count = static_cast<int>(i / grid.size());
    qber[i] = relay_link_qber(q, grid[i % grid.size()]);
  });
  ResultTable t;
  t.schema = {{"relay_count", "-"},         {"distance", "m"}, {"qber_upper", "-"}, {"skr_lower", "bits/pulse"},
              {"achievable_distance", "m"}, {"optimal", "-"}};
  for (int K = 0; K < nK; ++K) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double v = qber[K * grid.size() + j];
      t.add_row({static_cast<long>(K), grid[j], v, relay_skr_lower(v, s.link.protocol), best.distances[K],
                 static_cast<long>(K == best.relay_count ? 1 : 0)});
    }
  }
  base_metadata(t, "relay-scan", s);
  t.metadata["criterion"] = c == Criterion::QberLimit ? "qber-limit" : "positive-skr";
  t.metadata["optimal_relay_count"] = best.relay_count;
  t.metadata["optimal_distance_m"] = best.distance;
  return t;
}

ResultTable mc_run(const Scenario& s) {
  const McConfig cfg = mc_config_at(s, s.mc.distance);
  const McResult r = run_simulation(s.mc.photons, cfg, s.seed);
  const bool toa = s.mc.histogram == "toa";
  const Histogram& h = toa ? r.toa_histogram : r.aoa_histogram;
  ResultTable t;
  const std::string unit = toa ? "s" : "rad";
  t.schema = {{"bin_low", unit}, {"bin_high", unit}, {"count", "-"}, {"weight", "-"}};
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    t.add_row({h.edges[i], h.edges[i + 1], h.counts[i], h.weights[i]});
  }
  base_metadata(t, "mc-run", s);
  t.metadata["histogram"] = s.mc.histogram;
  t.metadata["distance_m"] = s.mc.distance;
  t.metadata["partitions"] = cfg.partitions;
  t.metadata["launched"] = r.launched;
  t.metadata["received"] = r.received;
  t.metadata["absorbed"] = r.absorbed;
  t.metadata["missed"] = r.missed;
  t.metadata["truncated"] = r.truncated;
  t.metadata["gamma"] = r.gamma();
  t.metadata["gamma_stderr"] = r.gamma_stderr();
  t.metadata["max_toa_s"] = r.max_toa;
  return t;
}

ResultTable gate_opt(const Scenario& s) {
  ResultTable t;
  t.schema = {{"distance", "m"}, {"gate", "s"},   {"gamma", "-"},
              {"noise", "photons"}, {"qber", "-"}, {"optimal", "-"}};
  auto summary = nlohmann::ordered_json::array();
  for (double L : s.mc.gate_distances) {
    const McConfig cfg = mc_config_at(s, L);
    const GateOptimum opt = optimize_gate_time(cfg, s.mc.noise, s.mc.gate_grid, s.mc.photons, s.seed);
    for (const auto& p : opt.curve) {
      t.add_row({L, p.gate, p.gamma, p.noise, p.qber, static_cast<long>(p.gate == opt.gate ? 1 : 0)});
    }
    summary.push_back({{"distance_m", L},
                       {"optimal_gate_s", opt.gate},
                       {"qber", opt.qber},
                       {"unimodal", is_unimodal(opt.curve)},
                       {"max_toa_s", opt.simulation.max_toa}});
  }
  base_metadata(t, "gate-opt", s);
  t.metadata["partitions"] = s.mc.config.partitions;
  t.metadata["optima"] = summary;
  return t;
}

ResultTable validate_wsf(const Scenario& s) {
  std::vector<double> rhos = s.sweep.values;
  if (s.sweep.variable != "rho") {
    rhos.clear();
    for (int i = 0; i <= 12; ++i) rhos.push_back(1e-3 * std::pow(100.0, i / 12.0));
  }
  const double d_r = s.link.turbulence ? s.link.turbulence->d_r : 1.0;
  const std::vector<std::string> regimes{"weak", "moderate", "strong"};
  const double L = s.link.geometry.length;
  const double lambda = s.link.geometry.wavelength;
  std::vector<double> closed(regimes.size() * rhos.size()), numeric(closed.size());
  parallel_for(closed.size(), s.threads, [&](std::size_t i) {
    const TurbulenceParams tp = TurbulenceParams::named(regimes[i / rhos.size()], d_r);
    const double rho = rhos[i % rhos.size()];
    closed[i] = wave_structure_closed(rho, L, tp, lambda);
    numeric[i] = wave_structure_numeric(rho, L, tp, lambda, s.link.quad);
  });
  ResultTable t;
  t.schema = {{"regime", "-"}, {"rho", "m"}, {"closed", "-"}, {"numeric", "-"}, {"rel_error", "-"}};
  for (std::size_t i = 0; i < closed.size(); ++i) {
    t.add_row({regimes[i / rhos.size()], rhos[i % rhos.size()], closed[i], numeric[i],
               std::fabs(closed[i] - numeric[i]) / std::fabs(numeric[i])});
  }
  base_metadata(t, "validate-wsf", s);
  t.metadata["distance_m"] = L;
  t.metadata["d_r"] = d_r;
  return t;
}

ResultTable run_command(const std::string& command, const Scenario& s) {
  if (command == "qber-sweep") return qber_sweep(s);
  if (command == "skr-sweep") return skr_sweep(s);
  if (command == "decoy-rate") return decoy_rate(s);
  if (command == "distance") return distance_table(s);
  if (command == "relay-scan") return relay_scan(s);
  if (command == "mc-run") return mc_run(s);
  if (command == "gate-opt") return gate_opt(s);
  if (command == "validate-wsf") return validate_wsf(s);
  throw ConfigError("unknown subcommand '" + command + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
  if (dynamic_cast<const ConvergenceError*>(&e)) return 3;
  if (dynamic_cast<const BracketError*>(&e)) return 4;
  return 1;
}

}  // namespace uwqkd
