// Property suites, one block per module. Randomized draws use fixed seeds.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "uwqkd/bb84.hpp"
#include "uwqkd/channel.hpp"
#include "uwqkd/commands.hpp"
#include "uwqkd/config.hpp"
#include "uwqkd/decoy.hpp"
#include "uwqkd/errors.hpp"
#include "uwqkd/montecarlo.hpp"
#include "uwqkd/noise.hpp"
#include "uwqkd/relay.hpp"

using namespace uwqkd;

namespace {

Scenario load(const std::string& name) { return parse_config_text(preset_text(name), "preset:" + name); }

double rel_diff(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(a), std::fabs(b)); }

// log-uniform draw on [lo, hi]
double log_uniform(RandomStream& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

}  // namespace

TEST_SUITE("invariants") {

// numerics

TEST_CASE("quadrature is additive under interval bisection") {
  RandomStream rng(101, 0);
  const QuadratureSpec spec{1e-13, 1e-11, 2000};
  for (int trial = 0; trial < 200; ++trial) {
    const double a = rng.uniform(-3.0, 3.0);
    const double b = a + rng.uniform(0.1, 6.0);
    const double m = rng.uniform(a + 1e-3, b - 1e-3);
    const double w = rng.uniform(0.5, 8.0), c = rng.uniform(-1.0, 1.0);
    auto f = [&](double x) { return std::sin(w * x) * std::exp(c * x) + x * x; };
    const double whole = integrate(f, a, b, spec);
    const double split = integrate(f, a, m, spec) + integrate(f, m, b, spec);
    CHECK(std::fabs(whole - split) <= 1e-10 * std::max(1.0, std::fabs(whole)));
  }
}

TEST_CASE("Bessel three-term recurrence on (0, 40]") {
  RandomStream rng(102, 0);
  for (int i = 0; i < 2000; ++i) {
    const double x = 40.0 * rng.uniform_open_low();
    const double lhs = bessel_j0(x) + bessel_jn(2, x);
    CHECK(std::fabs(lhs - 2.0 * bessel_j1(x) / x) <= 1e-8);
  }
  CHECK(std::fabs(bessel_j0(40.0) + bessel_jn(2, 40.0) - bessel_j1(40.0) / 20.0) <= 1e-8);
}

TEST_CASE("binary entropy is midpoint concave") {
  RandomStream rng(103, 0);
  for (int i = 0; i < 5000; ++i) {
    const double p = rng.uniform(), q = rng.uniform();
    CHECK(binary_entropy(0.5 * (p + q)) >= 0.5 * (binary_entropy(p) + binary_entropy(q)) - 1e-15);
  }
}

TEST_CASE("random streams are keyed by seed and stream id") {
  RandomStream a(42, 7), b(42, 7), c(42, 8);
  bool identical = true, all_equal_c = true;
  for (int i = 0; i < 1024; ++i) {
    const auto x = a.next_u64();
    identical = identical && x == b.next_u64();
    all_equal_c = all_equal_c && x == c.next_u64();
  }
  CHECK(identical);
  CHECK_FALSE(all_equal_c);
}

// channel

TEST_CASE("closed-form wave structure function tracks the numeric integral") {
  const double lambda = 530e-9, L = 100.0;
  std::vector<double> rhos;
  for (int i = 0; i <= 12; ++i) rhos.push_back(1e-3 * std::pow(100.0, i / 12.0));
  const double d_r = load("thesis-ch2-fig2").link.turbulence->d_r;
  for (const std::string regime : {"weak", "moderate", "strong"}) {
    CAPTURE(regime);
    const TurbulenceParams t = TurbulenceParams::named(regime, d_r);
    double previous = INFINITY;
    for (double rho : rhos) {
      CAPTURE(rho);
      const double numeric = wave_structure_numeric(rho, L, t, lambda);
      const double err = std::fabs(wave_structure_closed(rho, L, t, lambda) - numeric) / numeric;
      CHECK(err <= 0.10);
      CHECK(err <= previous);
      previous = err;
    }
  }
}

TEST_CASE("path loss multiplies across equal hops") {
  RandomStream rng(104, 0);
  for (int i = 0; i < 500; ++i) {
    LinkGeometry g;
    g.rx_diameter = rng.uniform(0.02, 0.3);
    g.divergence = rng.uniform(0.01, 0.5);
    WaterType w{"custom", rng.uniform(0.05, 2.5), rng.uniform(0.05, 0.5)};
    const double L = rng.uniform(1.0, 200.0);
    const int K = static_cast<int>(rng.next_u64() % 11);
    const double hopwise = std::pow(path_loss(g, w, L / (K + 1)), K + 1);
    const double rearranged =
        std::exp(-w.extinction * std::pow(L, 1.0 - w.correction_T) *
                 std::pow((K + 1) * g.rx_diameter / g.divergence, w.correction_T));
    CHECK(rel_diff(hopwise, rearranged) <= 1e-12);
  }
}

TEST_CASE("power transfer is a probability and falls with hop length") {
  for (double d : {0.05, 0.10, 0.30}) {
    LinkGeometry g;
    g.tx_diameter = g.rx_diameter = d;
    for (const std::string regime : {"none", "weak", "strong"}) {
      CAPTURE(d);
      CAPTURE(regime);
      std::optional<TurbulenceParams> t;
      if (regime != "none") t = TurbulenceParams::named(regime);
      double previous = 1.0;
      for (double l = 1.0; l <= 200.0; l += 7.0) {
        const double mu = power_transfer_mu(g, t, l);
        CHECK(mu >= 0.0);
        CHECK(mu <= 1.0);
        CHECK(mu <= previous + 1e-9);
        previous = mu;
      }
    }
  }
}

TEST_CASE("wave structure function is nonnegative, zero at the origin and increasing") {
  RandomStream rng(105, 0);
  for (const std::string regime : {"weak", "moderate", "strong"}) {
    const TurbulenceParams t = TurbulenceParams::named(regime, 1.0);
    CHECK(wave_structure_closed(0.0, 50.0, t, 530e-9) == 0.0);
    for (int i = 0; i < 300; ++i) {
      const double r1 = log_uniform(rng, 1e-6, 1.0), r2 = r1 * (1.0 + rng.uniform(1e-6, 2.0));
      const double L = rng.uniform(1.0, 200.0);
      const double w1 = wave_structure_closed(r1, L, t, 530e-9);
      CHECK(w1 >= 0.0);
      CHECK(wave_structure_closed(r2, L, t, 530e-9) > w1);
    }
  }
}

// noise

TEST_CASE("accumulated relay background matches the term-by-term sum") {
  RandomStream rng(106, 0);
  for (int i = 0; i < 300; ++i) {
    const double n_B0 = log_uniform(rng, 1e-12, 1.0), gamma = rng.uniform();
    for (int K = 0; K <= 20; ++K) {
      double brute = 0.0;
      for (int j = 0; j <= K; ++j) brute += n_B0 * std::pow(gamma, j);
      CHECK(rel_diff(relay_accumulated_background(n_B0, gamma, K), brute) <= 1e-13);
    }
  }
  CHECK(relay_accumulated_background(0.25, 1.0, 20) == 21 * 0.25);
}

TEST_CASE("relay noise bound without relays is the direct-link noise") {
  RandomStream rng(107, 0);
  for (int i = 0; i < 200; ++i) {
    Environment env;
    env.surface_irradiance = log_uniform(rng, 1e-4, 1e3);
    env.depth = rng.uniform(0.0, 200.0);
    ReceiverParams rx;
    rx.fov = rng.uniform(0.01, constants::pi);
    rx.aperture_diameter = rng.uniform(0.05, 0.3);
    LinkGeometry g;
    g.rx_diameter = rx.aperture_diameter;
    g.length = rng.uniform(1.0, 200.0);
    const WaterType w = WaterType::coastal(0.16);
    CHECK(relay_noise_upper(env, rx, w, g) == noise_per_detector(env, rx, g.wavelength));
  }
}

TEST_CASE("noise counts are nonnegative and linear in surface irradiance") {
  RandomStream rng(108, 0);
  for (int i = 0; i < 200; ++i) {
    Environment env;
    env.surface_irradiance = log_uniform(rng, 1e-6, 1e3);
    env.diffuse_attenuation = rng.uniform(0.0, 0.3);
    env.depth = rng.uniform(0.0, 150.0);
    ReceiverParams rx;
    rx.fov = rng.uniform(0.01, constants::pi);
    Environment scaled = env;
    const double k = rng.uniform(0.1, 10.0);
    scaled.surface_irradiance *= k;
    const double base = background_photons_per_polarization(env, rx, 532e-9);
    CHECK(base >= 0.0);
    CHECK(dark_counts(rx) >= 0.0);
    CHECK(noise_per_detector(env, rx, 532e-9) >= 0.0);
    CHECK(decoy_noise_yield_Y0(env, rx, 532e-9) >= 0.0);
    CHECK(rel_diff(background_photons_per_polarization(scaled, rx, 532e-9), k * base) <= 1e-14);
  }
  Environment dark;
  dark.surface_irradiance = 0.0;
  CHECK(background_photons_per_polarization(dark, ReceiverParams{}, 532e-9) == 0.0);
}

// bb84

TEST_CASE("QBER bound is monotone in signal, loss and noise") {
  RandomStream rng(109, 0);
  for (int i = 0; i < 4000; ++i) {
    const double n_N = log_uniform(rng, 1e-9, 1e-2), n_S = log_uniform(rng, 0.01, 10.0);
    const double mu = rng.uniform(), l = log_uniform(rng, 1e-8, 1.0), eta = rng.uniform(0.05, 1.0);
    const double up = 1.0 + rng.uniform(1e-3, 1.0);
    // past eta*n_S*l = 1 the detected-signal term x*exp(-eta*x) turns over
    if (eta * n_S * l * up > 1.0) continue;
    const double q = qber_upper_bound(n_N, n_S, mu, l, eta);
    CHECK(qber_upper_bound(n_N, n_S * up, mu, l, eta) <= q * (1.0 + 1e-12));
    CHECK(qber_upper_bound(n_N, n_S, mu, std::min(1.0, l * up), eta) <= q * (1.0 + 1e-12));
    CHECK(qber_upper_bound(n_N * up, n_S, mu, l, eta) >= q * (1.0 - 1e-12));
  }
}

TEST_CASE("SKR bound decreases strictly with QBER") {
  const Bb84Params p;
  double previous = skr_lower_bound(1e-6, p);
  for (int i = 1; i < 5000; ++i) {
    const double q = 1e-6 + (0.5 - 2e-6) * i / 4999.0;
    const double r = skr_lower_bound(q, p);
    CHECK(r < previous);
    previous = r;
  }
}

TEST_CASE("SKR distance never exceeds the QBER distance") {
  const Scenario base = load("thesis-ch2-fig2");
  for (const char* water : {"clear_ocean", "coastal", "turbid_harbor"}) {
    for (const std::string regime : {"none", "strong"}) {
      CAPTURE(water);
      CAPTURE(regime);
      LinkParams p = base.link;
      p.water = WaterType::named(water, p.water.correction_T);
      if (regime == "none") p.turbulence.reset();
      const double q = achievable_distance(Criterion::QberLimit, p, 1.0, 300.0);
      const double s = achievable_distance(Criterion::PositiveSkr, p, 1.0, 300.0);
      CHECK(s <= q);
    }
  }
}

TEST_CASE("achievable distance is deterministic and independent of the scan grid") {
  const Scenario base = load("thesis-ch2-fig2");
  for (const char* water : {"clear_ocean", "coastal"}) {
    CAPTURE(water);
    LinkParams p = base.link;
    p.water = WaterType::named(water, p.water.correction_T);
    const double limit = p.protocol.qber_security_limit;
    auto margin = [&](double L) { return direct_link_qber(p, L) - limit; };
    const double coarse = largest_feasible(margin, 1.0, 300.0, 1.0);
    const double fine = largest_feasible(margin, 1.0, 300.0, 0.37);
    CHECK(std::fabs(coarse - fine) <= 0.1);
    CHECK(achievable_distance(Criterion::QberLimit, p, 1.0, 300.0) ==
          achievable_distance(Criterion::QberLimit, p, 1.0, 300.0));
  }
}

// relay

TEST_CASE("relay bound without relays equals the direct-link bound") {
  RandomStream rng(110, 0);
  for (int i = 0; i < 1000; ++i) {
    RelayChain chain;
    chain.relay_count = 0;
    chain.per_hop_loss = log_uniform(rng, 1e-6, 1.0);
    chain.per_hop_mu = rng.uniform(0.01, 1.0);
    const double n_B0 = log_uniform(rng, 1e-10, 1e-3), n_D = log_uniform(rng, 1e-8, 1e-5);
    const double n_S = rng.uniform(0.1, 5.0), eta = rng.uniform(0.1, 1.0);
    const double n_N = n_B0 / 2.0 + n_D;
    const RelayCoefficients c = relay_coefficients(chain, n_S, n_B0, n_D, eta);
    const double relay = relay_qber_upper(chain, c, n_N, eta, n_S);
    const double direct = qber_upper_bound(n_N, n_S, chain.per_hop_mu, chain.per_hop_loss, eta);
    CHECK(rel_diff(relay, direct) <= 1e-12);
  }
}

TEST_CASE("doubling the hop count squares the end-to-end transfer") {
  RandomStream rng(111, 0);
  for (int i = 0; i < 300; ++i) {
    RelayChain one;
    one.per_hop_loss = rng.uniform(0.05, 0.99);
    one.per_hop_mu = rng.uniform(0.05, 1.0);
    one.relay_count = static_cast<int>(rng.next_u64() % 6);
    RelayChain two = one;
    two.relay_count = 2 * (one.relay_count + 1) - 1;
    const double n_S = rng.uniform(0.1, 5.0), eta = rng.uniform(0.1, 1.0);
    // no background: a carries the signal transfer h^(K+1), c the fading transfer mu^(K+1)
    const RelayCoefficients c1 = relay_coefficients(one, n_S, 0.0, 1e-6, eta);
    const RelayCoefficients c2 = relay_coefficients(two, n_S, 0.0, 1e-6, eta);
    const double h1 = c1.a / (eta * n_S), h2 = c2.a / (eta * n_S);
    CHECK(rel_diff(h2, h1 * h1) <= 1e-12);
    CHECK(rel_diff(c2.c, c1.c * c1.c) <= 1e-12);
    CHECK(rel_diff(h2 * c2.c, (h1 * c1.c) * (h1 * c1.c)) <= 1e-12);
  }
}

TEST_CASE("more relays never lower the noise bound") {
  RandomStream rng(112, 0);
  const Environment env;
  const ReceiverParams rx;
  for (int i = 0; i < 100; ++i) {
    LinkGeometry g;
    g.length = rng.uniform(1.0, 300.0);
    g.rx_diameter = rng.uniform(0.05, 0.3);
    const WaterType w{"custom", rng.uniform(0.05, 2.5), rng.uniform(0.1, 0.3)};
    double previous = 0.0;
    for (int K = 0; K <= 20; ++K) {
      g.relay_count = K;
      const double n = relay_noise_upper(env, rx, w, g);
      CHECK(n >= previous * (1.0 - 1e-14));
      previous = n;
    }
  }
}

TEST_CASE("optimal relay count does not depend on evaluation order") {
  const Scenario s = load("thesis-ch3-fig2");
  const int max_relays = 6;
  const RelayOptimum first = optimal_relay_count(s.link, max_relays, Criterion::QberLimit, 1.0, 300.0);
  const RelayOptimum again = optimal_relay_count(s.link, max_relays, Criterion::QberLimit, 1.0, 300.0);
  CHECK(first.relay_count == again.relay_count);
  CHECK(first.distances == again.distances);

  std::vector<int> order(max_relays + 1);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(113));
  std::vector<double> distances(max_relays + 1, 0.0);
  for (int K : order) {
    try {
      distances[K] = relay_achievable_distance(K, Criterion::QberLimit, s.link, 1.0, 300.0);
    } catch (const InfeasibleError&) {
      distances[K] = 0.0;
    }
  }
  const auto best = std::max_element(distances.begin(), distances.end());
  CHECK(distances == first.distances);
  CHECK(first.relay_count == static_cast<int>(best - distances.begin()));
}

// decoy

TEST_CASE("decoy gain bounds are ordered") {
  RandomStream rng(114, 0);
  for (int i = 0; i < 2000; ++i) {
    DecoyParams p;
    p.signal_intensity = rng.uniform(0.05, 1.0);
    p.decoy_intensity = rng.uniform(0.001, 0.999) * p.signal_intensity;
    const double Y0 = log_uniform(rng, 1e-9, 1e-2), alpha = rng.uniform();
    const double loss = log_uniform(rng, 1e-8, 1.0), eta_bob = rng.uniform(0.01, 1.0);
    const DecoyGains g = gains_lower(Y0, alpha, loss, eta_bob, p);
    CHECK(g.Q_nu_L <= g.Q_mu_L);
    CHECK(g.Q_mu_L <= gain_upper_mu(Y0, loss, eta_bob, p));
  }
}

TEST_CASE("decoy rate does not grow with distance") {
  const Scenario s = load("thesis-ch5-fig3");
  const double cutoff = decoy_cutoff_distance(s.link, s.decoy, 1.0, 200.0);
  double previous = INFINITY;
  for (double L = 1.0; L <= cutoff; L += 1.0) {
    const double r = decoy_report(s.link, s.decoy, L).rate_lower;
    CHECK(r <= previous);
    previous = r;
  }
}

TEST_CASE("more noise never raises the decoy rate") {
  const Scenario s = load("thesis-ch5-fig3");
  for (double L : {5.0, 20.0, 40.0, 60.0, 80.0}) {
    double previous = INFINITY;
    for (double irradiance : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) {
      LinkParams p = s.link;
      p.environment.surface_irradiance = irradiance;
      const double r = decoy_report(p, s.decoy, L).rate_lower;
      CHECK(r <= previous);
      previous = r;
    }
  }
}

TEST_CASE("full power transfer makes the signal gain bounds coincide") {
  RandomStream rng(115, 0);
  const DecoyParams p;
  for (int i = 0; i < 1000; ++i) {
    const double Y0 = log_uniform(rng, 1e-9, 1e-2), loss = log_uniform(rng, 1e-8, 1.0);
    const double eta_bob = rng.uniform(0.01, 1.0);
    CHECK(gains_lower(Y0, 1.0, loss, eta_bob, p).Q_mu_L == gain_upper_mu(Y0, loss, eta_bob, p));
  }
}

// montecarlo

TEST_CASE("directions stay unit vectors under repeated rotation") {
  RandomStream rng(116, 0);
  const ScatterModel model = load("thesis-ch4-fig3").mc.config.model;
  Vec3 d{0.0, 0.0, 1.0};
  double drift = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const auto [theta, phi] = sample_scatter_angle(model, rng);
    d = rotate_direction(d, theta, phi);
    drift = std::max(drift, std::fabs(std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z) - 1.0));
  }
  CHECK(drift < 1e-9);
}

TEST_CASE("received weight, transfer and arrival times are physical") {
  const Scenario s = load("thesis-ch4-fig3");
  for (double L : {10.0, 40.0}) {
    McConfig cfg = s.mc.config;
    cfg.detector.plane_z = L;
    cfg.keep_records = true;
    const McResult r = run_simulation(100000, cfg, 117);
    CHECK(r.received <= r.launched);
    CHECK(r.received_weight <= static_cast<double>(r.launched));
    CHECK(r.gamma() >= 0.0);
    CHECK(r.gamma() <= 1.0);
    const long histogram_total = std::accumulate(r.toa_histogram.counts.begin(), r.toa_histogram.counts.end(), 0L);
    CHECK(histogram_total == r.received);
    for (const auto& rec : r.records) CHECK(rec.toa >= 0.0);
  }
}

TEST_CASE("received weight arrives close to the axis") {
  const Scenario s = load("thesis-ch4-fig3");
  for (double L : s.mc.gate_distances) {
    CAPTURE(L);
    McConfig cfg = s.mc.config;
    cfg.detector.plane_z = L;
    cfg.detector.fov = constants::pi;
    cfg.keep_records = true;
    const McResult r = run_simulation(200000, cfg, 118);
    double total = 0.0, narrow = 0.0;
    for (const auto& rec : r.records) {
      total += rec.weight;
      if (rec.aoa < 10.0 * constants::deg) narrow += rec.weight;
    }
    REQUIRE(total > 0.0);
    CHECK(narrow / total >= 0.95);
  }
}

TEST_CASE("QBER against gate time falls then rises") {
  const Scenario s = load("thesis-ch4-fig3");
  for (double L : s.mc.gate_distances) {
    CAPTURE(L);
    McConfig cfg = s.mc.config;
    cfg.detector.plane_z = L;
    const GateOptimum opt = optimize_gate_time(cfg, s.mc.noise, s.mc.gate_grid, 10000000, s.seed);
    CHECK(is_unimodal(opt.curve));
  }
}

// cli

TEST_CASE("same scenario and seed give byte-identical tables") {
  Scenario sweep = load("thesis-ch2-fig2");
  sweep.sweep.values = {5.0, 50.0, 100.0, 150.0};
  Scenario mc = load("thesis-ch4-fig3");
  mc.mc.photons = 50000;
  for (const auto& [command, scenario] :
       std::vector<std::pair<std::string, Scenario>>{{"qber-sweep", sweep}, {"mc-run", mc}}) {
    CAPTURE(command);
    Scenario one = scenario, many = scenario;
    one.threads = 1;
    many.threads = 3;
    const ResultTable a = run_command(command, one);
    CHECK(to_csv(a) == to_csv(run_command(command, one)));
    CHECK(to_csv(a) == to_csv(run_command(command, many)));
    CHECK(to_json(a) == to_json(run_command(command, many)));
  }
}

TEST_CASE("shipped presets exist, validate and carry their chapter parameters") {
  for (const char* name : {"thesis-ch2-fig2", "thesis-ch3-fig2", "thesis-ch5-fig3", "thesis-ch4-fig3"}) {
    CAPTURE(name);
    REQUIRE(has_preset(name));
    CHECK_NOTHROW(load(name).validate());
  }
  const Scenario ch2 = load("thesis-ch2-fig2");
  CHECK(ch2.protocol == Protocol::Bb84);
  CHECK(ch2.link.protocol.mean_photon_number == 1.0);
  CHECK(ch2.link.protocol.ldpc_rate == 0.5);
  CHECK(ch2.link.protocol.qber_threshold == 0.1071);
  CHECK(ch2.link.geometry.rx_diameter == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(ch2.link.geometry.wavelength == doctest::Approx(530e-9).epsilon(1e-15));
  CHECK(ch2.link.receiver.dark_rate == 60.0);
  CHECK(ch2.link.receiver.bit_period == doctest::Approx(35e-9).epsilon(1e-15));
  CHECK(ch2.link.receiver.gate_time == doctest::Approx(200e-12).epsilon(1e-15));
  CHECK(ch2.link.receiver.quantum_efficiency == 0.5);

  const Scenario ch3 = load("thesis-ch3-fig2");
  CHECK(ch3.protocol == Protocol::Relay);
  CHECK(ch3.link.geometry.rx_diameter == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(ch3.search.max_relays == 10);

  const Scenario ch5 = load("thesis-ch5-fig3");
  CHECK(ch5.protocol == Protocol::Decoy);
  CHECK(ch5.decoy.signal_intensity == 0.48);
  CHECK(ch5.decoy.decoy_intensity == 0.05);
  CHECK(ch5.decoy.detector_error == 0.033);
  CHECK(ch5.decoy.ec_efficiency == 1.22);
  CHECK(ch5.link.receiver.bob_transmittance == 0.045);

  const Scenario ch4 = load("thesis-ch4-fig3");
  CHECK(ch4.protocol == Protocol::MonteCarlo);
  CHECK(ch4.mc.config.model.extinction() == doctest::Approx(0.151));
  CHECK(mean_cosine_from_B(ch4.mc.config.model.backscatter_fraction) == doctest::Approx(0.9675));
  CHECK(ch4.mc.config.detector.fov == doctest::Approx(10.0 * constants::deg));
  CHECK(ch4.mc.gate_distances == std::vector<double>{10.0, 20.0, 30.0, 40.0});
}

}  // TEST_SUITE
