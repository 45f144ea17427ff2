#include "uwqkd/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "uwqkd/errors.hpp"

namespace uwqkd {

using constants::pi;

namespace {

// |uz| above this uses the on-axis form of the direction update.
constexpr double kNearAxis = 1.0 - 1e-12;

double backward_g(double gF) {
  return -0.3061446 + 1.000568 * gF - 0.01826338 * gF * gF + 0.03643748 * gF * gF * gF;
}

double forward_weight(double gF, double gB) { return gB * (1.0 + gB) / ((gF + gB) * (1.0 + gB - gF)); }

bool admissible(double gF) {
  const double gB = backward_g(gF);
  if (!(gB > 0.0 && gB < 1.0)) return false;
  const double a = forward_weight(gF, gB);
  return std::isfinite(a) && a > 0.0 && a < 1.0;
}

double composite_mean(double gF) {
  const double gB = backward_g(gF);
  return forward_weight(gF, gB) * (gF + gB) - gB;
}

}  // namespace

double mean_cosine_from_B(double B) { return 2.0 * (1.0 - 2.0 * B) / (2.0 + B); }

double backscatter_fraction_from_mean_cosine(double m) {
  if (!(m > -1.0 && m < 1.0)) throw DomainError("mean cosine must be in (-1, 1)");
  return (2.0 - 2.0 * m) / (4.0 + m);
}

TthgParams tthg_params_from_B(double B) {
  if (!(B > 0.0 && B < 1.0)) throw DomainError("backscatter fraction must be in (0, 1)");
  const double target = mean_cosine_from_B(B);
  auto f = [&](double gF) { return composite_mean(gF) - target; };

  constexpr int kScan = 4000;
  double lo = -1.0, hi = -1.0;
  double prev_g = 0.0;
  bool prev_ok = false;
  for (int i = 1; i < kScan; ++i) {
    const double g = static_cast<double>(i) / kScan;
    const bool ok = admissible(g);
    if (ok && prev_ok && (f(prev_g) <= 0.0) != (f(g) <= 0.0)) {
      lo = prev_g;
      hi = g;
      break;
    }
    prev_g = g;
    prev_ok = ok;
  }
  if (lo < 0.0) throw ModelError("no admissible forward asymmetry reproduces the mean cosine");
  const bool lo_neg = f(lo) <= 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((f(mid) <= 0.0) == lo_neg ? lo : hi) = mid;
  }
  TthgParams p;
  p.g_forward = 0.5 * (lo + hi);
  p.g_backward = backward_g(p.g_forward);
  p.forward_weight = forward_weight(p.g_forward, p.g_backward);
  p.mean_cosine = target;
  return p;
}

void ScatterModel::validate() const {
  if (!(absorption >= 0.0 && scattering >= 0.0 && absorption + scattering > 0.0))
    throw DomainError("scatter model: absorption and scattering must be >= 0 with positive sum");
  if (!(backscatter_fraction > 0.0 && backscatter_fraction < 1.0))
    throw DomainError("scatter model: backscatter_fraction must be in (0, 1)");
}

void ScatterModel::finalize() {
  validate();
  phase = tthg_params_from_B(backscatter_fraction);
}

void DetectorSpec::validate() const {
  if (!(aperture_radius > 0.0)) throw DomainError("detector.aperture_radius must be > 0");
  if (!(fov > 0.0 && fov <= pi + 1e-12)) throw DomainError("detector.fov must be in (0, 180] deg");
  if (!(gate_time > 0.0)) throw DomainError("detector.gate_time must be > 0");
  if (!(plane_z > 0.0)) throw DomainError("detector.plane_z must be > 0");
  if (!(refractive_index > 0.0)) throw DomainError("detector.refractive_index must be > 0");
}

void McConfig::validate() const {
  model.validate();
  detector.validate();
  if (!(launch_radius >= 0.0)) throw DomainError("mc.launch_radius must be >= 0");
  if (!(launch_half_angle >= 0.0 && launch_half_angle < pi / 2.0))
    throw DomainError("mc.launch_half_angle must be in [0, 90) deg");
  if (!(weight_threshold > 0.0 && weight_threshold < 1.0)) throw DomainError("mc.weight_threshold must be in (0, 1)");
  if (max_interactions < 1) throw DomainError("mc.max_interactions must be >= 1");
  if (partitions < 1) throw DomainError("mc.partitions must be >= 1");
  if (threads < 1) throw DomainError("mc.threads must be >= 1");
  if (toa_bins < 1 || aoa_bins < 1) throw DomainError("mc histogram bins must be >= 1");
  if (!(toa_range > 0.0 && aoa_range > 0.0)) throw DomainError("mc histogram ranges must be > 0");
}

Histogram::Histogram(int bins, double lo, double hi) : counts(bins, 0), weights(bins, 0.0) {
  edges.resize(bins + 1);
  for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * i / bins;
}

void Histogram::add(double value, double weight) {
  if (counts.empty()) return;
  const double lo = edges.front(), hi = edges.back();
  const auto bins = static_cast<long>(counts.size());
  // Overflow lands in the last bin so counts always total the detections.
  long i = static_cast<long>(std::floor((value - lo) / (hi - lo) * bins));
  i = std::clamp(i, 0L, bins - 1);
  counts[i] += 1;
  weights[i] += weight;
}

double McResult::gamma_stderr() const {
  if (launched == 0) return 0.0;
  const double n = static_cast<double>(launched);
  const double g = received_weight / n;
  return std::sqrt(std::max(0.0, received_weight_sq / n - g * g) / n);
}

Photon launch_photon(double r0, double theta0_max, RandomStream& rng) {
  const double phi0 = rng.uniform(0.0, 2.0 * pi);
  const double theta0 = rng.uniform(-theta0_max, theta0_max);
  Photon p;
  p.position = {r0 * std::cos(phi0), r0 * std::sin(phi0), 0.0};
  p.direction = {std::sin(theta0) * std::cos(phi0), std::sin(theta0) * std::sin(phi0), std::cos(theta0)};
  return p;
}

double sample_path_length(double extinction, RandomStream& rng) {
  return -std::log(rng.uniform_open_low()) / extinction;
}

double update_weight(double w, double absorption, double scattering) {
  return w * scattering / (absorption + scattering);
}

double sample_hg_cosine(double g, double u) {
  if (std::fabs(g) < 1e-9) return 2.0 * u - 1.0;
  const double s = (1.0 - g * g) / (1.0 - g + 2.0 * g * u);
  return std::clamp((1.0 + g * g - s * s) / (2.0 * g), -1.0, 1.0);
}

std::pair<double, double> sample_scatter_angle(const ScatterModel& model, RandomStream& rng) {
  const TthgParams& p = model.phase;
  const bool forward = rng.uniform() < p.forward_weight;
  const double cos_t = sample_hg_cosine(forward ? p.g_forward : -p.g_backward, rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * pi);
  return {std::acos(cos_t), phi};
}

double tthg_phase(double theta, const TthgParams& p) {
  auto hg = [&](double g) {
    return (1.0 - g * g) / (2.0 * std::pow(1.0 + g * g - 2.0 * g * std::cos(theta), 1.5));
  };
  return p.forward_weight * hg(p.g_forward) + (1.0 - p.forward_weight) * hg(-p.g_backward);
}

Vec3 rotate_direction(const Vec3& d, double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  Vec3 r;
  if (std::fabs(d.z) > kNearAxis) {
    r = {st * cp, st * sp, std::copysign(ct, d.z)};
  } else {
    const double root = std::sqrt(1.0 - d.z * d.z);
    r.x = st * (d.x * d.z * cp - d.y * sp) / root + d.x * ct;
    r.y = st * (d.y * d.z * cp + d.x * sp) / root + d.y * ct;
    r.z = -st * cp * root + d.z * ct;
  }
  const double n = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z);
  return {r.x / n, r.y / n, r.z / n};
}

Outcome propagate(Photon ph, const McConfig& cfg, RandomStream& rng) {
  const ScatterModel& m = cfg.model;
  const DetectorSpec& det = cfg.detector;
  const double sigma = m.extinction();
  const double L = det.plane_z;
  const double seconds_per_metre = det.refractive_index / constants::light_speed;
  Outcome out;
  for (long step = 0;; ++step) {
    if (step >= cfg.max_interactions) {
      out.fate = Fate::Absorbed;
      out.truncated = true;
      return out;
    }
    const double s = sample_path_length(sigma, rng);
    const Vec3& u = ph.direction;
    if (u.z > 0.0 && ph.position.z + u.z * s >= L) {
      const double t = (L - ph.position.z) / u.z;
      const double x = ph.position.x + u.x * t;
      const double y = ph.position.y + u.y * t;
      out.aoa = std::acos(std::min(1.0, u.z));
      out.toa = std::max(0.0, (ph.elapsed_path + t - L) * seconds_per_metre);
      out.weight = ph.weight;
      const bool inside = x * x + y * y <= det.aperture_radius * det.aperture_radius;
      out.fate = (inside && out.aoa < det.fov && out.toa < det.gate_time) ? Fate::Detected : Fate::Missed;
      return out;
    }
    ph.position = {ph.position.x + u.x * s, ph.position.y + u.y * s, ph.position.z + u.z * s};
    ph.elapsed_path += s;
    ph.weight = update_weight(ph.weight, m.absorption, m.scattering);
    if (ph.weight < cfg.weight_threshold) {
      out.fate = Fate::Absorbed;
      return out;
    }
    const auto [theta, phi] = sample_scatter_angle(m, rng);
    ph.direction = rotate_direction(ph.direction, theta, phi);
  }
}

namespace {

McResult empty_result(const McConfig& cfg) {
  McResult r;
  r.toa_histogram = Histogram(cfg.toa_bins, 0.0, cfg.toa_range);
  r.aoa_histogram = Histogram(cfg.aoa_bins, 0.0, cfg.aoa_range);
  return r;
}

McResult run_partition(long n, const McConfig& cfg, std::uint64_t seed, std::uint64_t stream_id) {
  McResult r = empty_result(cfg);
  RandomStream rng(seed, stream_id);
  for (long i = 0; i < n; ++i) {
    const Photon ph = launch_photon(cfg.launch_radius, cfg.launch_half_angle, rng);
    const Outcome o = propagate(ph, cfg, rng);
    ++r.launched;
    if (o.truncated) ++r.truncated;
    switch (o.fate) {
      case Fate::Absorbed:
        ++r.absorbed;
        break;
      case Fate::Missed:
        ++r.missed;
        break;
      case Fate::Detected:
        ++r.received;
        r.received_weight += o.weight;
        r.received_weight_sq += o.weight * o.weight;
        r.max_toa = std::max(r.max_toa, o.toa);
        r.toa_histogram.add(o.toa, o.weight);
        r.aoa_histogram.add(o.aoa, o.weight);
        if (cfg.keep_records) r.records.push_back({o.toa, o.aoa, o.weight});
        break;
    }
  }
  return r;
}

void merge_into(McResult& acc, const McResult& part) {
  acc.launched += part.launched;
  acc.received += part.received;
  acc.absorbed += part.absorbed;
  acc.missed += part.missed;
  acc.truncated += part.truncated;
  acc.received_weight += part.received_weight;
  acc.received_weight_sq += part.received_weight_sq;
  acc.max_toa = std::max(acc.max_toa, part.max_toa);
  for (std::size_t i = 0; i < acc.toa_histogram.counts.size(); ++i) {
    acc.toa_histogram.counts[i] += part.toa_histogram.counts[i];
    acc.toa_histogram.weights[i] += part.toa_histogram.weights[i];
  }
  for (std::size_t i = 0; i < acc.aoa_histogram.counts.size(); ++i) {
    acc.aoa_histogram.counts[i] += part.aoa_histogram.counts[i];
    acc.aoa_histogram.weights[i] += part.aoa_histogram.weights[i];
  }
  acc.records.insert(acc.records.end(), part.records.begin(), part.records.end());
}

}  // namespace

McResult run_simulation(long n_photons, const McConfig& cfg_in, std::uint64_t seed) {
  if (n_photons < 0) throw DomainError("run_simulation: negative photon count");
  McConfig cfg = cfg_in;
  cfg.validate();
  cfg.model.finalize();

  const int parts = cfg.partitions;
  std::vector<McResult> partial(parts);
  auto work = [&](int first, int stride) {
    for (int i = first; i < parts; i += stride) {
      const long n = n_photons / parts + (i < n_photons % parts ? 1 : 0);
      partial[i] = run_partition(n, cfg, seed, static_cast<std::uint64_t>(i));
    }
  };
  const int workers = std::min(cfg.threads, parts);
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& t : pool) t.join();
  }

  McResult total = empty_result(cfg);
  for (const auto& p : partial) merge_into(total, p);
  return total;
}

double mc_qber(double gamma, double n_S, double n_N) {
  const double den = 0.5 * gamma * n_S + 2.0 * n_N;
  if (!(den > 0.0)) return 0.5;
  return n_N / den;
}

double gate_noise(const GateNoise& noise, const DetectorSpec& detector, double gate) {
  ReceiverParams rx;
  rx.fov = detector.fov;
  rx.filter_width = noise.filter_width;
  rx.gate_time = gate;
  rx.bit_period = noise.pulse_duration;
  rx.dark_rate = noise.dark_rate;
  rx.aperture_diameter = 2.0 * detector.aperture_radius;
  return noise_per_detector(noise.environment, rx, noise.wavelength);
}

GateOptimum optimize_gate_on(const McResult& sim, const McConfig& cfg, const GateNoise& noise,
                             const std::vector<double>& gates) {
  if (gates.empty()) throw DomainError("optimize_gate_time: empty gate grid");
  std::vector<DetectionRecord> recs;
  recs.reserve(sim.records.size());
  for (const auto& r : sim.records)
    if (r.aoa < cfg.detector.fov) recs.push_back(r);
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.toa < b.toa; });
  std::vector<double> cum(recs.size() + 1, 0.0);
  for (std::size_t i = 0; i < recs.size(); ++i) cum[i + 1] = cum[i] + recs[i].weight;

  GateOptimum best;
  best.qber = INFINITY;
  for (double g : gates) {
    if (!(g > 0.0)) throw DomainError("optimize_gate_time: gate values must be > 0");
    const auto it = std::lower_bound(recs.begin(), recs.end(), g, [](const auto& r, double v) { return r.toa < v; });
    const double weight = cum[static_cast<std::size_t>(it - recs.begin())];
    GatePoint pt;
    pt.gate = g;
    pt.gamma = sim.launched ? weight / sim.launched : 0.0;
    pt.noise = gate_noise(noise, cfg.detector, g);
    pt.qber = mc_qber(pt.gamma, noise.n_S, pt.noise);
    best.curve.push_back(pt);
    if (pt.qber < best.qber) {
      best.qber = pt.qber;
      best.gate = g;
    }
  }
  return best;
}

GateOptimum optimize_gate_time(const McConfig& cfg_in, const GateNoise& noise, const std::vector<double>& gates,
                               long n_photons, std::uint64_t seed) {
  if (gates.empty()) throw DomainError("optimize_gate_time: empty gate grid");
  McConfig cfg = cfg_in;
  cfg.keep_records = true;
  cfg.detector.gate_time = std::max(cfg.detector.gate_time, *std::max_element(gates.begin(), gates.end()));
  McResult sim = run_simulation(n_photons, cfg, seed);
  GateOptimum out = optimize_gate_on(sim, cfg, noise, gates);
  out.simulation = std::move(sim);
  return out;
}

bool is_unimodal(const std::vector<GatePoint>& curve) {
  if (curve.size() < 3) return true;
  std::size_t i = 0;
  while (i + 1 < curve.size() && curve[i + 1].qber <= curve[i].qber) ++i;
  while (i + 1 < curve.size() && curve[i + 1].qber >= curve[i].qber) ++i;
  return i + 1 == curve.size();
}

}  // namespace uwqkd
