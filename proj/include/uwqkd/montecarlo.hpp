#pragma once

#include <cstdint>
#include <vector>

#include "uwqkd/constants.hpp"
#include "uwqkd/noise.hpp"
#include "uwqkd/numerics.hpp"

namespace uwqkd {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct Photon {
  Vec3 position;
  Vec3 direction{0.0, 0.0, 1.0};
  double weight = 1.0;
  double elapsed_path = 0.0;
};

struct TthgParams {
  double mean_cosine = 0.0;
  double g_forward = 0.0;
  double g_backward = 0.0;
  double forward_weight = 1.0;  // a

  bool operator==(const TthgParams&) const = default;
};

// Backscatter fraction that reproduces a mean cosine through the regression
// mean_cosine = 2(1 - 2B)/(2 + B).
double backscatter_fraction_from_mean_cosine(double mean_cosine);
double mean_cosine_from_B(double backscatter_fraction);
TthgParams tthg_params_from_B(double backscatter_fraction);

struct ScatterModel {
  double absorption = 0.114;  // 1/m
  double scattering = 0.037;  // 1/m
  double backscatter_fraction = 0.013085;
  TthgParams phase;           // filled by finalize()

  void validate() const;
  void finalize();
  double extinction() const { return absorption + scattering; }

  bool operator==(const ScatterModel&) const = default;
};

struct DetectorSpec {
  double aperture_radius = 0.10;                 // m
  double fov = 10.0 * constants::deg;              // rad
  double gate_time = 1.0;                        // s; effectively open
  double plane_z = 10.0;                         // m
  double refractive_index = 1.33;

  void validate() const;

  bool operator==(const DetectorSpec&) const = default;
};

struct McConfig {
  ScatterModel model;
  DetectorSpec detector;
  double launch_radius = 3e-3;                      // m
  double launch_half_angle = 20.0 * constants::deg;  // rad
  double weight_threshold = 1e-4;
  long max_interactions = 10000;
  int partitions = 8;
  int threads = 1;
  int toa_bins = 200;
  double toa_range = 20e-9;                         // s
  int aoa_bins = 200;
  double aoa_range = constants::pi / 2.0;               // rad
  bool keep_records = false;

  void validate() const;

  bool operator==(const McConfig&) const = default;
};

enum class Fate { Detected, Absorbed, Missed };

struct Outcome {
  Fate fate = Fate::Absorbed;
  double toa = 0.0;  // s, ballistic flight removed
  double aoa = 0.0;  // rad
  double weight = 0.0;
  bool truncated = false;
};

struct Histogram {
  std::vector<double> edges;
  std::vector<long> counts;
  std::vector<double> weights;

  Histogram() = default;
  Histogram(int bins, double lo, double hi);
  void add(double value, double weight);
};

struct DetectionRecord {
  double toa;
  double aoa;
  double weight;
};

struct McResult {
  long launched = 0;
  long received = 0;
  long absorbed = 0;
  long missed = 0;
  long truncated = 0;
  double received_weight = 0.0;
  double received_weight_sq = 0.0;
  double max_toa = 0.0;
  Histogram toa_histogram;
  Histogram aoa_histogram;
  std::vector<DetectionRecord> records;  // only with keep_records

  double gamma() const { return launched ? received_weight / launched : 0.0; }
  double gamma_stderr() const;
};

Photon launch_photon(double r0, double theta0_max, RandomStream& rng);
double sample_path_length(double extinction, RandomStream& rng);
double update_weight(double w, double absorption, double scattering);
double sample_hg_cosine(double g, double u);
// Scattering polar and azimuthal angles from the two-term phase function.
std::pair<double, double> sample_scatter_angle(const ScatterModel& model, RandomStream& rng);
// Phase function normalised so that its integral against sin(theta) over [0, pi] is 1.
double tthg_phase(double theta, const TthgParams& p);
Vec3 rotate_direction(const Vec3& dir, double theta, double phi);

Outcome propagate(Photon photon, const McConfig& cfg, RandomStream& rng);
McResult run_simulation(long n_photons, const McConfig& cfg, std::uint64_t seed);

double mc_qber(double gamma, double n_S, double n_N);

struct GateNoise {
  Environment environment;
  double dark_rate = 60.0;        // Hz
  double pulse_duration = 20e-9;  // s, dark counts accrue over the pulse
  double filter_width = 30e-9;    // m
  double wavelength = 532e-9;     // m
  double n_S = 1.0;

  bool operator==(const GateNoise&) const = default;
};

struct GatePoint {
  double gate;
  double gamma;
  double noise;
  double qber;
};

struct GateOptimum {
  double gate = 0.0;
  double qber = 0.0;
  std::vector<GatePoint> curve;
  McResult simulation;
};

// Per-detector noise for a gate, with background collected over the gate only.
double gate_noise(const GateNoise& noise, const DetectorSpec& detector, double gate);

// Evaluates the curve on already simulated detections; records must be kept.
GateOptimum optimize_gate_on(const McResult& sim, const McConfig& cfg, const GateNoise& noise,
                             const std::vector<double>& gates);
GateOptimum optimize_gate_time(const McConfig& cfg, const GateNoise& noise, const std::vector<double>& gates,
                               long n_photons, std::uint64_t seed);

bool is_unimodal(const std::vector<GatePoint>& curve);

}  // namespace uwqkd
