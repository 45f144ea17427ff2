#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "uwqkd/bb84.hpp"
#include "uwqkd/decoy.hpp"
#include "uwqkd/montecarlo.hpp"

namespace uwqkd {

enum class Protocol { Bb84, Relay, Decoy, MonteCarlo };

struct SweepSpec {
  std::string variable = "distance";  // distance | rho
  std::vector<double> values;         // explicit grid, SI units

  bool operator==(const SweepSpec&) const = default;
};

struct SearchSpec {
  double lo = 1.0;   // m
  double hi = 300.0; // m
  std::string criterion = "qber";  // qber | skr | both
  int max_relays = 10;

  bool operator==(const SearchSpec&) const = default;
};

struct McSettings {
  McConfig config;
  GateNoise noise;
  long photons = 1000000;
  double distance = 10.0;                 // m, single run
  std::vector<double> gate_distances{10.0, 20.0, 30.0, 40.0};
  std::vector<double> gate_grid;          // s
  std::string histogram = "toa";          // toa | aoa

  bool operator==(const McSettings&) const = default;
};

struct Scenario {
  std::string name = "custom";
  std::string preset;
  Protocol protocol = Protocol::Bb84;
  std::string water_label = "clear_ocean";
  std::string turbulence_label = "none";
  LinkParams link;
  DecoyParams decoy;
  McSettings mc;
  SweepSpec sweep;
  SearchSpec search;
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;

  bool operator==(const Scenario&) const = default;
};

// key -> raw value, as given on the command line with --set section.key=value
using Overrides = std::vector<std::pair<std::string, std::string>>;

Scenario parse_config_text(const std::string& text, const std::string& origin = "<config>",
                           const Overrides& overrides = {});
Scenario parse_config(const std::string& path, const Overrides& overrides = {});

// Canonical text form; parse_config_text(canonical_config(s)) reproduces s.
std::string canonical_config(const Scenario& s);

std::vector<std::string> preset_names();
bool has_preset(const std::string& name);
const std::string& preset_text(const std::string& name);

std::string protocol_name(Protocol p);

}  // namespace uwqkd
