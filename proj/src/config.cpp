#include "uwqkd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "uwqkd/constants.hpp"
#include "uwqkd/errors.hpp"

namespace uwqkd {

// Defined in the generated presets source.
const std::vector<std::pair<std::string, std::string>>& preset_table();

namespace {

enum class Kind { Length, Time, Angle, Number, Integer, Text, LengthList, TimeList };

struct KeyDef {
  const char* section;
  const char* key;
  Kind kind;
  const char* unit;  // accepted as a no-op suffix
};

// clang-format off
const KeyDef kKeys[] = {
    {"scenario", "name", Kind::Text, ""},
    {"scenario", "preset", Kind::Text, ""},
    {"scenario", "protocol", Kind::Text, ""},
    {"scenario", "description", Kind::Text, ""},
    {"water", "type", Kind::Text, ""},
    {"water", "extinction", Kind::Number, "1/m"},
    {"water", "correction_T", Kind::Text, ""},
    {"turbulence", "regime", Kind::Text, ""},
    {"turbulence", "omega", Kind::Number, ""},
    {"turbulence", "chi_T", Kind::Number, "K^2/s"},
    {"turbulence", "epsilon", Kind::Number, "m^2/s^3"},
    {"turbulence", "alpha_th", Kind::Number, "1/deg"},
    {"turbulence", "d_r", Kind::Number, ""},
    {"turbulence", "viscosity", Kind::Number, "m^2/s"},
    {"turbulence", "prandtl_T", Kind::Number, ""},
    {"turbulence", "prandtl_S", Kind::Number, ""},
    {"turbulence", "prandtl_TS", Kind::Number, ""},
    {"geometry", "length", Kind::Length, ""},
    {"geometry", "tx_diameter", Kind::Length, ""},
    {"geometry", "rx_diameter", Kind::Length, ""},
    {"geometry", "divergence", Kind::Angle, ""},
    {"geometry", "wavelength", Kind::Length, ""},
    {"geometry", "relay_count", Kind::Integer, ""},
    {"receiver", "fov", Kind::Angle, ""},
    {"receiver", "filter_width", Kind::Length, ""},
    {"receiver", "bit_period", Kind::Time, ""},
    {"receiver", "gate_time", Kind::Time, ""},
    {"receiver", "dark_rate", Kind::Number, "Hz"},
    {"receiver", "quantum_efficiency", Kind::Number, ""},
    {"receiver", "bob_transmittance", Kind::Number, ""},
    {"environment", "surface_irradiance", Kind::Number, "W/m^2"},
    {"environment", "diffuse_attenuation", Kind::Number, "1/m"},
    {"environment", "depth", Kind::Length, ""},
    {"environment", "condition", Kind::Text, ""},
    {"bb84", "mean_photon_number", Kind::Number, ""},
    {"bb84", "ldpc_rate", Kind::Number, ""},
    {"bb84", "qber_threshold", Kind::Number, ""},
    {"bb84", "qber_security_limit", Kind::Number, ""},
    {"decoy", "signal_intensity", Kind::Number, ""},
    {"decoy", "decoy_intensity", Kind::Number, ""},
    {"decoy", "detector_error", Kind::Number, ""},
    {"decoy", "noise_error", Kind::Number, ""},
    {"decoy", "sift_factor", Kind::Number, ""},
    {"decoy", "ec_efficiency", Kind::Number, ""},
    {"quadrature", "abs_tol", Kind::Number, ""},
    {"quadrature", "rel_tol", Kind::Number, ""},
    {"quadrature", "max_subdivisions", Kind::Integer, ""},
    {"sweep", "variable", Kind::Text, ""},
    {"sweep", "start", Kind::Length, ""},
    {"sweep", "stop", Kind::Length, ""},
    {"sweep", "step", Kind::Length, ""},
    {"sweep", "values", Kind::LengthList, ""},
    {"search", "lo", Kind::Length, ""},
    {"search", "hi", Kind::Length, ""},
    {"search", "criterion", Kind::Text, ""},
    {"search", "max_relays", Kind::Integer, ""},
    {"mc", "photons", Kind::Integer, ""},
    {"mc", "distance", Kind::Length, ""},
    {"mc", "gate_distances", Kind::LengthList, ""},
    {"mc", "gate_grid", Kind::TimeList, ""},
    {"mc", "gate_min", Kind::Time, ""},
    {"mc", "gate_max", Kind::Time, ""},
    {"mc", "gate_ratio", Kind::Number, ""},
    {"mc", "absorption", Kind::Number, "1/m"},
    {"mc", "scattering", Kind::Number, "1/m"},
    {"mc", "backscatter_fraction", Kind::Number, ""},
    {"mc", "mean_cosine", Kind::Number, ""},
    {"mc", "aperture_radius", Kind::Length, ""},
    {"mc", "fov", Kind::Angle, ""},
    {"mc", "refractive_index", Kind::Number, ""},
    {"mc", "launch_radius", Kind::Length, ""},
    {"mc", "launch_half_angle", Kind::Angle, ""},
    {"mc", "weight_threshold", Kind::Number, ""},
    {"mc", "max_interactions", Kind::Integer, ""},
    {"mc", "partitions", Kind::Integer, ""},
    {"mc", "toa_bins", Kind::Integer, ""},
    {"mc", "toa_range", Kind::Time, ""},
    {"mc", "aoa_bins", Kind::Integer, ""},
    {"mc", "aoa_range", Kind::Angle, ""},
    {"mc", "histogram", Kind::Text, ""},
    {"mc", "dark_rate", Kind::Number, "Hz"},
    {"mc", "pulse_duration", Kind::Time, ""},
    {"mc", "filter_width", Kind::Length, ""},
    {"mc", "wavelength", Kind::Length, ""},
    {"mc", "signal_photons", Kind::Number, ""},
    {"run", "seed", Kind::Integer, ""},
    {"run", "threads", Kind::Integer, ""},
};
// clang-format on

const KeyDef* find_key(const std::string& section, const std::string& key) {
  for (const auto& k : kKeys) {
    if (section == k.section && key == k.key) return &k;
  }
  return nullptr;
}

bool known_section(const std::string& section) {
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyDef& k) { return section == k.section; });
}

struct RawValue {
  std::string text;
  std::string origin;
  int line = 0;

  std::string where() const { return line > 0 ? origin + ":" + std::to_string(line) : origin; }
};

using Entries = std::map<std::string, RawValue>;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') quoted = !quoted;
    if (quoted) continue;
    if ((c == '#' || c == ';') && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
  throw ConfigError(where + ": " + msg);
}

void read_entries(const std::string& text, const std::string& origin, Entries& out) {
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) fail(where, "unknown section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail(where, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) fail(where, "missing key before '='");
    if (section.empty()) fail(where, "key '" + key + "' outside any section");
    if (!find_key(section, key)) fail(where, "unknown key '" + key + "' in [" + section + "]");
    const std::string full = section + "." + key;
    if (!seen.insert(full).second) fail(where, "duplicate key '" + full + "'");
    out[full] = RawValue{value, origin, line_no};
  }
}

double unit_scale(Kind kind, const std::string& suffix, const KeyDef& def, const std::string& where) {
  if (suffix.empty() || suffix == def.unit) {
    return kind == Kind::Angle ? constants::deg : 1.0;
  }
  struct U {
    const char* name;
    double scale;
  };
  static const U lengths[] = {{"m", 1.0}, {"km", 1e3}, {"cm", 1e-2}, {"mm", 1e-3}, {"um", 1e-6}, {"nm", 1e-9}};
  static const U times[] = {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}};
  static const U angles[] = {{"deg", constants::deg}, {"rad", 1.0}};
  auto look = [&](const auto& table) -> double {
    for (const auto& u : table) {
      if (suffix == u.name) return u.scale;
    }
    fail(where, "unit '" + suffix + "' not allowed for " + def.section + "." + def.key);
  };
  switch (kind) {
    case Kind::Length:
    case Kind::LengthList:
      return look(lengths);
    case Kind::Time:
    case Kind::TimeList:
      return look(times);
    case Kind::Angle:
      return look(angles);
    default:
      fail(where, "unexpected unit '" + suffix + "' for " + std::string(def.section) + "." + def.key);
  }
}

double parse_quantity(const std::string& text, Kind kind, const KeyDef& def, const std::string& where) {
  const std::string t = trim(text);
  if (t.empty()) fail(where, std::string(def.section) + "." + def.key + ": empty value");
  const char* begin = t.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) fail(where, std::string(def.section) + "." + def.key + ": '" + t + "' is not a number");
  const std::string suffix = trim(std::string(end));
  v *= unit_scale(kind, suffix, def, where);
  if (!std::isfinite(v)) fail(where, std::string(def.section) + "." + def.key + ": value is not finite");
  return v;
}

long parse_integer(const std::string& text, const KeyDef& def, const std::string& where) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) {
    // accept integral scientific notation such as 1e6
    char* end = nullptr;
    double d = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0' || d != std::floor(d) || std::fabs(d) > 9e18) {
      fail(where, std::string(def.section) + "." + def.key + ": '" + t + "' is not an integer");
    }
    v = static_cast<long>(d);
  }
  return v;
}

std::vector<double> parse_list(const std::string& text, Kind kind, const KeyDef& def, const std::string& where) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  const Kind scalar = kind == Kind::LengthList ? Kind::Length : Kind::Time;
  while (std::getline(ss, item, ',')) out.push_back(parse_quantity(item, scalar, def, where));
  if (out.empty()) fail(where, std::string(def.section) + "." + def.key + ": empty list");
  return out;
}

class Builder {
 public:
  explicit Builder(const Entries& e) : entries_(e) {}

  const RawValue* raw(const std::string& full) const {
    auto it = entries_.find(full);
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool has(const std::string& full) const { return raw(full) != nullptr; }

  void number(const std::string& full, double& target) const {
    if (const auto* r = raw(full)) {
      const KeyDef& d = def(full);
      target = parse_quantity(r->text, d.kind, d, r->where());
    }
  }
  template <class Int>
  void integer(const std::string& full, Int& target) const {
    if (const auto* r = raw(full)) {
      long v = parse_integer(r->text, def(full), r->where());
      target = static_cast<Int>(v);
    }
  }
  void text(const std::string& full, std::string& target) const {
    if (const auto* r = raw(full)) target = r->text;
  }
  void list(const std::string& full, std::vector<double>& target) const {
    if (const auto* r = raw(full)) {
      const KeyDef& d = def(full);
      target = parse_list(r->text, d.kind, d, r->where());
    }
  }
  std::string where(const std::string& full) const {
    const auto* r = raw(full);
    return r ? r->where() : std::string("<defaults>");
  }

 private:
  static const KeyDef& def(const std::string& full) {
    auto dot = full.find('.');
    return *find_key(full.substr(0, dot), full.substr(dot + 1));
  }
  const Entries& entries_;
};

Protocol protocol_from(const std::string& s, const std::string& where) {
  if (s == "bb84") return Protocol::Bb84;
  if (s == "relay") return Protocol::Relay;
  if (s == "decoy") return Protocol::Decoy;
  if (s == "montecarlo") return Protocol::MonteCarlo;
  fail(where, "scenario.protocol must be bb84, relay, decoy or montecarlo (got '" + s + "')");
}

std::vector<double> arithmetic_grid(double start, double stop, double step) {
  std::vector<double> v;
  const long n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long i = 0; i < n; ++i) v.push_back(start + static_cast<double>(i) * step);
  return v;
}

std::vector<double> geometric_grid(double lo, double hi, double ratio) {
  std::vector<double> v;
  for (double g = lo; g <= hi * (1.0 + 1e-12); g *= ratio) v.push_back(g);
  return v;
}

Scenario build(const Entries& entries) {
  Builder b(entries);
  Scenario s;

  b.text("scenario.name", s.name);
  b.text("scenario.preset", s.preset);
  if (b.has("scenario.protocol")) {
    std::string p;
    b.text("scenario.protocol", p);
    s.protocol = protocol_from(p, b.where("scenario.protocol"));
  }

  // geometry first: the water correction exponent may depend on it
  auto& g = s.link.geometry;
  b.number("geometry.length", g.length);
  b.number("geometry.tx_diameter", g.tx_diameter);
  b.number("geometry.rx_diameter", g.rx_diameter);
  b.number("geometry.divergence", g.divergence);
  b.number("geometry.wavelength", g.wavelength);
  b.integer("geometry.relay_count", g.relay_count);

  b.text("water.type", s.water_label);
  std::string corr = "auto";
  b.text("water.correction_T", corr);
  double correction = 0.0;
  if (corr == "auto") {
    try {
      correction = correction_coefficient(g.divergence, g.rx_diameter);
    } catch (const DomainError& e) {
      fail(b.where("water.correction_T"), std::string("correction_T = auto: ") + e.what());
    }
  } else {
    static const KeyDef d{"water", "correction_T", Kind::Number, ""};
    correction = parse_quantity(corr, Kind::Number, d, b.where("water.correction_T"));
  }
  if (s.water_label == "custom") {
    if (!b.has("water.extinction")) fail(b.where("water.type"), "water.type = custom requires water.extinction");
    s.link.water = WaterType{"custom", 0.0, correction};
  } else {
    try {
      s.link.water = WaterType::named(s.water_label, correction);
    } catch (const DomainError& e) {
      fail(b.where("water.type"), e.what());
    }
  }
  b.number("water.extinction", s.link.water.extinction);

  b.text("turbulence.regime", s.turbulence_label);
  static const char* kTurbKeys[] = {"omega",     "chi_T",     "epsilon",   "alpha_th",  "d_r",
                                    "viscosity", "prandtl_T", "prandtl_S", "prandtl_TS"};
  if (s.turbulence_label == "none") {
    for (const char* k : kTurbKeys) {
      const std::string full = std::string("turbulence.") + k;
      if (b.has(full)) fail(b.where(full), full + " given but turbulence.regime = none");
    }
    s.link.turbulence.reset();
  } else {
    TurbulenceParams t;
    if (s.turbulence_label != "custom") {
      try {
        t = TurbulenceParams::named(s.turbulence_label);
      } catch (const DomainError& e) {
        fail(b.where("turbulence.regime"), e.what());
      }
    } else if (!b.has("turbulence.chi_T") || !b.has("turbulence.epsilon")) {
      fail(b.where("turbulence.regime"), "turbulence.regime = custom requires chi_T and epsilon");
    }
    b.number("turbulence.omega", t.omega);
    b.number("turbulence.chi_T", t.chi_T);
    b.number("turbulence.epsilon", t.epsilon);
    b.number("turbulence.alpha_th", t.alpha_th);
    b.number("turbulence.d_r", t.d_r);
    b.number("turbulence.viscosity", t.viscosity);
    b.number("turbulence.prandtl_T", t.prandtl_T);
    b.number("turbulence.prandtl_S", t.prandtl_S);
    b.number("turbulence.prandtl_TS", t.prandtl_TS);
    s.link.turbulence = t;
  }

  auto& rx = s.link.receiver;
  b.number("receiver.fov", rx.fov);
  b.number("receiver.filter_width", rx.filter_width);
  b.number("receiver.bit_period", rx.bit_period);
  b.number("receiver.gate_time", rx.gate_time);
  b.number("receiver.dark_rate", rx.dark_rate);
  b.number("receiver.quantum_efficiency", rx.quantum_efficiency);
  b.number("receiver.bob_transmittance", rx.bob_transmittance);
  rx.aperture_diameter = g.rx_diameter;

  auto& env = s.link.environment;
  b.number("environment.surface_irradiance", env.surface_irradiance);
  b.number("environment.diffuse_attenuation", env.diffuse_attenuation);
  b.number("environment.depth", env.depth);
  b.text("environment.condition", env.condition);

  auto& bb = s.link.protocol;
  b.number("bb84.mean_photon_number", bb.mean_photon_number);
  b.number("bb84.ldpc_rate", bb.ldpc_rate);
  b.number("bb84.qber_threshold", bb.qber_threshold);
  b.number("bb84.qber_security_limit", bb.qber_security_limit);

  b.number("decoy.signal_intensity", s.decoy.signal_intensity);
  b.number("decoy.decoy_intensity", s.decoy.decoy_intensity);
  b.number("decoy.detector_error", s.decoy.detector_error);
  b.number("decoy.noise_error", s.decoy.noise_error);
  b.number("decoy.sift_factor", s.decoy.sift_factor);
  b.number("decoy.ec_efficiency", s.decoy.ec_efficiency);

  b.number("quadrature.abs_tol", s.link.quad.abs_tol);
  b.number("quadrature.rel_tol", s.link.quad.rel_tol);
  b.integer("quadrature.max_subdivisions", s.link.quad.max_subdivisions);

  b.text("sweep.variable", s.sweep.variable);
  if (s.sweep.variable != "distance" && s.sweep.variable != "rho") {
    fail(b.where("sweep.variable"), "sweep.variable must be distance or rho");
  }
  if (b.has("sweep.values")) {
    b.list("sweep.values", s.sweep.values);
  } else {
    const bool rho = s.sweep.variable == "rho";
    double start = rho ? 1e-3 : 1.0, stop = rho ? 0.1 : 200.0, step = rho ? 0.0 : 1.0;
    b.number("sweep.start", start);
    b.number("sweep.stop", stop);
    b.number("sweep.step", step);
    if (rho && step == 0.0) {
      for (int i = 0; i <= 12; ++i) s.sweep.values.push_back(start * std::pow(stop / start, i / 12.0));
    } else {
      if (!(step > 0.0) || !(stop >= start)) fail(b.where("sweep.step"), "sweep needs step > 0 and stop >= start");
      s.sweep.values = arithmetic_grid(start, stop, step);
    }
  }

  b.number("search.lo", s.search.lo);
  b.number("search.hi", s.search.hi);
  b.text("search.criterion", s.search.criterion);
  if (s.search.criterion != "qber" && s.search.criterion != "skr" && s.search.criterion != "both") {
    fail(b.where("search.criterion"), "search.criterion must be qber, skr or both");
  }
  b.integer("search.max_relays", s.search.max_relays);

  auto& mc = s.mc;
  b.integer("mc.photons", mc.photons);
  b.number("mc.distance", mc.distance);
  b.list("mc.gate_distances", mc.gate_distances);
  if (b.has("mc.gate_grid")) {
    b.list("mc.gate_grid", mc.gate_grid);
  } else {
    double lo = 10e-12, hi = 2e-9, ratio = 1.1;
    b.number("mc.gate_min", lo);
    b.number("mc.gate_max", hi);
    b.number("mc.gate_ratio", ratio);
    if (!(lo > 0.0 && hi >= lo && ratio > 1.0)) {
      fail(b.where("mc.gate_ratio"), "gate grid needs 0 < gate_min <= gate_max and gate_ratio > 1");
    }
    mc.gate_grid = geometric_grid(lo, hi, ratio);
  }
  auto& model = mc.config.model;
  b.number("mc.absorption", model.absorption);
  b.number("mc.scattering", model.scattering);
  if (b.has("mc.mean_cosine")) {
    double m = 0.0;
    b.number("mc.mean_cosine", m);
    try {
      model.backscatter_fraction = backscatter_fraction_from_mean_cosine(m);
    } catch (const DomainError& e) {
      fail(b.where("mc.mean_cosine"), e.what());
    }
  }
  b.number("mc.backscatter_fraction", model.backscatter_fraction);
  auto& det = mc.config.detector;
  b.number("mc.aperture_radius", det.aperture_radius);
  b.number("mc.fov", det.fov);
  b.number("mc.refractive_index", det.refractive_index);
  det.plane_z = mc.distance;
  b.number("mc.launch_radius", mc.config.launch_radius);
  b.number("mc.launch_half_angle", mc.config.launch_half_angle);
  b.number("mc.weight_threshold", mc.config.weight_threshold);
  b.integer("mc.max_interactions", mc.config.max_interactions);
  b.integer("mc.partitions", mc.config.partitions);
  b.integer("mc.toa_bins", mc.config.toa_bins);
  b.number("mc.toa_range", mc.config.toa_range);
  b.integer("mc.aoa_bins", mc.config.aoa_bins);
  b.number("mc.aoa_range", mc.config.aoa_range);
  b.text("mc.histogram", mc.histogram);
  if (mc.histogram != "toa" && mc.histogram != "aoa") fail(b.where("mc.histogram"), "mc.histogram must be toa or aoa");
  b.number("mc.dark_rate", mc.noise.dark_rate);
  b.number("mc.pulse_duration", mc.noise.pulse_duration);
  b.number("mc.filter_width", mc.noise.filter_width);
  b.number("mc.wavelength", mc.noise.wavelength);
  b.number("mc.signal_photons", mc.noise.n_S);
  mc.noise.environment = env;

  long seed = static_cast<long>(s.seed);
  b.integer("run.seed", seed);
  if (seed < 0) fail(b.where("run.seed"), "run.seed must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  b.integer("run.threads", s.threads);

  try {
    model.finalize();
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid scenario: ") + e.what());
  }
  return s;
}

// Alternative ways of giving the same setting; a later layer replaces the whole group.
const std::vector<std::vector<std::string>>& exclusive_groups() {
  static const std::vector<std::vector<std::string>> groups = {
      {"sweep.values", "sweep.start", "sweep.stop", "sweep.step"},
      {"mc.gate_grid", "mc.gate_min", "mc.gate_max", "mc.gate_ratio"},
      {"mc.mean_cosine", "mc.backscatter_fraction"},
  };
  return groups;
}

void check_exclusive(const Entries& own) {
  for (const auto& grp : exclusive_groups()) {
    auto head = own.find(grp.front());
    if (head == own.end()) continue;
    for (auto it = grp.begin() + 1; it != grp.end(); ++it) {
      if (own.count(*it)) fail(own.at(*it).where(), *it + " conflicts with " + grp.front());
    }
  }
}

void overlay(Entries& entries, const std::string& key, RawValue value) {
  for (const auto& grp : exclusive_groups()) {
    const bool head = key == grp.front();
    const bool tail = std::find(grp.begin() + 1, grp.end(), key) != grp.end();
    if (head) {
      for (auto it = grp.begin() + 1; it != grp.end(); ++it) entries.erase(*it);
    } else if (tail) {
      entries.erase(grp.front());
    }
  }
  if (key == "turbulence.regime" && value.text == "none") {
    for (auto it = entries.begin(); it != entries.end();) {
      if (it->first.rfind("turbulence.", 0) == 0) {
        it = entries.erase(it);
      } else {
        ++it;
      }
    }
  }
  entries[key] = std::move(value);
}

void load_with_presets(const std::string& text, const std::string& origin, Entries& entries, int depth) {
  if (depth > 8) throw ConfigError(origin + ": preset nesting too deep");
  Entries own;
  read_entries(text, origin, own);
  check_exclusive(own);
  auto it = own.find("scenario.preset");
  if (it != own.end()) {
    const std::string name = it->second.text;
    if (!has_preset(name)) fail(it->second.where(), "unknown preset '" + name + "'");
    load_with_presets(preset_text(name), "preset:" + name, entries, depth + 1);
  }
  for (auto& [k, v] : own) overlay(entries, k, v);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

std::string quote_text(const std::string& s) {
  return s.find_first_of("#;") == std::string::npos && trim(s) == s ? s : "\"" + s + "\"";
}

}  // namespace

void Scenario::validate() const {
  link.validate();
  decoy.validate();
  mc.config.validate();
  if (!(search.lo > 0.0 && search.hi > search.lo)) throw DomainError("search needs 0 < lo < hi");
  if (search.max_relays < 0) throw DomainError("search.max_relays must be >= 0");
  if (sweep.values.empty()) throw DomainError("sweep grid is empty");
  for (double v : sweep.values) {
    if (!(v > 0.0)) throw DomainError("sweep values must be > 0");
  }
  if (mc.photons <= 0) throw DomainError("mc.photons must be > 0");
  if (!(mc.distance > 0.0)) throw DomainError("mc.distance must be > 0");
  if (mc.gate_distances.empty() || mc.gate_grid.empty()) throw DomainError("mc gate study needs distances and gates");
  for (double v : mc.gate_distances) {
    if (!(v > 0.0)) throw DomainError("mc.gate_distances must be > 0");
  }
  for (double v : mc.gate_grid) {
    if (!(v > 0.0)) throw DomainError("mc.gate_grid must be > 0");
  }
  if (!(mc.noise.dark_rate >= 0.0 && mc.noise.pulse_duration > 0.0 && mc.noise.filter_width > 0.0 &&
        mc.noise.wavelength > 0.0 && mc.noise.n_S > 0.0)) {
    throw DomainError("mc noise parameters out of range");
  }
  if (threads < 1) throw DomainError("run.threads must be >= 1");
}

Scenario parse_config_text(const std::string& text, const std::string& origin, const Overrides& overrides) {
  Entries entries;
  load_with_presets(text, origin, entries, 0);
  Entries sets;
  for (const auto& [key, value] : overrides) {
    auto dot = key.find('.');
    if (dot == std::string::npos) throw ConfigError("--set " + key + ": expected section.key=value");
    const std::string section = key.substr(0, dot), name = key.substr(dot + 1);
    if (!find_key(section, name)) throw ConfigError("--set: unknown key '" + key + "'");
    if (key == "scenario.preset") throw ConfigError("--set: scenario.preset cannot be overridden");
    sets[key] = RawValue{trim(value), "--set " + key, 0};
  }
  check_exclusive(sets);
  for (auto& [k, v] : sets) overlay(entries, k, v);
  return build(entries);
}

Scenario parse_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (has_preset(path)) return parse_config_text(preset_text(path), "preset:" + path, overrides);
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path, overrides);
}

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Bb84:
      return "bb84";
    case Protocol::Relay:
      return "relay";
    case Protocol::Decoy:
      return "decoy";
    case Protocol::MonteCarlo:
      return "montecarlo";
  }
  return "bb84";
}

std::string canonical_config(const Scenario& s) {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << "\n"; };

  o << "[scenario]\n";
  kv("name", quote_text(s.name));
  if (!s.preset.empty()) kv("preset", s.preset);
  kv("protocol", protocol_name(s.protocol));

  o << "\n[geometry]\n";
  const auto& g = s.link.geometry;
  kv("length", fmt(g.length));
  kv("tx_diameter", fmt(g.tx_diameter));
  kv("rx_diameter", fmt(g.rx_diameter));
  kv("divergence", fmt(g.divergence) + " rad");
  kv("wavelength", fmt(g.wavelength));
  kv("relay_count", std::to_string(g.relay_count));

  o << "\n[water]\n";
  kv("type", s.water_label);
  kv("extinction", fmt(s.link.water.extinction));
  kv("correction_T", fmt(s.link.water.correction_T));

  o << "\n[turbulence]\n";
  if (!s.link.turbulence) {
    kv("regime", "none");
  } else {
    const auto& t = *s.link.turbulence;
    kv("regime", s.turbulence_label);
    kv("omega", fmt(t.omega));
    kv("chi_T", fmt(t.chi_T));
    kv("epsilon", fmt(t.epsilon));
    kv("alpha_th", fmt(t.alpha_th));
    kv("d_r", fmt(t.d_r));
    kv("viscosity", fmt(t.viscosity));
    kv("prandtl_T", fmt(t.prandtl_T));
    kv("prandtl_S", fmt(t.prandtl_S));
    kv("prandtl_TS", fmt(t.prandtl_TS));
  }

  o << "\n[receiver]\n";
  const auto& rx = s.link.receiver;
  kv("fov", fmt(rx.fov) + " rad");
  kv("filter_width", fmt(rx.filter_width));
  kv("bit_period", fmt(rx.bit_period));
  kv("gate_time", fmt(rx.gate_time));
  kv("dark_rate", fmt(rx.dark_rate));
  kv("quantum_efficiency", fmt(rx.quantum_efficiency));
  kv("bob_transmittance", fmt(rx.bob_transmittance));

  o << "\n[environment]\n";
  const auto& env = s.link.environment;
  kv("surface_irradiance", fmt(env.surface_irradiance));
  kv("diffuse_attenuation", fmt(env.diffuse_attenuation));
  kv("depth", fmt(env.depth));
  kv("condition", quote_text(env.condition));

  o << "\n[bb84]\n";
  const auto& bb = s.link.protocol;
  kv("mean_photon_number", fmt(bb.mean_photon_number));
  kv("ldpc_rate", fmt(bb.ldpc_rate));
  kv("qber_threshold", fmt(bb.qber_threshold));
  kv("qber_security_limit", fmt(bb.qber_security_limit));

  o << "\n[decoy]\n";
  kv("signal_intensity", fmt(s.decoy.signal_intensity));
  kv("decoy_intensity", fmt(s.decoy.decoy_intensity));
  kv("detector_error", fmt(s.decoy.detector_error));
  kv("noise_error", fmt(s.decoy.noise_error));
  kv("sift_factor", fmt(s.decoy.sift_factor));
  kv("ec_efficiency", fmt(s.decoy.ec_efficiency));

  o << "\n[quadrature]\n";
  kv("abs_tol", fmt(s.link.quad.abs_tol));
  kv("rel_tol", fmt(s.link.quad.rel_tol));
  kv("max_subdivisions", std::to_string(s.link.quad.max_subdivisions));

  o << "\n[sweep]\n";
  kv("variable", s.sweep.variable);
  kv("values", fmt_list(s.sweep.values));

  o << "\n[search]\n";
  kv("lo", fmt(s.search.lo));
  kv("hi", fmt(s.search.hi));
  kv("criterion", s.search.criterion);
  kv("max_relays", std::to_string(s.search.max_relays));

  o << "\n[mc]\n";
  const auto& mc = s.mc;
  kv("photons", std::to_string(mc.photons));
  kv("distance", fmt(mc.distance));
  kv("gate_distances", fmt_list(mc.gate_distances));
  kv("gate_grid", fmt_list(mc.gate_grid));
  kv("absorption", fmt(mc.config.model.absorption));
  kv("scattering", fmt(mc.config.model.scattering));
  kv("backscatter_fraction", fmt(mc.config.model.backscatter_fraction));
  kv("aperture_radius", fmt(mc.config.detector.aperture_radius));
  kv("fov", fmt(mc.config.detector.fov) + " rad");
  kv("refractive_index", fmt(mc.config.detector.refractive_index));
  kv("launch_radius", fmt(mc.config.launch_radius));
  kv("launch_half_angle", fmt(mc.config.launch_half_angle) + " rad");
  kv("weight_threshold", fmt(mc.config.weight_threshold));
  kv("max_interactions", std::to_string(mc.config.max_interactions));
  kv("partitions", std::to_string(mc.config.partitions));
  kv("toa_bins", std::to_string(mc.config.toa_bins));
  kv("toa_range", fmt(mc.config.toa_range));
  kv("aoa_bins", std::to_string(mc.config.aoa_bins));
  kv("aoa_range", fmt(mc.config.aoa_range) + " rad");
  kv("histogram", mc.histogram);
  kv("dark_rate", fmt(mc.noise.dark_rate));
  kv("pulse_duration", fmt(mc.noise.pulse_duration));
  kv("filter_width", fmt(mc.noise.filter_width));
  kv("wavelength", fmt(mc.noise.wavelength));
  kv("signal_photons", fmt(mc.noise.n_S));

  o << "\n[run]\n";
  kv("seed", std::to_string(s.seed));
  kv("threads", std::to_string(s.threads));
  return o.str();
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_table()) names.push_back(name);
  return names;
}

bool has_preset(const std::string& name) {
  const auto& t = preset_table();
  return std::any_of(t.begin(), t.end(), [&](const auto& p) { return p.first == name; });
}

const std::string& preset_text(const std::string& name) {
  for (const auto& p : preset_table()) {
    if (p.first == name) return p.second;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace uwqkd
