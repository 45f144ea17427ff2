#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <string>

#include "uwqkd/bb84.hpp"
#include "uwqkd/commands.hpp"
#include "uwqkd/config.hpp"
#include "uwqkd/errors.hpp"
#include "uwqkd/relay.hpp"

using namespace uwqkd;

TEST_CASE("an empty config gives the documented defaults") {
  const Scenario s = parse_config_text("");
  CHECK(s.protocol == Protocol::Bb84);
  CHECK(s.link.water.name == "clear_ocean");
  CHECK(s.link.water.extinction == 0.151);
  CHECK_FALSE(s.link.turbulence.has_value());
  CHECK(s.link.geometry.divergence == doctest::Approx(6.0 * constants::deg));
  CHECK(s.link.turbulence == std::nullopt);
  CHECK(s.sweep.values.size() == 200);
  CHECK(s.seed == 1);
  CHECK(s.threads == 1);
}

TEST_CASE("validation errors name the offending key") {
  CHECK_THROWS_WITH_AS(parse_config_text("[water]\ntype = custom\nextinction = -0.2\n"),
                       doctest::Contains("extinction"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[bb84]\nldpc_rate = 1.5\n"), doctest::Contains("ldpc_rate"), ConfigError);
}

TEST_CASE("parse errors carry the line number") {
  CHECK_THROWS_WITH_AS(parse_config_text("[geometry]\nlength = 10\nlenght = 20\n", "f.conf"),
                       doctest::Contains("f.conf:3: unknown key 'lenght'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("\n[nowhere]\n", "f.conf"), doctest::Contains("f.conf:2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("length = 3\n", "f.conf"), doctest::Contains("f.conf:1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[geometry]\nlength = 3\nlength = 4\n", "f.conf"),
                       doctest::Contains("f.conf:3: duplicate key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[geometry]\nlength = ten\n", "f.conf"), doctest::Contains("f.conf:2"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("[geometry]\nlength = 3 s\n", "f.conf"), doctest::Contains("unit 's'"),
                       ConfigError);
}

TEST_CASE("unit suffixes") {
  const Scenario s = parse_config_text(
      "[geometry]\n"
      "tx_diameter = 50 mm   # trailing comment\n"
      "rx_diameter = 0.05\n"
      "divergence = 0.2 rad\n"
      "wavelength = 0.532 um\n"
      "[water]\n"
      "correction_T = 0.16\n"
      "[receiver]\n"
      "filter_width = 30 nm\n"
      "gate_time = 0.5 ns\n"
      "fov = 90\n");
  CHECK(s.link.geometry.tx_diameter == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(s.link.geometry.divergence == 0.2);
  CHECK(s.link.geometry.wavelength == doctest::Approx(532e-9).epsilon(1e-15));
  CHECK(s.link.receiver.filter_width == doctest::Approx(30e-9).epsilon(1e-15));
  CHECK(s.link.receiver.gate_time == doctest::Approx(500e-12).epsilon(1e-15));
  CHECK(s.link.receiver.fov == doctest::Approx(constants::pi / 2.0).epsilon(1e-15));
}

TEST_CASE("canonical form round-trips every preset") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const Scenario s = parse_config_text(preset_text(name), name);
    const std::string text = canonical_config(s);
    const Scenario back = parse_config_text(text, "canonical");
    CHECK(back == s);
    CHECK(canonical_config(back) == text);
  }
}

TEST_CASE("overrides layer on top of presets") {
  const Scenario s = parse_config_text("[scenario]\npreset = thesis-ch2-fig2\n[geometry]\nrx_diameter = 20 cm\n",
                                       "user", {{"turbulence.regime", "none"}, {"run.seed", "7"}});
  CHECK(s.link.geometry.rx_diameter == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(s.link.geometry.tx_diameter == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_FALSE(s.link.turbulence.has_value());
  CHECK(s.seed == 7);
  CHECK(s.preset == "thesis-ch2-fig2");
  CHECK_THROWS_AS(parse_config_text("", "user", {{"scenario.preset", "thesis-ch3-fig2"}}), ConfigError);
  CHECK_THROWS_AS(parse_config_text("", "user", {{"geometry.nothing", "1"}}), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[scenario]\npreset = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[sweep]\nvalues = 1, 2\nstep = 3\n"), ConfigError);
}

TEST_CASE("config files on disk") {
  const std::string path = "uwqkd_test_config.conf";
  {
    std::ofstream out(path);
    out << "[scenario]\nprotocol = decoy\n[turbulence]\nregime = weak\n";
  }
  const Scenario s = parse_config(path);
  CHECK(s.protocol == Protocol::Decoy);
  CHECK(s.link.turbulence.has_value());
  std::remove(path.c_str());
  CHECK_THROWS_AS(parse_config("does/not/exist.conf"), ConfigError);
}

TEST_CASE("CSV and JSON emission") {
  ResultTable t;
  t.schema = {{"distance", "m"}, {"label", "-"}, {"count", "-"}};
  CHECK(to_csv(t) == "distance[m],label[-],count[-]\n");
  t.add_row({1.5, std::string("plain"), 3L});
  t.add_row({0.1, std::string("with, comma \"q\""), -2L});
  t.add_row({NAN, std::string(""), 0L});
  CHECK_THROWS_AS(t.add_row({1.0}), std::exception);
  t.metadata["seed"] = 5;

  const std::string csv = to_csv(t);
  CHECK(csv ==
        "distance[m],label[-],count[-]\n"
        "1.5,plain,3\n"
        "0.1,\"with, comma \"\"q\"\"\",-2\n"
        "nan,,0\n");
  const ResultTable back = parse_csv(csv);
  REQUIRE(back.rows.size() == 3);
  CHECK(back.schema[0].name == "distance");
  CHECK(back.schema[0].unit == "m");
  CHECK(back.number(0, "distance") == 1.5);
  CHECK(std::get<std::string>(back.rows[1][1]) == "with, comma \"q\"");

  const auto j = nlohmann::json::parse(to_json(t));
  CHECK(j["schema"][1]["name"] == "label");
  CHECK(j["rows"][2][0].is_null());
  CHECK(j["rows"][0][2] == 3);
  CHECK(j["metadata"]["seed"] == 5);
}

TEST_CASE("a one-point QBER sweep matches the direct report") {
  Scenario s = parse_config_text(preset_text("thesis-ch2-fig2"));
  s.sweep.values = {100.0};
  const ResultTable t = run_command("qber-sweep", s);
  REQUIRE(t.rows.size() == 1);
  const LinkReport r = direct_link_report(s.link, 100.0);
  CHECK(t.number(0, "qber_upper") == r.qber_upper);
  CHECK(t.number(0, "mu") == r.mu);
  CHECK(t.number(0, "mu0") == r.mu0);
  CHECK(t.number(0, "path_loss") == r.path_loss);
  CHECK(t.metadata["schema_version"] == kTableSchema);
  CHECK(t.metadata["scenario_hash"] == scenario_hash(s));
}

TEST_CASE("relay-scan optimum agrees with a brute-force search") {
  Scenario s = parse_config_text(preset_text("thesis-ch3-fig2"));
  s.search.max_relays = 2;
  s.sweep.values = {50.0, 100.0};
  s.threads = 2;
  const ResultTable t = run_command("relay-scan", s);
  CHECK(t.rows.size() == 6);
  int best_K = 0;
  double best = 0.0;
  for (int K = 0; K <= 2; ++K) {
    const double d = relay_achievable_distance(K, Criterion::QberLimit, s.link, s.search.lo, s.search.hi);
    if (d > best) {
      best = d;
      best_K = K;
    }
  }
  CHECK(t.metadata["optimal_relay_count"] == best_K);
  CHECK(t.metadata["optimal_distance_m"] == best);
  LinkParams q = s.link;
  q.geometry.relay_count = 1;
  CHECK(t.number(3, "qber_upper") == relay_link_qber(q, 100.0));
}

TEST_CASE("tables do not depend on the thread count") {
  Scenario s = parse_config_text(preset_text("thesis-ch5-fig3"));
  s.sweep.values = {5.0, 25.0, 45.0, 65.0, 85.0};
  const std::string one = to_csv(run_command("decoy-rate", s));
  s.threads = 3;
  CHECK(to_csv(run_command("decoy-rate", s)) == one);
}

TEST_CASE("commands reject mismatched scenarios") {
  const Scenario mc = parse_config_text(preset_text("thesis-ch4-fig3"));
  CHECK_THROWS_AS(run_command("distance", mc), ConfigError);
  CHECK_THROWS_AS(run_command("no-such-command", mc), ConfigError);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(DomainError("x")) == 2);
  CHECK(exit_code_for(ConvergenceError("x", 0.0, 0.0)) == 3);
  CHECK(exit_code_for(BracketError("x")) == 4);
  CHECK(exit_code_for(std::runtime_error("x")) == 1);
}
