#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uwqkd/commands.hpp"
#include "uwqkd/errors.hpp"

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::string format = "csv";
  long long seed = -1;
  int threads = 0;
};

int threads_from_env() {
  const char* v = std::getenv("UWQKD_THREADS");
  if (!v || !*v) return 0;
  try {
    int n = std::stoi(v);
    if (n < 1) throw std::invalid_argument("");
    return n;
  } catch (const std::exception&) {
    throw uwqkd::ConfigError(std::string("UWQKD_THREADS must be a positive integer, got '") + v + "'");
  }
}

const char* describe(const std::string& name) {
  if (name == "qber-sweep") return "QBER upper bound along the sweep variable";
  if (name == "skr-sweep") return "secret key rate lower bound along the sweep variable";
  if (name == "decoy-rate") return "decoy-state key rate versus distance";
  if (name == "distance") return "largest distance meeting the QBER and key rate criteria";
  if (name == "relay-scan") return "achievable distance per relay count and the best count";
  if (name == "mc-run") return "Monte Carlo photon transport: received weight, ToA and AoA";
  if (name == "gate-opt") return "Monte Carlo QBER versus gate time and the optimal gate";
  if (name == "validate-wsf") return "closed-form versus numeric wave structure function";
  return "";
}

int run(const std::string& command, const Options& opt) {
  uwqkd::Overrides overrides;
  for (const auto& s : opt.sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw uwqkd::ConfigError("--set " + s + ": expected section.key=value");
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (opt.seed >= 0) overrides.emplace_back("run.seed", std::to_string(opt.seed));
  int threads = opt.threads > 0 ? opt.threads : threads_from_env();
  if (threads > 0) overrides.emplace_back("run.threads", std::to_string(threads));

  const uwqkd::Scenario scenario = uwqkd::parse_config(opt.config, overrides);
  const uwqkd::ResultTable table = uwqkd::run_command(command, scenario);
  const std::string text = opt.format == "json" ? uwqkd::to_json(table) : uwqkd::to_csv(table);

  if (opt.out.empty() || opt.out == "-") {
    std::cout << text;
    std::cout.flush();
    return 0;
  }
  std::ofstream f(opt.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output '" + opt.out + "'");
  f << text;
  if (!f) throw std::runtime_error("write failed for '" + opt.out + "'");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Underwater QKD link budgets, relay planning and Monte Carlo channel studies"};
  app.require_subcommand(1);
  Options opt;
  std::string chosen;

  for (const auto& name : uwqkd::command_names()) {
    auto* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", opt.config, "scenario file or preset name")->required();
    sub->add_option("--set", opt.sets, "override, section.key=value")->allow_extra_args(false);
    sub->add_option("--out", opt.out, "output path, stdout when omitted");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", opt.seed, "random seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", opt.threads, "worker threads (default UWQKD_THREADS)")->check(CLI::PositiveNumber);
    sub->callback([&chosen, name] { chosen = name; });
  }
  app.add_subcommand("presets", "list built-in presets")->callback([&chosen] { chosen = "presets"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (chosen == "presets") {
    for (const auto& p : uwqkd::preset_names()) std::cout << p << "\n";
    return 0;
  }
  try {
    return run(chosen, opt);
  } catch (const uwqkd::ConvergenceError& e) {
    std::cerr << "uwqkd: " << e.what() << " (best estimate " << e.best_estimate() << ", error "
              << e.error_estimate() << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "uwqkd: " << e.what() << "\n";
    return uwqkd::exit_code_for(e);
  }
}
