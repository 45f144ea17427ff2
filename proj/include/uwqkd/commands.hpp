#pragma once

#include <string>
#include <vector>

#include "uwqkd/config.hpp"
#include "uwqkd/table.hpp"

namespace uwqkd {

inline constexpr const char* kTableSchema = "uwqkd-table/1";
inline constexpr const char* kToolVersion = "0.1.0";

std::vector<std::string> command_names();

// Runs one subcommand on a scenario. Output depends only on the scenario
// contents and seed, never on the thread count.
ResultTable run_command(const std::string& command, const Scenario& scenario);

ResultTable qber_sweep(const Scenario& s);
ResultTable skr_sweep(const Scenario& s);
ResultTable decoy_rate(const Scenario& s);
ResultTable distance_table(const Scenario& s);
ResultTable relay_scan(const Scenario& s);
ResultTable mc_run(const Scenario& s);
ResultTable gate_opt(const Scenario& s);
ResultTable validate_wsf(const Scenario& s);

// FNV-1a over the canonical form with the thread count normalised.
std::string scenario_hash(const Scenario& s);

// Process exit status for an exception escaping run_command.
int exit_code_for(const std::exception& e);

}  // namespace uwqkd
