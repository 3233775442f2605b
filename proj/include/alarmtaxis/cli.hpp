#pragma once

#include "alarmtaxis/experiment.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace alarmtaxis {

inline constexpr int exit_ok = 0;     // success
inline constexpr int exit_domain = 1; // domain failure: hypothesis, solver, step, fit
inline constexpr int exit_usage = 2;  // usage or config failure

// Effective config: optional file, then --set overrides in order, then the
// --out directory override, then validation. Throws ConfigError.
ExperimentConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& overrides,
                             const std::string& out_dir);

// Subcommands write their report to `out` and return an exit code. They assume
// a validated config (load_config), so failures here are domain failures.
int cmd_check_params(const ExperimentConfig& cfg, std::ostream& out);
int cmd_steady_state(const ExperimentConfig& cfg, std::ostream& out);
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out);
int cmd_fit_decay(const ExperimentConfig& cfg, std::ostream& out);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out);

} // namespace alarmtaxis
