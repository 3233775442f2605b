#include "alarmtaxis/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <streambuf>

namespace {

struct NullBuf : std::streambuf {
    int overflow(int c) override { return c; }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-volume simulation and analysis of a three-species "
                 "alarm-taxis predator-prey system"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    bool quiet = false;
    app.add_option("--config", config_path, "experiment config file (INI-style sections)");
    app.add_option("--set", overrides, "override a config value, e.g. --set params.b2=0.35")
        ->type_size(1);
    app.add_option("--out", out_dir, "output directory, overrides output.dir");
    app.add_flag("--quiet,-q", quiet, "suppress console output");

    auto* c_check = app.add_subcommand(
        "check-params", "verify the structural hypothesis and stability margins");
    auto* c_steady = app.add_subcommand(
        "steady-state", "solve the coexistence steady state and report residuals");
    auto* c_sim = app.add_subcommand(
        "simulate", "integrate the system and write diagnostics, snapshots and plots");
    auto* c_fit = app.add_subcommand(
        "fit-decay", "fit an exponential decay rate to an existing run's timeseries");
    auto* c_sweep = app.add_subcommand(
        "sweep", "Cartesian parameter sweep with one run directory per point");
    for (auto* sc : {c_check, c_steady, c_sim, c_fit, c_sweep}) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? alarmtaxis::exit_ok : alarmtaxis::exit_usage;
    }

    if ((c_sim->parsed() || c_fit->parsed() || c_sweep->parsed()) && config_path.empty()) {
        std::cerr << "error: this subcommand requires --config PATH\n";
        return alarmtaxis::exit_usage;
    }

    alarmtaxis::ExperimentConfig cfg;
    try {
        cfg = alarmtaxis::load_config(config_path, overrides, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return alarmtaxis::exit_usage;
    }

    NullBuf null_buf;
    std::ostream null_stream(&null_buf);
    std::ostream& out = quiet ? null_stream : std::cout;

    if (c_check->parsed()) return alarmtaxis::cmd_check_params(cfg, out);
    if (c_steady->parsed()) return alarmtaxis::cmd_steady_state(cfg, out);
    if (c_sim->parsed()) return alarmtaxis::cmd_simulate(cfg, out);
    if (c_fit->parsed()) return alarmtaxis::cmd_fit_decay(cfg, out);
    if (c_sweep->parsed()) return alarmtaxis::cmd_sweep(cfg, out);
    return alarmtaxis::exit_usage;
}
