#pragma once

#include "alarmtaxis/diagnostics.hpp"
#include "alarmtaxis/grid.hpp"
#include "alarmtaxis/integrator.hpp"
#include "alarmtaxis/params.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace alarmtaxis {

// Parse errors carry the 1-based line (0 when not tied to a line); validation
// errors carry the dotted field name instead.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string msg, int line = 0, std::string field = {});
    int line;
    std::string field;
};

enum class InitialKind { constant, steady_perturb, gaussian, random_smooth };

const char* to_string(InitialKind k);

struct InitialSpec {
    InitialKind kind = InitialKind::steady_perturb;
    double u0 = 1.0, v0 = 1.0, w0 = 1.0; // constant values / gaussian baseline
    double amplitude = 0.1;              // relative for steady_perturb, absolute bump height for gaussian
    int mode = 1;                        // highest cosine mode in perturbation shapes
    unsigned long seed = 1;
    double width = 0.1;                  // gaussian width as a fraction of the domain
};

struct GridSpec {
    int dim = 1;
    int nx = 64, ny = 64;
    double lx = 1.0, ly = 1.0;

    Grid build() const;
};

struct OutputSpec {
    std::string dir = "out";
    int cadence = 10;                    // observer fires every N accepted steps
    std::vector<double> snapshot_times;  // within [0, t_end], landed on exactly
};

struct FitSpec {
    // negative means "use the default window [t_end/2, t_end]"
    double window_lo = -1.0;
    double window_hi = -1.0;
};

struct SweepSpec {
    // (dotted config key, list of raw values), Cartesian product in file order
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    int threads = 0; // 0: hardware concurrency
};

struct ExperimentConfig {
    ModelParams params;
    bool allow_unverified = false;
    GridSpec grid;
    InitialSpec initial;
    StepConfig step;
    OutputSpec output;
    FitSpec fit;
    SweepSpec sweep;
};

// Flat INI-style grammar: [section] headers, key = value lines, # comments,
// unknown sections/keys rejected with the offending line number.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Applies one "section.key=value" override (the --set mechanism). Runs after
// file parsing, before validation.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Canonical text form of a config; parse_config_text(serialize_config(c))
// reproduces c exactly. Written into each run directory for provenance.
std::string serialize_config(const ExperimentConfig& cfg);

// Semantic validation; throws ConfigError naming the offending field.
void validate_experiment(const ExperimentConfig& cfg);

// Deterministic initial data (fixed seed => identical state).
// steady_perturb solves the coexistence state internally and therefore
// requires unit growth rates.
StateField make_initial_state(const InitialSpec& spec, const Grid& g, const ModelParams& p);

// timeseries.csv: header row with the documented record columns, one row per
// record, every value with 17 significant digits. Refuses an empty record list
// before touching the file.
void write_timeseries(const std::string& path, const std::vector<DiagnosticsRecord>& records);
std::vector<DiagnosticsRecord> read_timeseries(const std::string& path);

// Snapshot CSV: one '#' header line carrying t, grid metadata and the column
// list, then one row per cell (row major, x fastest).
void write_snapshot(const std::string& path, const StateField& s, const Grid& g);

struct Snapshot {
    Grid grid;
    StateField state;
};
Snapshot read_snapshot(const std::string& path);

// Writes <run_dir>/plots.gp (decay + fitted line, energy, norm histories)
// referencing the CSVs by relative path. Deterministic, safe to re-run.
// Throws ConfigError when <run_dir>/timeseries.csv is missing.
std::string emit_plot_script(const std::string& run_dir);

struct RunResult {
    SteadySolve steady;
    HypothesisReport hypothesis;
    std::vector<DiagnosticsRecord> records;
    StateField final_state;

    bool fit_ok = false;
    DecayFit fit;
    std::string fit_error;

    double max_u = 0.0; // maxima attained over the recorded history
    double max_v = 0.0;
    bool b_positive_definite_at_maxima = false;
    double xi_max_pd = 0.0;  // largest xi keeping B positive definite at the maxima
    double chi_max_pd = 0.0; // same for chi (each with the other at its configured value)

    std::string timeseries_path;
    std::vector<std::string> snapshot_paths;
    std::string plot_script_path;
};

// Full pipeline: steady state, initial data, integration with diagnostics
// observer, optional file outputs into cfg.output.dir. Assumes the config was
// validated. Throws std::runtime_error for domain failures (non-unit rates,
// CFL violation, ...).
RunResult run_experiment(const ExperimentConfig& cfg, bool write_outputs = true);

// Largest coefficient value (bisection to rel. 1e-10) for which matrix_B stays
// positive definite at the given density values, varying one coefficient and
// holding the rest of params fixed. Returns 0 when even 0 fails, infinity when
// no finite threshold exists.
double max_pd_coefficient(const ModelParams& p, const SteadyState& ss, double u_val,
                          double v_val, bool vary_xi);

std::string format_value(double x); // 17 significant digits, shared by all writers

} // namespace alarmtaxis
