#pragma once

#include "alarmtaxis/grid.hpp"
#include "alarmtaxis/params.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace alarmtaxis {

enum class Method { explicit_euler, rk2_ssp };

struct StepConfig {
    double cfl_safety = 0.45; // in (0, 1]; see README for the positivity budget
    double dt_max = 0.05;
    double t_end = 10.0;
    Method method = Method::rk2_ssp;
};

struct Derivative {
    Field du, dv, dw;
};

// Kinetics: fu = r1 u(1-u) - b1 uv - b3 uw
//           fv = r2 v(1-v) + uv - b2 vw
//           fw = r3 w(1-w^sigma) + vw + uw
void reaction_terms(const StateField& s, const ModelParams& p, Derivative& out);
Derivative reaction_terms(const StateField& s, const ModelParams& p);

// Full semi-discrete right-hand side: diffusion + taxis transport + kinetics.
// v drifts up prey gradients (coefficient xi), w up alarm-signal gradients
// (coefficient chi, signal = u*v).
void rhs(const StateField& s, const ModelParams& p, const Grid& g, Derivative& out);
Derivative rhs(const StateField& s, const ModelParams& p, const Grid& g);

// cfl_safety * min(diffusive, advective, reaction limit), capped at dt_max.
//   diffusive: h^2 / (2 dim max(d1, d2, 1))
//   advective: h / max face speed, speed = max(xi |grad u|, chi |grad uv|)
//   reaction:  1 / (max diagonal kinetics derivative bound at current maxima)
double stable_dt(const StateField& s, const ModelParams& p, const Grid& g,
                 const StepConfig& cfg);

// Raised when a proposed state carries a negative or non-finite value; the
// scheme must stay positive under a compliant dt, so this signals a CFL
// violation (or corrupt input), never something to clip away.
class StepError : public std::runtime_error {
public:
    enum class Kind { negative_value, nonfinite_value };

    StepError(Kind kind, char species, int cell, double value, double t, double dt);

    Kind kind;
    char species; // 'u', 'v' or 'w'
    int cell;
    double value;
    double t;     // time at the start of the offending step
    double dt;
};

// One accepted step (Euler or SSP-RK2 built from Euler stages). Returns the
// new state with t advanced by dt. Stage states are checked like final ones.
StateField step(const StateField& s, double dt, const ModelParams& p, const Grid& g,
                Method method = Method::rk2_ssp);

using Observer = std::function<void(const StateField&)>;

struct RunOptions {
    int observer_cadence = 10;        // observer fires every N accepted steps
    std::vector<double> checkpoints;  // times in [0, t_end] the run lands on exactly
    long max_steps = 200'000'000;     // dt-underflow guard
};

// Integrates to exactly cfg.t_end. The observer also fires on the initial
// state, on every checkpoint and on the final state. The initial state must be
// nonnegative, finite, and no species may be identically zero.
StateField run(const StateField& initial, const ModelParams& p, const Grid& g,
               const StepConfig& cfg, const Observer& observer = {},
               const RunOptions& opt = {});

} // namespace alarmtaxis
