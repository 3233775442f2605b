#pragma once

#include <string>

namespace alarmtaxis {

// Three-species alarm-taxis predator-prey model. u: prey, v: mesopredator
// (taxis toward prey gradients, coefficient xi), w: top predator (taxis toward
// gradients of the alarm signal u*v, coefficient chi). w always diffuses with
// unit coefficient.
struct ModelParams {
    double d1 = 1.0;      // prey diffusion
    double d2 = 1.0;      // mesopredator diffusion
    double xi = 0.05;     // prey-taxis coefficient, >= 0
    double chi = 0.05;    // alarm-taxis coefficient, >= 0
    double r1 = 1.0;      // logistic growth rates
    double r2 = 1.0;
    double r3 = 1.0;
    double b1 = 0.5;      // predation coefficients
    double b2 = 0.4;
    double b3 = 0.1;
    double sigma = 2.0;   // top-predator crowding exponent, > 1 in the verified regime

    bool unit_rates() const;
};

// Validates positivity and (unless allow_unverified) sigma > 1.
// Returns an empty string when valid, else a message naming the field.
std::string validate_params(const ModelParams& p, bool allow_unverified = false);

// Structural conditions on (b1, b2, b3). Margins are signed: >= 0 (or > 0 for
// the strict checks) means pass. Booleans are exactly the sign tests.
struct HypothesisReport {
    bool b1_le_one = false;       // b1 <= 1
    bool b3_lt_b1b2 = false;      // b3 < b1*b2            (strict)
    bool sum_le_half = false;     // b2 + b3 <= 1/2
    bool stability = false;       // (b1*b2 - b3)^2 < 4*b2*b3  (strict)

    double margin_b1 = 0.0;       // 1 - b1
    double margin_b3 = 0.0;       // b1*b2 - b3
    double margin_sum = 0.0;      // 1/2 - (b2 + b3)
    double margin_stability = 0.0;// 4*b2*b3 - (b1*b2 - b3)^2

    bool structural() const { return b1_le_one && b3_lt_b1b2 && sum_le_half; }
    bool all() const { return structural() && stability; }
};

HypothesisReport validate_hypothesis(const ModelParams& p);

// Spatially constant coexistence state. Only meaningful for unit growth rates.
struct SteadyState {
    double u_star = 0.0;
    double v_star = 0.0;
    double w_star = 0.0;
};

// Residuals of the three algebraic steady-state equations:
//   u + b1 v + b3 w - 1,  -u + v + b2 w - 1,  w^sigma - u - v - 1
struct Residual {
    double r1, r2, r3;
    double max_abs() const;
};

Residual steady_state_residual(const SteadyState& s, const ModelParams& p);

enum class SolveStatus {
    ok,
    needs_unit_rates,        // r1, r2, r3 must all equal 1
    no_bracket,              // bracket expansion exhausted without a sign change
    not_converged,           // |J(w)| stayed above tol at machine-width bracket
    nonpositive_component,   // solved w but u* or v* <= 0 (hypothesis violated)
};

const char* to_string(SolveStatus s);

struct SteadySolve {
    SteadyState state{};
    SolveStatus status = SolveStatus::ok;
    bool hypothesis_verified = false; // structural hypothesis held, so the root is
                                      // the unique one and components are positive
    int iterations = 0;
    double j_residual = 0.0;          // |J(w*)| at the returned root
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;

    bool ok() const { return status == SolveStatus::ok; }
};

// w-reduction of the steady-state system: J(w) = (b1+1) w^sigma + (b2 + 2 b3 - b1 b2) w - 4.
// J(0) = -4; under the structural hypothesis J is strictly increasing and the
// root lies below 4.
double steady_state_j(double w, const ModelParams& p);

// Bisection on J over [0, initial_hi], doubling the upper end by bracket_growth
// until J > 0 there. tol applies to |J(w*)|.
SteadySolve solve_steady_state(const ModelParams& p, double tol = 1e-12,
                               double initial_hi = 4.0, double bracket_growth = 2.0);

} // namespace alarmtaxis
