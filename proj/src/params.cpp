#include "alarmtaxis/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alarmtaxis {

bool ModelParams::unit_rates() const {
    return r1 == 1.0 && r2 == 1.0 && r3 == 1.0;
}

std::string validate_params(const ModelParams& p, bool allow_unverified) {
    struct Named { const char* name; double value; };
    const Named strictly_positive[] = {
        {"d1", p.d1}, {"d2", p.d2}, {"r1", p.r1}, {"r2", p.r2}, {"r3", p.r3},
        {"b1", p.b1}, {"b2", p.b2}, {"b3", p.b3}, {"sigma", p.sigma},
    };
    for (const auto& f : strictly_positive) {
        if (!(f.value > 0.0) || !std::isfinite(f.value))
            return std::string(f.name) + " must be strictly positive";
    }
    // Taxis coefficients may vanish (pure diffusion limits are legitimate runs).
    if (!(p.xi >= 0.0) || !std::isfinite(p.xi)) return "xi must be nonnegative";
    if (!(p.chi >= 0.0) || !std::isfinite(p.chi)) return "chi must be nonnegative";
    if (!allow_unverified && !(p.sigma > 1.0))
        return "sigma must exceed 1 for verified runs";
    return {};
}

HypothesisReport validate_hypothesis(const ModelParams& p) {
    HypothesisReport r;
    r.margin_b1 = 1.0 - p.b1;
    r.margin_b3 = p.b1 * p.b2 - p.b3;
    r.margin_sum = 0.5 - (p.b2 + p.b3);
    const double g = p.b1 * p.b2 - p.b3;
    r.margin_stability = 4.0 * p.b2 * p.b3 - g * g;
    r.b1_le_one = r.margin_b1 >= 0.0;
    r.b3_lt_b1b2 = r.margin_b3 > 0.0;
    r.sum_le_half = r.margin_sum >= 0.0;
    r.stability = r.margin_stability > 0.0;
    return r;
}

double Residual::max_abs() const {
    return std::max({std::abs(r1), std::abs(r2), std::abs(r3)});
}

Residual steady_state_residual(const SteadyState& s, const ModelParams& p) {
    return {
        s.u_star + p.b1 * s.v_star + p.b3 * s.w_star - 1.0,
        -s.u_star + s.v_star + p.b2 * s.w_star - 1.0,
        std::pow(s.w_star, p.sigma) - s.u_star - s.v_star - 1.0,
    };
}

double steady_state_j(double w, const ModelParams& p) {
    const double c = p.b2 + 2.0 * p.b3 - p.b1 * p.b2;
    return (p.b1 + 1.0) * std::pow(w, p.sigma) + c * w - 4.0;
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::ok: return "ok";
        case SolveStatus::needs_unit_rates: return "steady-state analysis requires unit growth rates";
        case SolveStatus::no_bracket: return "could not bracket the root of J";
        case SolveStatus::not_converged: return "|J| tolerance not reached";
        case SolveStatus::nonpositive_component: return "steady state has a non-positive component";
    }
    return "unknown";
}

SteadySolve solve_steady_state(const ModelParams& p, double tol,
                               double initial_hi, double bracket_growth) {
    SteadySolve out;
    if (!p.unit_rates()) {
        out.status = SolveStatus::needs_unit_rates;
        return out;
    }
    const HypothesisReport hyp = validate_hypothesis(p);
    out.hypothesis_verified = hyp.structural();

    double lo = 0.0;                 // J(0) = -4
    double hi = std::max(initial_hi, 1e-8);
    if (bracket_growth < 1.0 + 1e-9) bracket_growth = 2.0;
    int expansions = 0;
    while (steady_state_j(hi, p) <= 0.0) {
        hi *= bracket_growth;
        if (++expansions > 200 || !std::isfinite(hi)) {
            out.status = SolveStatus::no_bracket;
            return out;
        }
    }
    out.bracket_lo = lo;
    out.bracket_hi = hi;

    double w = 0.5 * (lo + hi);
    double jw = steady_state_j(w, p);
    int it = 0;
    // bisect to machine width; J is evaluated once per iteration
    while (hi - lo > std::numeric_limits<double>::epsilon() * std::max(1.0, hi) && it < 300) {
        if (jw <= 0.0) lo = w; else hi = w;
        w = 0.5 * (lo + hi);
        jw = steady_state_j(w, p);
        ++it;
    }
    out.iterations = it;
    out.j_residual = std::abs(jw);
    if (out.j_residual > tol) {
        out.status = SolveStatus::not_converged;
        return out;
    }

    out.state.w_star = w;
    out.state.u_star = ((1.0 - p.b1) - (p.b3 - p.b1 * p.b2) * w) / (p.b1 + 1.0);
    out.state.v_star = (2.0 - (p.b2 + p.b3) * w) / (p.b1 + 1.0);
    if (!(out.state.u_star > 0.0) || !(out.state.v_star > 0.0) || !(out.state.w_star > 0.0)) {
        out.status = SolveStatus::nonpositive_component;
        return out;
    }
    out.status = SolveStatus::ok;
    return out;
}

} // namespace alarmtaxis
