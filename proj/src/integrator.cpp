#include "alarmtaxis/integrator.hpp"

#include "alarmtaxis/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace alarmtaxis {

namespace {

double pow_sigma(double w, double sigma) {
    if (sigma == 2.0) return w * w;
    if (sigma == 1.0) return w;
    if (sigma == 3.0) return w * w * w;
    return std::pow(w, sigma);
}

void size_like(Derivative& d, int n) {
    d.du.assign(n, 0.0);
    d.dv.assign(n, 0.0);
    d.dw.assign(n, 0.0);
}

std::string step_error_message(StepError::Kind kind, char species, int cell,
                               double value, double t, double dt) {
    std::ostringstream os;
    os << (kind == StepError::Kind::negative_value ? "negative density"
                                                   : "non-finite value")
       << " in species " << species << " at cell " << cell << " (value " << value
       << ", t " << t << ", dt " << dt << ")";
    if (kind == StepError::Kind::negative_value)
        os << "; CFL violation, reduce cfl_safety or dt_max";
    return os.str();
}

} // namespace

StepError::StepError(Kind kind_, char species_, int cell_, double value_, double t_,
                     double dt_)
    : std::runtime_error(step_error_message(kind_, species_, cell_, value_, t_, dt_)),
      kind(kind_), species(species_), cell(cell_), value(value_), t(t_), dt(dt_) {}

void reaction_terms(const StateField& s, const ModelParams& p, Derivative& out) {
    const int n = static_cast<int>(s.u.size());
    size_like(out, n);
    for (int i = 0; i < n; ++i) {
        const double u = s.u[i], v = s.v[i], w = s.w[i];
        out.du[i] = p.r1 * u * (1.0 - u) - p.b1 * u * v - p.b3 * u * w;
        out.dv[i] = p.r2 * v * (1.0 - v) + u * v - p.b2 * v * w;
        out.dw[i] = p.r3 * w * (1.0 - pow_sigma(w, p.sigma)) + v * w + u * w;
    }
}

Derivative reaction_terms(const StateField& s, const ModelParams& p) {
    Derivative d;
    reaction_terms(s, p, d);
    return d;
}

namespace {

// Scratch-carrying stepper so run() does not allocate per step.
struct Stepper {
    Field uv;
    Derivative k;
    StateField stage;

    void eval_rhs(const StateField& s, const ModelParams& p, const Grid& g,
                  Derivative& out) {
        reaction_terms(s, p, out);
        add_laplacian(s.u, g, p.d1, out.du);
        add_laplacian(s.v, g, p.d2, out.dv);
        add_laplacian(s.w, g, 1.0, out.dw); // w always diffuses with coefficient 1
        if (p.xi != 0.0) add_taxis_divergence(s.v, s.u, p.xi, g, out.dv);
        if (p.chi != 0.0) {
            product_field(s.u, s.v, uv);
            add_taxis_divergence(s.w, uv, p.chi, g, out.dw);
        }
    }

    static void check(const StateField& s, double t, double dt) {
        const Field* fields[3] = {&s.u, &s.v, &s.w};
        const char names[3] = {'u', 'v', 'w'};
        for (int k = 0; k < 3; ++k) {
            const Field& f = *fields[k];
            for (size_t i = 0; i < f.size(); ++i) {
                if (!std::isfinite(f[i]))
                    throw StepError(StepError::Kind::nonfinite_value, names[k],
                                    static_cast<int>(i), f[i], t, dt);
                if (f[i] < 0.0)
                    throw StepError(StepError::Kind::negative_value, names[k],
                                    static_cast<int>(i), f[i], t, dt);
            }
        }
    }

    static void euler_into(const StateField& s, const Derivative& d, double dt,
                           StateField& out) {
        const size_t n = s.u.size();
        out.u.resize(n);
        out.v.resize(n);
        out.w.resize(n);
        for (size_t i = 0; i < n; ++i) out.u[i] = s.u[i] + dt * d.du[i];
        for (size_t i = 0; i < n; ++i) out.v[i] = s.v[i] + dt * d.dv[i];
        for (size_t i = 0; i < n; ++i) out.w[i] = s.w[i] + dt * d.dw[i];
        out.t = s.t + dt;
    }

    void advance(StateField& s, double dt, const ModelParams& p, const Grid& g,
                 Method method, StateField& next) {
        eval_rhs(s, p, g, k);
        euler_into(s, k, dt, next);
        check(next, s.t, dt);
        if (method == Method::rk2_ssp) {
            // next currently holds the Euler stage; finish the convex combination
            eval_rhs(next, p, g, k);
            euler_into(next, k, dt, stage);
            const size_t n = s.u.size();
            for (size_t i = 0; i < n; ++i) next.u[i] = 0.5 * s.u[i] + 0.5 * stage.u[i];
            for (size_t i = 0; i < n; ++i) next.v[i] = 0.5 * s.v[i] + 0.5 * stage.v[i];
            for (size_t i = 0; i < n; ++i) next.w[i] = 0.5 * s.w[i] + 0.5 * stage.w[i];
            next.t = s.t + dt;
            check(next, s.t, dt);
        }
        std::swap(s, next);
    }
};

} // namespace

void rhs(const StateField& s, const ModelParams& p, const Grid& g, Derivative& out) {
    Stepper ws;
    ws.eval_rhs(s, p, g, out);
}

Derivative rhs(const StateField& s, const ModelParams& p, const Grid& g) {
    Derivative d;
    rhs(s, p, g, d);
    return d;
}

double stable_dt(const StateField& s, const ModelParams& p, const Grid& g,
                 const StepConfig& cfg) {
    const double inf = std::numeric_limits<double>::infinity();
    const double h = g.min_h();
    const double dmax = std::max({p.d1, p.d2, 1.0});
    const double diffusive = h * h / (2.0 * g.dim * dmax);

    double speed = 0.0;
    if (p.xi != 0.0) speed = p.xi * max_face_gradient(s.u, g);
    if (p.chi != 0.0) {
        Field uv = product_field(s.u, s.v);
        speed = std::max(speed, p.chi * max_face_gradient(uv, g));
    }
    const double advective = speed > 0.0 ? h / speed : inf;

    double umax = 0.0, vmax = 0.0, wmax = 0.0;
    for (double x : s.u) umax = std::max(umax, x);
    for (double x : s.v) vmax = std::max(vmax, x);
    for (double x : s.w) wmax = std::max(wmax, x);
    const double lu = p.r1 * (1.0 + 2.0 * umax) + p.b1 * vmax + p.b3 * wmax;
    const double lv = p.r2 * (1.0 + 2.0 * vmax) + umax + p.b2 * wmax;
    const double lw = p.r3 * (1.0 + (p.sigma + 1.0) * pow_sigma(wmax, p.sigma)) + umax + vmax;
    const double rate = std::max({lu, lv, lw});
    const double reaction = rate > 0.0 ? 1.0 / rate : inf;

    const double dt = cfg.cfl_safety * std::min({diffusive, advective, reaction});
    return std::min(dt, cfg.dt_max);
}

StateField step(const StateField& s, double dt, const ModelParams& p, const Grid& g,
                Method method) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("step: dt must be positive and finite");
    Stepper ws;
    StateField cur = s;
    StateField next;
    ws.advance(cur, dt, p, g, method, next);
    return cur;
}

namespace {

void validate_initial(const StateField& s, const Grid& g) {
    if (static_cast<int>(s.u.size()) != g.cells() ||
        static_cast<int>(s.v.size()) != g.cells() ||
        static_cast<int>(s.w.size()) != g.cells())
        throw std::invalid_argument("run: initial state size does not match grid");
    const Field* fields[3] = {&s.u, &s.v, &s.w};
    const char names[3] = {'u', 'v', 'w'};
    for (int k = 0; k < 3; ++k) {
        bool any_positive = false;
        for (size_t i = 0; i < fields[k]->size(); ++i) {
            const double x = (*fields[k])[i];
            if (!std::isfinite(x) || x < 0.0)
                throw std::invalid_argument(
                    std::string("run: initial state has an invalid value in species ") +
                    names[k] + " at cell " + std::to_string(i));
            if (x > 0.0) any_positive = true;
        }
        if (!any_positive)
            throw std::invalid_argument(
                std::string("run: species ") + names[k] + " is identically zero");
    }
}

void validate_config(const StepConfig& cfg) {
    if (!(cfg.cfl_safety > 0.0) || cfg.cfl_safety > 1.0)
        throw std::invalid_argument("run: cfl_safety must lie in (0, 1]");
    if (!(cfg.dt_max > 0.0))
        throw std::invalid_argument("run: dt_max must be positive");
    if (!(cfg.t_end >= 0.0))
        throw std::invalid_argument("run: t_end must be nonnegative");
}

} // namespace

StateField run(const StateField& initial, const ModelParams& p, const Grid& g,
               const StepConfig& cfg, const Observer& observer, const RunOptions& opt) {
    validate_initial(initial, g);
    validate_config(cfg);
    if (opt.observer_cadence < 1)
        throw std::invalid_argument("run: observer cadence must be >= 1");

    // checkpoints plus t_end, deduplicated, strictly increasing
    std::vector<double> marks = opt.checkpoints;
    for (double c : marks)
        if (!(c >= 0.0) || c > cfg.t_end)
            throw std::invalid_argument("run: checkpoint outside [0, t_end]");
    marks.push_back(cfg.t_end);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

    StateField state = initial;
    state.t = 0.0;
    if (observer) observer(state);
    if (cfg.t_end == 0.0) return state;

    Stepper ws;
    StateField scratch;
    size_t next_mark = 0;
    while (next_mark < marks.size() && marks[next_mark] <= 0.0) ++next_mark;

    long steps = 0;
    while (next_mark < marks.size()) {
        const double target = marks[next_mark];
        double dt = stable_dt(state, p, g, cfg);
        bool lands = false;
        if (state.t + dt >= target - 1e-12 * std::max(1.0, target)) {
            dt = target - state.t;
            lands = true;
        }
        if (!(dt > 0.0) || dt < 1e-15 * std::max(1.0, state.t))
            throw std::runtime_error("run: time step underflow at t = " +
                                     std::to_string(state.t));
        ws.advance(state, dt, p, g, cfg.method, scratch);
        if (lands) state.t = target; // kill accumulation drift on marks
        ++steps;
        if (steps > opt.max_steps)
            throw std::runtime_error("run: exceeded max step count");
        if (observer && (lands || steps % opt.observer_cadence == 0))
            observer(state);
        if (lands) ++next_mark;
    }
    return state;
}

} // namespace alarmtaxis
