#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "alarmtaxis/integrator.hpp"
#include "alarmtaxis/operators.hpp"
#include "alarmtaxis/params.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

using namespace alarmtaxis;

namespace {

const double pi = std::acos(-1.0);

StateField smooth_state(const Grid& g, double ub, double vb, double wb, double amp) {
    StateField s = make_state(g, 0.0, 0.0, 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int c = g.idx(i, j);
            const double m = std::cos(pi * g.x_center(i) / g.lx);
            s.u[c] = ub * (1.0 + amp * m);
            s.v[c] = vb * (1.0 - amp * m);
            s.w[c] = wb * (1.0 + 0.5 * amp * m);
        }
    return s;
}

double total(const Field& f) {
    double s = 0.0;
    for (double x : f) s += x;
    return s;
}

double state_max_diff(const StateField& a, const StateField& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.u.size(); ++i) {
        m = std::max(m, std::abs(a.u[i] - b.u[i]));
        m = std::max(m, std::abs(a.v[i] - b.v[i]));
        m = std::max(m, std::abs(a.w[i] - b.w[i]));
    }
    return m;
}

} // namespace

TEST_CASE("reactions vanish on the zero state and on the coexistence state") {
    const Grid g = Grid::line(8, 1.0);
    const ModelParams p;
    {
        const StateField s = make_state(g, 0.0, 0.0, 0.0);
        const Derivative d = reaction_terms(s, p);
        for (int c = 0; c < g.cells(); ++c) {
            CHECK(d.du[c] == 0.0);
            CHECK(d.dv[c] == 0.0);
            CHECK(d.dw[c] == 0.0);
        }
    }
    {
        const SteadySolve sol = solve_steady_state(p);
        REQUIRE(sol.ok());
        const StateField s =
            make_state(g, sol.state.u_star, sol.state.v_star, sol.state.w_star);
        const Derivative d = reaction_terms(s, p);
        for (int c = 0; c < g.cells(); ++c) {
            CHECK(std::abs(d.du[c]) < 1e-12);
            CHECK(std::abs(d.dv[c]) < 1e-12);
            CHECK(std::abs(d.dw[c]) < 1e-12);
        }
    }
}

TEST_CASE("reaction terms reproduce the written-out kinetics") {
    const Grid g = Grid::line(4, 1.0);
    ModelParams p;
    p.r1 = 1.3; p.r2 = 0.7; p.r3 = 1.1;
    p.b1 = 0.45; p.b2 = 0.35; p.b3 = 0.15;
    p.sigma = 2.5;
    StateField s = make_state(g, 0.8, 1.2, 0.6);
    const Derivative d = reaction_terms(s, p);
    const double u = 0.8, v = 1.2, w = 0.6;
    CHECK(d.du[0] ==
          doctest::Approx(1.3 * u * (1 - u) - 0.45 * u * v - 0.15 * u * w).epsilon(1e-14));
    CHECK(d.dv[0] ==
          doctest::Approx(0.7 * v * (1 - v) + u * v - 0.35 * v * w).epsilon(1e-14));
    CHECK(d.dw[0] ==
          doctest::Approx(1.1 * w * (1 - std::pow(w, 2.5)) + v * w + u * w).epsilon(1e-14));
}

TEST_CASE("transport terms do not change cell sums of the right-hand side") {
    const Grid g = Grid::rect(16, 12, 1.0, 0.8);
    ModelParams p;
    p.xi = 0.4;
    p.chi = 0.3;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d01(0.1, 2.0);
    StateField s = make_state(g, 0.0, 0.0, 0.0);
    for (int c = 0; c < g.cells(); ++c) {
        s.u[c] = d01(rng);
        s.v[c] = d01(rng);
        s.w[c] = d01(rng);
    }
    const Derivative full = rhs(s, p, g);
    const Derivative react = reaction_terms(s, p);
    const double scale = std::max({1.0, std::abs(total(react.du)),
                                   std::abs(total(react.dv)), std::abs(total(react.dw))});
    CHECK(std::abs(total(full.du) - total(react.du)) < 1e-11 * scale);
    CHECK(std::abs(total(full.dv) - total(react.dv)) < 1e-11 * scale);
    CHECK(std::abs(total(full.dw) - total(react.dw)) < 1e-11 * scale);
}

TEST_CASE("prey-only dynamics match an independently coded Fisher-KPP stepper") {
    // With v = w = 0 and no taxis the u equation decouples into
    // u_t = d1 u_xx + r1 u (1 - u). The oracle below is written from scratch
    // with ghost-cell reflection instead of flux form.
    const int n = 32;
    const Grid g = Grid::line(n, 1.0);
    ModelParams p;
    p.d1 = 0.7;
    p.r1 = 1.4;
    p.xi = 0.0;
    p.chi = 0.0;

    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) u[i] = 0.2 + 0.1 * std::cos(pi * g.x_center(i));

    StateField s = make_state(g, 0.0, 0.0, 0.0);
    s.u = u;

    const double dt = 2e-4;
    const int steps = 500;
    for (int step_i = 0; step_i < steps; ++step_i) {
        std::vector<double> next(n);
        for (int i = 0; i < n; ++i) {
            const double left = i == 0 ? u[0] : u[i - 1];     // reflected ghosts
            const double right = i == n - 1 ? u[n - 1] : u[i + 1];
            const double lap = (left - 2.0 * u[i] + right) / (g.hx * g.hx);
            next[i] = u[i] + dt * (p.d1 * lap + p.r1 * u[i] * (1.0 - u[i]));
        }
        u = next;
        s = step(s, dt, p, g, Method::explicit_euler);
    }
    for (int i = 0; i < n; ++i) CHECK(s.u[i] == doctest::Approx(u[i]).epsilon(1e-11));
    for (int i = 0; i < n; ++i) CHECK(s.v[i] == 0.0);
    for (int i = 0; i < n; ++i) CHECK(s.w[i] == 0.0);
    CHECK(s.t == doctest::Approx(steps * dt).epsilon(1e-12));
}

TEST_CASE("steps from random positive states stay positive under the advertised dt") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d01(0.0, 1.0);
    const Grid g = Grid::line(32, 1.0);
    ModelParams p;
    p.xi = 0.25;
    p.chi = 0.25;
    StepConfig cfg; // default cfl_safety
    for (int rep = 0; rep < 200; ++rep) {
        StateField s = make_state(g, 0.0, 0.0, 0.0);
        for (int c = 0; c < g.cells(); ++c) {
            s.u[c] = 2.0 * d01(rng);
            s.v[c] = 2.0 * d01(rng);
            s.w[c] = 1.5 * d01(rng);
        }
        const double dt = stable_dt(s, p, g, cfg);
        REQUIRE(dt > 0.0);
        const Method m = rep % 2 == 0 ? Method::explicit_euler : Method::rk2_ssp;
        const StateField next = step(s, dt, p, g, m); // throws on any negative cell
        for (int c = 0; c < g.cells(); ++c) {
            CHECK(next.u[c] >= 0.0);
            CHECK(next.v[c] >= 0.0);
            CHECK(next.w[c] >= 0.0);
        }
    }
}

TEST_CASE("the coexistence state is a discrete fixed point") {
    const ModelParams p; // default taxis coefficients are active
    const SteadySolve sol = solve_steady_state(p);
    REQUIRE(sol.ok());
    const Grid g = Grid::line(24, 1.0);
    const StateField s = make_state(g, sol.state.u_star, sol.state.v_star, sol.state.w_star);

    const Derivative d = rhs(s, p, g);
    for (int c = 0; c < g.cells(); ++c) {
        CHECK(std::abs(d.du[c]) < 1e-12);
        CHECK(std::abs(d.dv[c]) < 1e-12);
        CHECK(std::abs(d.dw[c]) < 1e-12);
    }

    StepConfig cfg;
    cfg.t_end = 1.0;
    const StateField end = run(s, p, g, cfg);
    const StateField ref = make_state(g, sol.state.u_star, sol.state.v_star, sol.state.w_star);
    CHECK(state_max_diff(end, ref) < 1e-10);
}

TEST_CASE("explicit Euler conserves the discrete mass budget exactly up to rounding") {
    const Grid g = Grid::line(48, 1.0);
    ModelParams p;
    p.xi = 0.2;
    p.chi = 0.2;
    const StateField s = smooth_state(g, 0.6, 0.8, 0.9, 0.3);
    const double dt = 1e-4;
    const StateField next = step(s, dt, p, g, Method::explicit_euler);
    const Derivative react = reaction_terms(s, p);
    CHECK(total(next.u) - total(s.u) ==
          doctest::Approx(dt * total(react.du)).epsilon(1e-10));
    CHECK(total(next.v) - total(s.v) ==
          doctest::Approx(dt * total(react.dv)).epsilon(1e-10));
    CHECK(total(next.w) - total(s.w) ==
          doctest::Approx(dt * total(react.dw)).epsilon(1e-10));
}

TEST_CASE("prey stays below the comparison ceiling along a run") {
    const Grid g = Grid::line(64, 1.0);
    const ModelParams p;
    StateField s = smooth_state(g, 1.2, 0.9, 1.0, 0.4); // max u0 = 1.68 > 1
    double u0max = 0.0;
    for (double x : s.u) u0max = std::max(u0max, x);
    const double ceiling = std::max(1.0, u0max) + 1e-6;

    StepConfig cfg;
    cfg.t_end = 5.0;
    bool ok = true;
    run(s, p, g, cfg, [&](const StateField& st) {
        for (double x : st.u) ok = ok && x <= ceiling;
    }, RunOptions{1, {}, 200'000'000});
    CHECK(ok);
}

TEST_CASE("explicit Euler self-converges at first order in dt") {
    const Grid g = Grid::line(32, 1.0);
    ModelParams p;
    p.xi = 0.2;
    p.chi = 0.2;
    const StateField s0 = smooth_state(g, 0.5, 0.8, 1.1, 0.2);
    const double T = 0.125;
    auto integrate = [&](int nsteps, Method m) {
        StateField s = s0;
        const double dt = T / nsteps;
        for (int i = 0; i < nsteps; ++i) s = step(s, dt, p, g, m);
        return s;
    };
    const StateField a = integrate(512, Method::explicit_euler);
    const StateField b = integrate(1024, Method::explicit_euler);
    const StateField c = integrate(2048, Method::explicit_euler);
    const double e1 = state_max_diff(a, b), e2 = state_max_diff(b, c);
    REQUIRE(e2 > 0.0);
    CHECK(e1 / e2 > 1.7);
    CHECK(e1 / e2 < 2.4);
}

TEST_CASE("SSP-RK2 self-converges at second order in dt") {
    const Grid g = Grid::line(32, 1.0);
    ModelParams p;
    p.xi = 0.2;
    p.chi = 0.2;
    const StateField s0 = smooth_state(g, 0.5, 0.8, 1.1, 0.2);
    const double T = 0.125;
    auto integrate = [&](int nsteps) {
        StateField s = s0;
        const double dt = T / nsteps;
        for (int i = 0; i < nsteps; ++i) s = step(s, dt, p, g, Method::rk2_ssp);
        return s;
    };
    const StateField a = integrate(512);
    const StateField b = integrate(1024);
    const StateField c = integrate(2048);
    const double e1 = state_max_diff(a, b), e2 = state_max_diff(b, c);
    REQUIRE(e2 > 0.0);
    CHECK(e1 / e2 > 3.4);
    CHECK(e1 / e2 < 4.6);
}

TEST_CASE("stable_dt respects every ceiling") {
    const Grid g = Grid::line(32, 1.0);
    ModelParams p;
    p.d1 = 2.0;
    const StateField s = smooth_state(g, 1.0, 1.0, 1.0, 0.5);
    StepConfig cfg;
    const double dt = stable_dt(s, p, g, cfg);
    CHECK(dt > 0.0);
    CHECK(dt <= cfg.dt_max);
    CHECK(dt <= cfg.cfl_safety * g.hx * g.hx / (2.0 * 2.0)); // diffusion, dmax = 2

    cfg.dt_max = 1e-6;
    CHECK(stable_dt(s, p, g, cfg) == 1e-6);

    // sharper prey gradients shrink the advective ceiling
    ModelParams q;
    q.xi = 5.0;
    StateField sharp = s;
    sharp.u[10] = 30.0;
    CHECK(stable_dt(sharp, q, g, cfg) <= stable_dt(s, q, g, cfg));
}

TEST_CASE("a CFL-violating step reports the offending species and cell") {
    const Grid g = Grid::line(8, 1.0);
    const ModelParams p;
    StateField s = make_state(g, 2.0, 0.5, 0.5);
    try {
        step(s, 10.0, p, g, Method::explicit_euler); // du = -2 per unit time at u=2
        FAIL("expected StepError");
    } catch (const StepError& e) {
        CHECK(e.kind == StepError::Kind::negative_value);
        CHECK(e.species == 'u');
        CHECK(e.cell == 0);
        CHECK(e.value < 0.0);
        CHECK(e.t == 0.0);
        CHECK(e.dt == 10.0);
        CHECK(std::string(e.what()).find("CFL violation") != std::string::npos);
    }
}

TEST_CASE("overflowing values surface as non-finite step errors") {
    const Grid g = Grid::line(8, 1.0);
    const ModelParams p;
    StateField s = make_state(g, 1e200, 0.5, 0.5);
    try {
        step(s, 1.0, p, g, Method::explicit_euler);
        FAIL("expected StepError");
    } catch (const StepError& e) {
        CHECK(e.kind == StepError::Kind::nonfinite_value);
        CHECK(e.species == 'u');
    }
}

TEST_CASE("run lands on checkpoints and the final time exactly") {
    const Grid g = Grid::line(16, 1.0);
    const ModelParams p;
    const StateField s = smooth_state(g, 0.5, 0.7, 0.9, 0.1);
    StepConfig cfg;
    cfg.t_end = 1.0;
    RunOptions opt;
    opt.checkpoints = {0.3, 0.6};
    std::vector<double> times;
    const StateField end = run(s, p, g, cfg, [&](const StateField& st) {
        times.push_back(st.t);
    }, opt);
    CHECK(end.t == 1.0);
    REQUIRE(!times.empty());
    CHECK(times.front() == 0.0);
    CHECK(times.back() == 1.0);
    CHECK(std::find(times.begin(), times.end(), 0.3) != times.end());
    CHECK(std::find(times.begin(), times.end(), 0.6) != times.end());
    for (size_t i = 1; i < times.size(); ++i) CHECK(times[i] > times[i - 1]);
}

TEST_CASE("t_end = 0 returns the initial state after one observation") {
    const Grid g = Grid::line(16, 1.0);
    const ModelParams p;
    const StateField s = smooth_state(g, 0.5, 0.7, 0.9, 0.1);
    StepConfig cfg;
    cfg.t_end = 0.0;
    int calls = 0;
    const StateField end = run(s, p, g, cfg, [&](const StateField&) { ++calls; });
    CHECK(calls == 1);
    CHECK(end.t == 0.0);
    CHECK(state_max_diff(end, s) == 0.0);
}

TEST_CASE("run rejects malformed inputs with specific messages") {
    const Grid g = Grid::line(16, 1.0);
    const ModelParams p;
    const StateField good = smooth_state(g, 0.5, 0.7, 0.9, 0.1);
    StepConfig cfg;

    StateField zero_v = good;
    zero_v.v.assign(g.cells(), 0.0);
    CHECK_THROWS_WITH_AS(run(zero_v, p, g, cfg), "run: species v is identically zero",
                         std::invalid_argument);

    StateField negative = good;
    negative.u[3] = -0.1;
    CHECK_THROWS_AS(run(negative, p, g, cfg), std::invalid_argument);

    StateField wrong_size = good;
    wrong_size.w.pop_back();
    CHECK_THROWS_AS(run(wrong_size, p, g, cfg), std::invalid_argument);

    StepConfig bad_cfl = cfg;
    bad_cfl.cfl_safety = 1.5;
    CHECK_THROWS_AS(run(good, p, g, bad_cfl), std::invalid_argument);

    RunOptions bad_cadence;
    bad_cadence.observer_cadence = 0;
    CHECK_THROWS_AS(run(good, p, g, cfg, {}, bad_cadence), std::invalid_argument);

    RunOptions bad_checkpoint;
    bad_checkpoint.checkpoints = {cfg.t_end + 1.0};
    CHECK_THROWS_AS(run(good, p, g, cfg, {}, bad_checkpoint), std::invalid_argument);

    CHECK_THROWS_AS(step(good, 0.0, p, g), std::invalid_argument);
    CHECK_THROWS_AS(step(good, std::nan(""), p, g), std::invalid_argument);
}
