#include "alarmtaxis/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

namespace alarmtaxis {

namespace {

namespace fs = std::filesystem;

// human-facing numbers; file writers keep the full 17 digits
std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

std::string pad(std::string s, size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

void write_summary(const ExperimentConfig& cfg, const RunResult& r, std::ostream& out) {
    const ModelParams& p = cfg.params;
    const DiagnosticsRecord& first = r.records.front();
    const DiagnosticsRecord& fin = r.records.back();

    out << "simulation summary\n";
    if (cfg.grid.dim == 1)
        out << "  grid: 1D nx=" << cfg.grid.nx << " lx=" << fmt(cfg.grid.lx) << "\n";
    else
        out << "  grid: 2D " << cfg.grid.nx << "x" << cfg.grid.ny << " lx=" << fmt(cfg.grid.lx)
            << " ly=" << fmt(cfg.grid.ly) << "\n";
    out << "  params: d1=" << fmt(p.d1) << " d2=" << fmt(p.d2) << " xi=" << fmt(p.xi)
        << " chi=" << fmt(p.chi) << " b1=" << fmt(p.b1) << " b2=" << fmt(p.b2)
        << " b3=" << fmt(p.b3) << " sigma=" << fmt(p.sigma) << "\n";
    out << "  initial: " << to_string(cfg.initial.kind) << " seed=" << cfg.initial.seed << "\n";
    out << "  steady state: u*=" << format_value(r.steady.state.u_star)
        << " v*=" << format_value(r.steady.state.v_star)
        << " w*=" << format_value(r.steady.state.w_star) << "\n";
    out << "  hypothesis: structural " << (r.hypothesis.structural() ? "pass" : "FAIL")
        << ", stability " << (r.hypothesis.stability ? "pass" : "FAIL") << "\n";
    out << "  t_end=" << fmt(fin.t) << " records=" << r.records.size() << "\n";
    out << "  final max:      u=" << format_value(fin.linf_u) << " v=" << format_value(fin.linf_v)
        << " w=" << format_value(fin.linf_w) << "\n";
    out << "  final distance: u=" << format_value(fin.linf_dist_u)
        << " v=" << format_value(fin.linf_dist_v) << " w=" << format_value(fin.linf_dist_w)
        << " sum=" << format_value(fin.linf_dist_sum()) << "\n";
    out << "  final gradients: |grad u|=" << format_value(fin.grad_l2_u)
        << " |grad v|=" << format_value(fin.grad_l2_v) << "\n";
    out << "  energy: E(0)=" << format_value(first.energy)
        << " E(end)=" << format_value(fin.energy) << "\n";
    if (r.fit_ok)
        out << "  decay fit on [" << fmt(r.fit.window_lo) << ", " << fmt(r.fit.window_hi)
            << "]: C1=" << format_value(r.fit.c1) << " C2=" << format_value(r.fit.c2)
            << " r^2=" << format_value(r.fit.r_squared) << " points=" << r.fit.n_points << "\n";
    else
        out << "  decay fit unavailable: " << r.fit_error << "\n";
    out << "  matrix B at run maxima (u=" << fmt(r.max_u) << ", v=" << fmt(r.max_v) << "): "
        << (r.b_positive_definite_at_maxima ? "positive definite" : "NOT positive definite")
        << "\n";
    out << "  largest xi keeping B positive definite at these maxima:  " << fmt(r.xi_max_pd)
        << "\n";
    out << "  largest chi keeping B positive definite at these maxima: " << fmt(r.chi_max_pd)
        << "\n";
}

// Runs one configured experiment and persists summary.txt next to the CSVs.
// Shared by simulate and every sweep point.
RunResult run_and_summarize(const ExperimentConfig& cfg) {
    RunResult r = run_experiment(cfg, true);
    std::ostringstream ss;
    write_summary(cfg, r, ss);
    const fs::path path = fs::path(cfg.output.dir) / "summary.txt";
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    f << ss.str();
    return r;
}

std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

} // namespace

ExperimentConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& overrides,
                             const std::string& out_dir) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = parse_config_file(config_path);
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
        apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    validate_experiment(cfg);
    return cfg;
}

int cmd_check_params(const ExperimentConfig& cfg, std::ostream& out) {
    const ModelParams& p = cfg.params;
    const HypothesisReport h = validate_hypothesis(p);
    out << "parameter checks for b1=" << fmt(p.b1) << " b2=" << fmt(p.b2)
        << " b3=" << fmt(p.b3) << "\n";
    auto line = [&](const char* name, const char* cond, bool pass, double margin) {
        out << "  [" << (pass ? "PASS" : "FAIL") << "] " << pad(name, 12) << pad(cond, 26)
            << "margin " << fmt(margin) << "\n";
    };
    line("h_b1", "b1 <= 1", h.b1_le_one, h.margin_b1);
    line("h_b3", "b3 < b1*b2", h.b3_lt_b1b2, h.margin_b3);
    line("h_sum", "b2 + b3 <= 1/2", h.sum_le_half, h.margin_sum);
    line("h_stability", "(b1*b2 - b3)^2 < 4*b2*b3", h.stability, h.margin_stability);
    out << (h.all() ? "all checks passed\n" : "some checks failed\n");
    return h.all() ? exit_ok : exit_domain;
}

int cmd_steady_state(const ExperimentConfig& cfg, std::ostream& out) {
    const ModelParams& p = cfg.params;
    const SteadySolve sol = solve_steady_state(p);
    if (!sol.ok()) {
        out << "error: " << to_string(sol.status) << "\n";
        return exit_domain;
    }
    const Residual res = steady_state_residual(sol.state, p);
    out << "coexistence steady state (b1=" << fmt(p.b1) << " b2=" << fmt(p.b2)
        << " b3=" << fmt(p.b3) << " sigma=" << fmt(p.sigma) << ")\n";
    out << "  u* = " << format_value(sol.state.u_star) << "\n";
    out << "  v* = " << format_value(sol.state.v_star) << "\n";
    out << "  w* = " << format_value(sol.state.w_star) << "\n";
    out << "  bracket [" << format_value(sol.bracket_lo) << ", " << format_value(sol.bracket_hi)
        << "]: J(" << format_value(sol.bracket_lo) << ") = "
        << format_value(steady_state_j(sol.bracket_lo, p)) << ", J("
        << format_value(sol.bracket_hi) << ") = "
        << format_value(steady_state_j(sol.bracket_hi, p)) << "\n";
    out << "  bisection iterations = " << sol.iterations
        << ", |J(w*)| = " << format_value(sol.j_residual) << "\n";
    out << "  equation residuals: " << format_value(res.r1) << ", " << format_value(res.r2)
        << ", " << format_value(res.r3) << " (max " << format_value(res.max_abs()) << ")\n";
    out << "  structural hypothesis held: " << (sol.hypothesis_verified ? "yes" : "no") << "\n";
    return exit_ok;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& out) {
    try {
        const RunResult r = run_and_summarize(cfg);
        write_summary(cfg, r, out);
        out << "outputs written to " << cfg.output.dir << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
        return exit_domain;
    }
}

int cmd_fit_decay(const ExperimentConfig& cfg, std::ostream& out) {
    try {
        const std::string path = (fs::path(cfg.output.dir) / "timeseries.csv").string();
        const auto records = read_timeseries(path);
        if (records.empty()) {
            out << "error: no records in '" << path << "'\n";
            return exit_domain;
        }
        double lo = cfg.fit.window_lo, hi = cfg.fit.window_hi;
        if (lo < 0.0) {
            hi = records.back().t;
            lo = 0.5 * hi;
        }
        const DecayFit fit = fit_decay(records, lo, hi);
        out << "decay fit on [" << fmt(fit.window_lo) << ", " << fmt(fit.window_hi)
            << "]: C1 = " << format_value(fit.c1) << ", C2 = " << format_value(fit.c2)
            << ", r^2 = " << format_value(fit.r_squared) << ", points = " << fit.n_points
            << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        out << "error: " << e.what() << "\n";
        return exit_domain;
    }
}

namespace {

struct PointOutcome {
    std::string name;
    std::vector<std::string> values;
    HypothesisReport hyp{};
    bool hyp_known = false;
    bool ok = false;
    double c2 = std::numeric_limits<double>::quiet_NaN();
    double r2 = std::numeric_limits<double>::quiet_NaN();
    double dist_u = std::numeric_limits<double>::quiet_NaN();
    double dist_v = std::numeric_limits<double>::quiet_NaN();
    double dist_w = std::numeric_limits<double>::quiet_NaN();
    std::string status;
};

} // namespace

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
    const auto& axes = cfg.sweep.axes;
    size_t npoints = 1;
    std::vector<size_t> sizes;
    for (const auto& axis : axes) {
        sizes.push_back(axis.second.size());
        npoints *= axis.second.size();
    }

    std::error_code ec;
    fs::create_directories(cfg.output.dir, ec);
    if (ec) {
        out << "error: cannot create '" << cfg.output.dir << "': " << ec.message() << "\n";
        return exit_domain;
    }

    std::vector<PointOutcome> results(npoints);

    auto run_point = [&](size_t i) {
        PointOutcome& po = results[i];
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu", i);
        po.name = name;

        // decode the Cartesian index, last axis fastest
        std::vector<size_t> ix(axes.size(), 0);
        size_t rem = i;
        for (size_t a = axes.size(); a-- > 0;) {
            ix[a] = rem % sizes[a];
            rem /= sizes[a];
        }
        for (size_t a = 0; a < axes.size(); ++a)
            po.values.push_back(axes[a].second[ix[a]]);

        try {
            ExperimentConfig pc = cfg;
            pc.output.dir = (fs::path(cfg.output.dir) / po.name).string();
            pc.sweep.axes.clear();
            for (size_t a = 0; a < axes.size(); ++a)
                apply_override(pc, axes[a].first, po.values[a]);
            validate_experiment(pc);
            po.hyp = validate_hypothesis(pc.params);
            po.hyp_known = true;
            const RunResult r = run_and_summarize(pc);
            const DiagnosticsRecord& fin = r.records.back();
            po.dist_u = fin.linf_dist_u;
            po.dist_v = fin.linf_dist_v;
            po.dist_w = fin.linf_dist_w;
            if (r.fit_ok) {
                po.c2 = r.fit.c2;
                po.r2 = r.fit.r_squared;
            }
            po.ok = true;
            po.status = "ok";
        } catch (const std::exception& e) {
            po.status = csv_safe(e.what());
        }
    };

    size_t nthreads = cfg.sweep.threads > 0
                          ? static_cast<size_t>(cfg.sweep.threads)
                          : std::max(1u, std::thread::hardware_concurrency());
    nthreads = std::min(nthreads, npoints);
    if (nthreads <= 1) {
        for (size_t i = 0; i < npoints; ++i) run_point(i);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            for (size_t i; (i = next.fetch_add(1)) < npoints;) run_point(i);
        };
        std::vector<std::thread> pool;
        for (size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
    }

    const fs::path index_path = fs::path(cfg.output.dir) / "index.csv";
    std::ofstream idx(index_path);
    if (!idx) {
        out << "error: cannot write '" << index_path.string() << "'\n";
        return exit_domain;
    }
    idx << "point,dir";
    for (const auto& axis : axes) idx << ',' << axis.first;
    idx << ",h_b1,h_b3,h_sum,h_stability,c2,r_squared,"
           "final_dist_u,final_dist_v,final_dist_w,status\n";
    for (size_t i = 0; i < npoints; ++i) {
        const PointOutcome& po = results[i];
        idx << i << ',' << po.name;
        for (const std::string& v : po.values) idx << ',' << v;
        if (po.hyp_known)
            idx << ',' << po.hyp.b1_le_one << ',' << po.hyp.b3_lt_b1b2 << ','
                << po.hyp.sum_le_half << ',' << po.hyp.stability;
        else
            idx << ",,,,";
        idx << ',' << format_value(po.c2) << ',' << format_value(po.r2) << ','
            << format_value(po.dist_u) << ',' << format_value(po.dist_v) << ','
            << format_value(po.dist_w) << ',' << po.status << '\n';
    }
    idx.close();

    size_t n_ok = 0;
    for (size_t i = 0; i < npoints; ++i) {
        const PointOutcome& po = results[i];
        n_ok += po.ok;
        out << po.name;
        for (size_t a = 0; a < axes.size(); ++a)
            out << ' ' << axes[a].first << '=' << po.values[a];
        out << ": " << po.status;
        if (po.ok && std::isfinite(po.c2)) out << " (C2=" << fmt(po.c2) << ")";
        out << "\n";
    }
    out << "sweep complete: " << n_ok << "/" << npoints << " points ok, index at "
        << index_path.string() << "\n";
    return n_ok == npoints ? exit_ok : exit_domain;
}

} // namespace alarmtaxis
