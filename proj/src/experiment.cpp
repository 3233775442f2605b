#include "alarmtaxis/experiment.hpp"

#include "alarmtaxis/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace alarmtaxis {

namespace {

std::string config_error_message(const std::string& msg, int line, const std::string& field) {
    std::ostringstream os;
    if (line > 0) os << "line " << line << ": ";
    if (!field.empty()) os << field << ": ";
    os << msg;
    return os.str();
}

} // namespace

ConfigError::ConfigError(std::string msg, int line_, std::string field_)
    : std::runtime_error(config_error_message(msg, line_, field_)),
      line(line_), field(std::move(field_)) {}

const char* to_string(InitialKind k) {
    switch (k) {
        case InitialKind::constant: return "constant";
        case InitialKind::steady_perturb: return "steady_perturb";
        case InitialKind::gaussian: return "gaussian";
        case InitialKind::random_smooth: return "random_smooth";
    }
    return "unknown";
}

Grid GridSpec::build() const {
    if (dim == 1) return Grid::line(nx, lx);
    if (dim == 2) return Grid::rect(nx, ny, lx, ly);
    throw std::invalid_argument("grid.dim must be 1 or 2");
}

std::string format_value(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) { out.push_back(cur); cur.clear(); }
        else cur += c;
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& raw, int line, const std::string& key) {
    const std::string v = trim(raw);
    if (v.empty()) throw ConfigError("empty value", line, key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        throw ConfigError("cannot parse '" + v + "' as a number", line, key);
    return x;
}

long parse_long(const std::string& raw, int line, const std::string& key) {
    const double x = parse_double(raw, line, key);
    const long n = static_cast<long>(x);
    if (static_cast<double>(n) != x)
        throw ConfigError("expected an integer, got '" + trim(raw) + "'", line, key);
    return n;
}

bool parse_bool(const std::string& raw, int line, const std::string& key) {
    const std::string v = trim(raw);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("expected true/false, got '" + v + "'", line, key);
}

std::vector<double> parse_double_list(const std::string& raw, int line, const std::string& key) {
    std::vector<double> out;
    if (trim(raw).empty()) return out;
    for (const std::string& part : split(raw, ','))
        out.push_back(parse_double(part, line, key));
    return out;
}

Method parse_method(const std::string& raw, int line, const std::string& key) {
    const std::string v = trim(raw);
    if (v == "explicit_euler") return Method::explicit_euler;
    if (v == "rk2_ssp") return Method::rk2_ssp;
    throw ConfigError("unknown method '" + v + "' (explicit_euler | rk2_ssp)", line, key);
}

InitialKind parse_kind(const std::string& raw, int line, const std::string& key) {
    const std::string v = trim(raw);
    if (v == "constant") return InitialKind::constant;
    if (v == "steady_perturb") return InitialKind::steady_perturb;
    if (v == "gaussian") return InitialKind::gaussian;
    if (v == "random_smooth") return InitialKind::random_smooth;
    throw ConfigError("unknown initial kind '" + v +
                      "' (constant | steady_perturb | gaussian | random_smooth)", line, key);
}

// One setter for file parsing and --set overrides; key is "section.key".
void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value, int line) {
    auto num = [&] { return parse_double(value, line, key); };
    auto integer = [&] { return parse_long(value, line, key); };

    if (key == "params.d1") cfg.params.d1 = num();
    else if (key == "params.d2") cfg.params.d2 = num();
    else if (key == "params.xi") cfg.params.xi = num();
    else if (key == "params.chi") cfg.params.chi = num();
    else if (key == "params.r1") cfg.params.r1 = num();
    else if (key == "params.r2") cfg.params.r2 = num();
    else if (key == "params.r3") cfg.params.r3 = num();
    else if (key == "params.b1") cfg.params.b1 = num();
    else if (key == "params.b2") cfg.params.b2 = num();
    else if (key == "params.b3") cfg.params.b3 = num();
    else if (key == "params.sigma") cfg.params.sigma = num();
    else if (key == "params.allow_unverified") cfg.allow_unverified = parse_bool(value, line, key);
    else if (key == "grid.dim") cfg.grid.dim = static_cast<int>(integer());
    else if (key == "grid.nx") cfg.grid.nx = static_cast<int>(integer());
    else if (key == "grid.ny") cfg.grid.ny = static_cast<int>(integer());
    else if (key == "grid.lx") cfg.grid.lx = num();
    else if (key == "grid.ly") cfg.grid.ly = num();
    else if (key == "initial.kind") cfg.initial.kind = parse_kind(value, line, key);
    else if (key == "initial.u0") cfg.initial.u0 = num();
    else if (key == "initial.v0") cfg.initial.v0 = num();
    else if (key == "initial.w0") cfg.initial.w0 = num();
    else if (key == "initial.amplitude") cfg.initial.amplitude = num();
    else if (key == "initial.mode") cfg.initial.mode = static_cast<int>(integer());
    else if (key == "initial.seed") cfg.initial.seed = static_cast<unsigned long>(integer());
    else if (key == "initial.width") cfg.initial.width = num();
    else if (key == "step.method") cfg.step.method = parse_method(value, line, key);
    else if (key == "step.cfl_safety") cfg.step.cfl_safety = num();
    else if (key == "step.dt_max") cfg.step.dt_max = num();
    else if (key == "step.t_end") cfg.step.t_end = num();
    else if (key == "output.dir") cfg.output.dir = trim(value);
    else if (key == "output.cadence") cfg.output.cadence = static_cast<int>(integer());
    else if (key == "output.snapshot_times")
        cfg.output.snapshot_times = parse_double_list(value, line, key);
    else if (key == "fit.window_lo") cfg.fit.window_lo = num();
    else if (key == "fit.window_hi") cfg.fit.window_hi = num();
    else if (key == "sweep.threads") cfg.sweep.threads = static_cast<int>(integer());
    else throw ConfigError("unknown key '" + key + "'", line, key);
}

const char* known_sections[] = {"params", "grid", "initial", "step", "output", "fit", "sweep"};

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string s = trim(raw);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("unterminated section header", line);
            section = trim(s.substr(1, s.size() - 2));
            const auto end = std::end(known_sections);
            if (std::find(std::begin(known_sections), end, section) == end)
                throw ConfigError("unknown section '" + section + "'", line);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", line);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = s.substr(eq + 1);
        if (key.empty())
            throw ConfigError("missing key before '='", line);
        if (section.empty())
            throw ConfigError("key '" + key + "' appears before any [section]", line);
        if (section == "sweep" && key != "threads") {
            // sweep axes name the target field with a dotted key
            if (key.find('.') == std::string::npos)
                throw ConfigError("sweep axis must use a dotted key like params.chi", line, key);
            std::vector<std::string> values;
            for (const std::string& part : split(value, ',')) {
                const std::string v = trim(part);
                if (v.empty())
                    throw ConfigError("empty value in sweep axis", line, key);
                values.push_back(v);
            }
            if (values.empty())
                throw ConfigError("sweep axis needs at least one value", line, key);
            cfg.sweep.axes.emplace_back(key, std::move(values));
            continue;
        }
        set_field(cfg, section + "." + key, value, line);
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    set_field(cfg, trim(key), value, 0);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "[params]\n";
    os << "d1 = " << format_value(cfg.params.d1) << "\n";
    os << "d2 = " << format_value(cfg.params.d2) << "\n";
    os << "xi = " << format_value(cfg.params.xi) << "\n";
    os << "chi = " << format_value(cfg.params.chi) << "\n";
    os << "r1 = " << format_value(cfg.params.r1) << "\n";
    os << "r2 = " << format_value(cfg.params.r2) << "\n";
    os << "r3 = " << format_value(cfg.params.r3) << "\n";
    os << "b1 = " << format_value(cfg.params.b1) << "\n";
    os << "b2 = " << format_value(cfg.params.b2) << "\n";
    os << "b3 = " << format_value(cfg.params.b3) << "\n";
    os << "sigma = " << format_value(cfg.params.sigma) << "\n";
    os << "allow_unverified = " << (cfg.allow_unverified ? "true" : "false") << "\n";
    os << "\n[grid]\n";
    os << "dim = " << cfg.grid.dim << "\n";
    os << "nx = " << cfg.grid.nx << "\n";
    os << "ny = " << cfg.grid.ny << "\n";
    os << "lx = " << format_value(cfg.grid.lx) << "\n";
    os << "ly = " << format_value(cfg.grid.ly) << "\n";
    os << "\n[initial]\n";
    os << "kind = " << to_string(cfg.initial.kind) << "\n";
    os << "u0 = " << format_value(cfg.initial.u0) << "\n";
    os << "v0 = " << format_value(cfg.initial.v0) << "\n";
    os << "w0 = " << format_value(cfg.initial.w0) << "\n";
    os << "amplitude = " << format_value(cfg.initial.amplitude) << "\n";
    os << "mode = " << cfg.initial.mode << "\n";
    os << "seed = " << cfg.initial.seed << "\n";
    os << "width = " << format_value(cfg.initial.width) << "\n";
    os << "\n[step]\n";
    os << "method = "
       << (cfg.step.method == Method::rk2_ssp ? "rk2_ssp" : "explicit_euler") << "\n";
    os << "cfl_safety = " << format_value(cfg.step.cfl_safety) << "\n";
    os << "dt_max = " << format_value(cfg.step.dt_max) << "\n";
    os << "t_end = " << format_value(cfg.step.t_end) << "\n";
    os << "\n[output]\n";
    os << "dir = " << cfg.output.dir << "\n";
    os << "cadence = " << cfg.output.cadence << "\n";
    os << "snapshot_times =";
    for (size_t i = 0; i < cfg.output.snapshot_times.size(); ++i)
        os << (i ? ", " : " ") << format_value(cfg.output.snapshot_times[i]);
    os << "\n";
    os << "\n[fit]\n";
    os << "window_lo = " << format_value(cfg.fit.window_lo) << "\n";
    os << "window_hi = " << format_value(cfg.fit.window_hi) << "\n";
    os << "\n[sweep]\n";
    os << "threads = " << cfg.sweep.threads << "\n";
    for (const auto& axis : cfg.sweep.axes) {
        os << axis.first << " =";
        for (size_t i = 0; i < axis.second.size(); ++i)
            os << (i ? ", " : " ") << axis.second[i];
        os << "\n";
    }
    return os.str();
}

void validate_experiment(const ExperimentConfig& cfg) {
    const std::string perr = validate_params(cfg.params, cfg.allow_unverified);
    if (!perr.empty()) throw ConfigError(perr, 0, "params");

    if (cfg.grid.dim != 1 && cfg.grid.dim != 2)
        throw ConfigError("must be 1 or 2", 0, "grid.dim");
    if (cfg.grid.nx < 4) throw ConfigError("need at least 4 cells", 0, "grid.nx");
    if (cfg.grid.dim == 2 && cfg.grid.ny < 4)
        throw ConfigError("need at least 4 cells", 0, "grid.ny");
    if (!(cfg.grid.lx > 0.0)) throw ConfigError("must be positive", 0, "grid.lx");
    if (cfg.grid.dim == 2 && !(cfg.grid.ly > 0.0))
        throw ConfigError("must be positive", 0, "grid.ly");

    const InitialSpec& ic = cfg.initial;
    if (ic.kind == InitialKind::constant || ic.kind == InitialKind::gaussian) {
        if (!(ic.u0 > 0.0)) throw ConfigError("must be positive", 0, "initial.u0");
        if (!(ic.v0 > 0.0)) throw ConfigError("must be positive", 0, "initial.v0");
        if (!(ic.w0 > 0.0)) throw ConfigError("must be positive", 0, "initial.w0");
    }
    if (ic.kind == InitialKind::steady_perturb && !(std::abs(ic.amplitude) < 1.0))
        throw ConfigError("relative amplitude must satisfy |a| < 1 to keep densities positive",
                          0, "initial.amplitude");
    if (ic.kind == InitialKind::gaussian) {
        if (ic.amplitude < 0.0) throw ConfigError("bump height must be nonnegative", 0, "initial.amplitude");
        if (!(ic.width > 0.0)) throw ConfigError("must be positive", 0, "initial.width");
    }
    if (ic.mode < 0) throw ConfigError("must be nonnegative", 0, "initial.mode");

    if (!(cfg.step.cfl_safety > 0.0) || cfg.step.cfl_safety > 1.0)
        throw ConfigError("must lie in (0, 1]", 0, "step.cfl_safety");
    if (!(cfg.step.dt_max > 0.0)) throw ConfigError("must be positive", 0, "step.dt_max");
    if (!(cfg.step.t_end >= 0.0)) throw ConfigError("must be nonnegative", 0, "step.t_end");

    if (cfg.output.dir.empty()) throw ConfigError("must not be empty", 0, "output.dir");
    if (cfg.output.cadence < 1) throw ConfigError("must be >= 1", 0, "output.cadence");
    for (double t : cfg.output.snapshot_times)
        if (!(t >= 0.0) || t > cfg.step.t_end)
            throw ConfigError("snapshot time " + format_value(t) + " outside [0, t_end]",
                              0, "output.snapshot_times");

    const bool lo_set = cfg.fit.window_lo >= 0.0, hi_set = cfg.fit.window_hi >= 0.0;
    if (lo_set != hi_set)
        throw ConfigError("set both window_lo and window_hi or neither", 0, "fit.window_lo");
    if (lo_set && !(cfg.fit.window_lo < cfg.fit.window_hi))
        throw ConfigError("window_lo must be below window_hi", 0, "fit.window_lo");

    if (cfg.sweep.threads < 0) throw ConfigError("must be nonnegative", 0, "sweep.threads");
    for (const auto& axis : cfg.sweep.axes) {
        if (axis.first.rfind("sweep.", 0) == 0)
            throw ConfigError("sweep axis cannot target the sweep section", 0, axis.first);
        ExperimentConfig probe = cfg; // field must exist and accept every value
        for (const std::string& v : axis.second) apply_override(probe, axis.first, v);
    }
}

namespace {

// Random Neumann-compatible shape: tensor cosine modes up to max_mode per axis,
// coefficients U(-1,1), normalized to unit max magnitude.
Field random_cosine_shape(const Grid& g, int max_mode, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int my = g.dim == 2 ? max_mode : 0;
    std::vector<double> coef;
    for (int kx = 0; kx <= max_mode; ++kx)
        for (int ky = 0; ky <= my; ++ky)
            coef.push_back(unit(rng));
    const double pi = std::acos(-1.0);
    Field s(g.cells(), 0.0);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double x = g.x_center(i), y = g.dim == 2 ? g.y_center(j) : 0.0;
            double acc = 0.0;
            size_t c = 0;
            for (int kx = 0; kx <= max_mode; ++kx)
                for (int ky = 0; ky <= my; ++ky)
                    acc += coef[c++] * std::cos(kx * pi * x / g.lx) *
                           (g.dim == 2 ? std::cos(ky * pi * y / g.ly) : 1.0);
            s[g.idx(i, j)] = acc;
        }
    }
    double m = 0.0;
    for (double x : s) m = std::max(m, std::abs(x));
    if (m > 1e-30)
        for (double& x : s) x /= m;
    return s;
}

} // namespace

StateField make_initial_state(const InitialSpec& spec, const Grid& g, const ModelParams& p) {
    switch (spec.kind) {
        case InitialKind::constant:
            return make_state(g, spec.u0, spec.v0, spec.w0);
        case InitialKind::steady_perturb: {
            const SteadySolve sol = solve_steady_state(p);
            if (!sol.ok())
                throw std::runtime_error(std::string("initial state: ") + to_string(sol.status));
            std::mt19937_64 rng(spec.seed);
            StateField s = make_state(g, 0.0, 0.0, 0.0);
            const double stars[3] = {sol.state.u_star, sol.state.v_star, sol.state.w_star};
            Field* fields[3] = {&s.u, &s.v, &s.w};
            for (int k = 0; k < 3; ++k) {
                const Field shape = random_cosine_shape(g, std::max(0, spec.mode), rng);
                for (int c = 0; c < g.cells(); ++c)
                    (*fields[k])[c] = stars[k] * (1.0 + spec.amplitude * shape[c]);
            }
            return s;
        }
        case InitialKind::gaussian: {
            StateField s = make_state(g, 0.0, 0.0, 0.0);
            const double cx = 0.5 * g.lx, cy = 0.5 * g.ly;
            const double sw = spec.width * g.lx;
            const double base[3] = {spec.u0, spec.v0, spec.w0};
            Field* fields[3] = {&s.u, &s.v, &s.w};
            for (int j = 0; j < g.ny; ++j)
                for (int i = 0; i < g.nx; ++i) {
                    const double dx = g.x_center(i) - cx;
                    const double dy = g.dim == 2 ? g.y_center(j) - cy : 0.0;
                    const double bump = std::exp(-(dx * dx + dy * dy) / (2.0 * sw * sw));
                    for (int k = 0; k < 3; ++k)
                        (*fields[k])[g.idx(i, j)] = base[k] + spec.amplitude * bump;
                }
            return s;
        }
        case InitialKind::random_smooth: {
            std::mt19937_64 rng(spec.seed);
            std::uniform_real_distribution<double> base_uv(0.3, 1.3), base_w(0.3, 1.2),
                amp_d(0.2, 0.7);
            StateField s = make_state(g, 0.0, 0.0, 0.0);
            Field* fields[3] = {&s.u, &s.v, &s.w};
            for (int k = 0; k < 3; ++k) {
                const double base = k == 2 ? base_w(rng) : base_uv(rng);
                const double amp = amp_d(rng);
                const Field shape = random_cosine_shape(g, std::max(1, spec.mode), rng);
                for (int c = 0; c < g.cells(); ++c)
                    (*fields[k])[c] = base * (1.0 + amp * shape[c]);
            }
            return s;
        }
    }
    throw std::invalid_argument("make_initial_state: unknown kind");
}

void write_timeseries(const std::string& path, const std::vector<DiagnosticsRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("write_timeseries: refusing to write an empty record list");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_timeseries: cannot open '" + path + "'");
    for (size_t c = 0; c < record_columns.size(); ++c)
        out << (c ? "," : "") << record_columns[c];
    out << '\n';
    for (const auto& r : records) {
        const auto vals = record_values(r);
        for (size_t c = 0; c < vals.size(); ++c)
            out << (c ? "," : "") << format_value(vals[c]);
        out << '\n';
    }
}

std::vector<DiagnosticsRecord> read_timeseries(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_timeseries: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("read_timeseries: empty file '" + path + "'");
    const auto header = split(trim(line), ',');
    if (header.size() != record_columns.size())
        throw std::runtime_error("read_timeseries: unexpected column count in '" + path + "'");
    for (size_t c = 0; c < header.size(); ++c)
        if (trim(header[c]) != record_columns[c])
            throw std::runtime_error("read_timeseries: column '" + header[c] +
                                     "' does not match schema ('" + record_columns[c] + "')");
    std::vector<DiagnosticsRecord> out;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto parts = split(trim(line), ',');
        if (parts.size() != record_columns.size())
            throw std::runtime_error("read_timeseries: bad field count at line " +
                                     std::to_string(lineno));
        std::array<double, 17> vals{};
        for (size_t c = 0; c < parts.size(); ++c) {
            char* end = nullptr;
            vals[c] = std::strtod(parts[c].c_str(), &end);
            if (end == parts[c].c_str())
                throw std::runtime_error("read_timeseries: bad number at line " +
                                         std::to_string(lineno));
        }
        out.push_back(record_from_values(vals));
    }
    return out;
}

void write_snapshot(const std::string& path, const StateField& s, const Grid& g) {
    if (static_cast<int>(s.u.size()) != g.cells())
        throw std::invalid_argument("write_snapshot: state does not match grid");
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_snapshot: cannot open '" + path + "'");
    out << "# t=" << format_value(s.t) << " dim=" << g.dim << " nx=" << g.nx;
    if (g.dim == 2) out << " ny=" << g.ny;
    out << " lx=" << format_value(g.lx);
    if (g.dim == 2) out << " ly=" << format_value(g.ly);
    out << " order=row-major-x-fastest columns="
        << (g.dim == 2 ? "i,j,x,y,u,v,w" : "i,x,u,v,w") << '\n';
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int c = g.idx(i, j);
            out << i;
            if (g.dim == 2) out << ',' << j;
            out << ',' << format_value(g.x_center(i));
            if (g.dim == 2) out << ',' << format_value(g.y_center(j));
            out << ',' << format_value(s.u[c]) << ',' << format_value(s.v[c]) << ','
                << format_value(s.w[c]) << '\n';
        }
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_snapshot: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#')
        throw std::runtime_error("read_snapshot: missing '#' header in '" + path + "'");
    double t = 0.0, lx = 1.0, ly = 1.0;
    int dim = 0, nx = 0, ny = 1;
    std::istringstream hs(line.substr(1));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "t") t = std::strtod(val.c_str(), nullptr);
        else if (key == "dim") dim = std::atoi(val.c_str());
        else if (key == "nx") nx = std::atoi(val.c_str());
        else if (key == "ny") ny = std::atoi(val.c_str());
        else if (key == "lx") lx = std::strtod(val.c_str(), nullptr);
        else if (key == "ly") ly = std::strtod(val.c_str(), nullptr);
    }
    Snapshot snap;
    snap.grid = dim == 2 ? Grid::rect(nx, ny, lx, ly) : Grid::line(nx, lx);
    snap.state = make_state(snap.grid, 0.0, 0.0, 0.0);
    snap.state.t = t;
    int rows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto parts = split(line, ',');
        const size_t expect = dim == 2 ? 7 : 5;
        if (parts.size() != expect)
            throw std::runtime_error("read_snapshot: bad field count in '" + path + "'");
        const int i = std::atoi(parts[0].c_str());
        const int j = dim == 2 ? std::atoi(parts[1].c_str()) : 0;
        const int c = snap.grid.idx(i, j);
        const size_t off = dim == 2 ? 4 : 2;
        snap.state.u[c] = std::strtod(parts[off + 0].c_str(), nullptr);
        snap.state.v[c] = std::strtod(parts[off + 1].c_str(), nullptr);
        snap.state.w[c] = std::strtod(parts[off + 2].c_str(), nullptr);
        ++rows;
    }
    if (rows != snap.grid.cells())
        throw std::runtime_error("read_snapshot: expected " + std::to_string(snap.grid.cells()) +
                                 " rows, got " + std::to_string(rows));
    return snap;
}

std::string emit_plot_script(const std::string& run_dir) {
    namespace fs = std::filesystem;
    const fs::path ts = fs::path(run_dir) / "timeseries.csv";
    if (!fs::exists(ts))
        throw ConfigError("timeseries.csv not found in '" + run_dir + "'");
    const auto records = read_timeseries(ts.string());

    bool have_fit = false;
    DecayFit fit;
    if (!records.empty() && records.back().t > 0.0) {
        try {
            fit = fit_decay(records, 0.5 * records.back().t, records.back().t);
            have_fit = true;
        } catch (const std::invalid_argument&) {
            // distances vanish or too few records: plot without the fitted line
        }
    }

    std::ostringstream os;
    os << "# generated plotting script; safe to re-run\n"
          "set datafile separator ','\n"
          "set terminal pngcairo size 1000,700\n"
          "set grid\n"
          "set xlabel 't'\n"
          "\n"
          "set output 'decay.png'\n"
          "set title 'distance to the coexistence state'\n"
          "set logscale y\n";
    os << "plot 'timeseries.csv' skip 1 using 1:($11+$12+$13) with lines lw 2 "
          "title 'sum of L-inf distances'";
    if (have_fit)
        os << ", \\\n     " << format_value(fit.c1) << "*exp(-" << format_value(fit.c2)
           << "*x) with lines dashtype 2 title 'fit C2=" << format_value(fit.c2) << "'";
    os << "\n\n"
          "set output 'energy.png'\n"
          "set title 'Lyapunov energy'\n"
          "plot 'timeseries.csv' skip 1 using 1:16 with lines lw 2 title 'E(t)'\n"
          "\n"
          "unset logscale y\n"
          "set output 'norms.png'\n"
          "set title 'density maxima and gradient norms'\n"
          "plot 'timeseries.csv' skip 1 using 1:2 with lines title 'max u', \\\n"
          "     'timeseries.csv' skip 1 using 1:3 with lines title 'max v', \\\n"
          "     'timeseries.csv' skip 1 using 1:4 with lines title 'max w', \\\n"
          "     'timeseries.csv' skip 1 using 1:14 with lines title '|grad u|_2', \\\n"
          "     'timeseries.csv' skip 1 using 1:15 with lines title '|grad v|_2'\n";

    const fs::path script = fs::path(run_dir) / "plots.gp";
    std::ofstream out(script);
    if (!out)
        throw std::runtime_error("emit_plot_script: cannot open '" + script.string() + "'");
    out << os.str();
    return script.string();
}

double max_pd_coefficient(const ModelParams& p, const SteadyState& ss, double u_val,
                          double v_val, bool vary_xi) {
    auto pd_at = [&](double c) {
        ModelParams q = p;
        (vary_xi ? q.xi : q.chi) = c;
        return is_positive_definite(matrix_B(q, ss, u_val, v_val));
    };
    if (!pd_at(0.0)) return 0.0;
    double lo = 0.0, hi = 1.0;
    int grow = 0;
    while (pd_at(hi)) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 200) return std::numeric_limits<double>::infinity();
    }
    for (int it = 0; it < 200 && hi - lo > 1e-10 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (pd_at(mid) ? lo : hi) = mid;
    }
    return lo;
}

RunResult run_experiment(const ExperimentConfig& cfg, bool write_outputs) {
    namespace fs = std::filesystem;
    RunResult res;
    res.hypothesis = validate_hypothesis(cfg.params);
    res.steady = solve_steady_state(cfg.params);
    if (!res.steady.ok())
        throw std::runtime_error(to_string(res.steady.status));

    const Grid g = cfg.grid.build();
    const StateField init = make_initial_state(cfg.initial, g, cfg.params);

    if (write_outputs) fs::create_directories(cfg.output.dir);

    std::vector<double> snaps = cfg.output.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

    RunOptions opt;
    opt.observer_cadence = cfg.output.cadence;
    opt.checkpoints = snaps;

    size_t next_snap = 0;
    const Observer obs = [&](const StateField& s) {
        res.records.push_back(record(s, res.steady.state, cfg.params, g));
        const DiagnosticsRecord& r = res.records.back();
        res.max_u = std::max(res.max_u, r.linf_u);
        res.max_v = std::max(res.max_v, r.linf_v);
        if (next_snap < snaps.size() &&
            std::abs(s.t - snaps[next_snap]) <= 1e-9 * std::max(1.0, snaps[next_snap])) {
            if (write_outputs) {
                char name[32];
                std::snprintf(name, sizeof name, "snapshot_%03zu.csv", next_snap);
                const std::string path = (fs::path(cfg.output.dir) / name).string();
                write_snapshot(path, s, g);
                res.snapshot_paths.push_back(path);
            }
            ++next_snap;
        }
    };

    res.final_state = run(init, cfg.params, g, cfg.step, obs, opt);

    const double t_end = cfg.step.t_end;
    double lo = cfg.fit.window_lo, hi = cfg.fit.window_hi;
    if (lo < 0.0) { lo = 0.5 * t_end; hi = t_end; }
    if (t_end > 0.0) {
        try {
            res.fit = fit_decay(res.records, lo, hi);
            res.fit_ok = true;
        } catch (const std::invalid_argument& e) {
            res.fit_error = e.what();
        }
    } else {
        res.fit_error = "t_end is zero, nothing to fit";
    }

    const Mat3Sym b = matrix_B(cfg.params, res.steady.state, res.max_u, res.max_v);
    res.b_positive_definite_at_maxima = is_positive_definite(b);
    res.xi_max_pd = max_pd_coefficient(cfg.params, res.steady.state, res.max_u, res.max_v, true);
    res.chi_max_pd = max_pd_coefficient(cfg.params, res.steady.state, res.max_u, res.max_v, false);

    if (write_outputs) {
        res.timeseries_path = (fs::path(cfg.output.dir) / "timeseries.csv").string();
        write_timeseries(res.timeseries_path, res.records);
        res.plot_script_path = emit_plot_script(cfg.output.dir);
        std::ofstream prov(fs::path(cfg.output.dir) / "config.ini");
        if (prov) prov << serialize_config(cfg);
    }
    return res;
}

} // namespace alarmtaxis
