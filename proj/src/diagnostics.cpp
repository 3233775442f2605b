#include "alarmtaxis/diagnostics.hpp"

#include "alarmtaxis/operators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace alarmtaxis {

std::array<double, 17> record_values(const DiagnosticsRecord& r) {
    return {r.t,
            r.linf_u, r.linf_v, r.linf_w,
            r.l1_u, r.l1_v, r.l1_w,
            r.l2_dist_u, r.l2_dist_v, r.l2_dist_w,
            r.linf_dist_u, r.linf_dist_v, r.linf_dist_w,
            r.grad_l2_u, r.grad_l2_v,
            r.energy, r.mass_y1};
}

DiagnosticsRecord record_from_values(const std::array<double, 17>& v) {
    DiagnosticsRecord r;
    r.t = v[0];
    r.linf_u = v[1]; r.linf_v = v[2]; r.linf_w = v[3];
    r.l1_u = v[4]; r.l1_v = v[5]; r.l1_w = v[6];
    r.l2_dist_u = v[7]; r.l2_dist_v = v[8]; r.l2_dist_w = v[9];
    r.linf_dist_u = v[10]; r.linf_dist_v = v[11]; r.linf_dist_w = v[12];
    r.grad_l2_u = v[13]; r.grad_l2_v = v[14];
    r.energy = v[15]; r.mass_y1 = v[16];
    return r;
}

double entropy_gap(double x) {
    // x - log1p(x). The direct form loses all digits for |x| ~ eps and can go
    // negative by rounding; the truncated alternating series keeps every value
    // nonnegative and is accurate to ~1e-20 absolute for |x| < 1e-4.
    if (std::abs(x) < 1e-4)
        return x * x * (0.5 - x / 3.0 + x * x / 4.0 - x * x * x / 5.0);
    return x - std::log1p(x);
}

namespace {

double species_energy(const Field& f, double star, const Grid& g, const char* name) {
    if (!(star > 0.0))
        throw std::invalid_argument(std::string("lyapunov_energy: steady component ") +
                                    name + " must be positive");
    double sum = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] > 0.0))
            throw std::domain_error(std::string("lyapunov_energy: non-positive ") + name +
                                    " at cell " + std::to_string(i));
        sum += entropy_gap((f[i] - star) / star);
    }
    return star * sum * g.cell_volume();
}

} // namespace

double lyapunov_energy(const StateField& s, const SteadyState& ss,
                       const ModelParams& p, const Grid& g) {
    const double eu = species_energy(s.u, ss.u_star, g, "u");
    const double ev = species_energy(s.v, ss.v_star, g, "v");
    const double ew = species_energy(s.w, ss.w_star, g, "w");
    return eu / p.b3 + ev / p.b2 + ew;
}

double Mat3Sym::det() const {
    return a11 * (a22 * a33 - a23 * a23) - a12 * (a12 * a33 - a23 * a13) +
           a13 * (a12 * a23 - a22 * a13);
}

bool is_positive_definite(const Mat2& m) {
    return m.a11 > 0.0 && m.det() > 0.0;
}

bool is_positive_definite(const Mat3Sym& m) {
    return m.minor1() > 0.0 && m.minor2() > 0.0 && m.det() > 0.0;
}

Mat2 matrix_A(const ModelParams& p) {
    Mat2 a;
    a.a11 = 1.0 / p.b3;
    a.a22 = 1.0 / p.b2;
    a.a12 = (p.b1 * p.b2 - p.b3) / (2.0 * p.b2 * p.b3);
    return a;
}

Mat3Sym matrix_B(const ModelParams& p, const SteadyState& ss, double u_val, double v_val) {
    Mat3Sym b;
    b.a11 = p.d1 * ss.u_star / p.b3;
    b.a22 = p.d2 * ss.v_star / p.b2;
    b.a33 = ss.w_star;
    b.a12 = -p.xi * ss.v_star * u_val / (2.0 * p.b2);
    b.a13 = -p.chi * ss.w_star * u_val * v_val / 2.0;
    b.a23 = b.a13;
    return b;
}

namespace {

struct FieldStats {
    double linf = 0.0;
    double l1 = 0.0;
    double l2_dist = 0.0;
    double linf_dist = 0.0;
};

FieldStats field_stats(const Field& f, double star, double vol) {
    FieldStats st;
    double sq = 0.0;
    for (double x : f) {
        st.linf = std::max(st.linf, std::abs(x));
        st.l1 += std::abs(x);
        const double d = x - star;
        sq += d * d;
        st.linf_dist = std::max(st.linf_dist, std::abs(d));
    }
    st.l1 *= vol;
    st.l2_dist = std::sqrt(sq * vol);
    return st;
}

double grad_l2(const Field& f, const Grid& g) {
    const FaceField fg = grad_face(f, g);
    double sq = 0.0;
    for (double x : fg.x) sq += x * x;
    for (double x : fg.y) sq += x * x;
    return std::sqrt(sq * g.cell_volume());
}

double integral(const Field& f, double vol) {
    double s = 0.0;
    for (double x : f) s += x;
    return s * vol;
}

} // namespace

DiagnosticsRecord record(const StateField& s, const SteadyState& ss,
                         const ModelParams& p, const Grid& g) {
    DiagnosticsRecord r;
    r.t = s.t;
    const double vol = g.cell_volume();
    const FieldStats su = field_stats(s.u, ss.u_star, vol);
    const FieldStats sv = field_stats(s.v, ss.v_star, vol);
    const FieldStats sw = field_stats(s.w, ss.w_star, vol);
    r.linf_u = su.linf; r.linf_v = sv.linf; r.linf_w = sw.linf;
    r.l1_u = su.l1; r.l1_v = sv.l1; r.l1_w = sw.l1;
    r.l2_dist_u = su.l2_dist; r.l2_dist_v = sv.l2_dist; r.l2_dist_w = sw.l2_dist;
    r.linf_dist_u = su.linf_dist; r.linf_dist_v = sv.linf_dist; r.linf_dist_w = sw.linf_dist;
    r.grad_l2_u = grad_l2(s.u, g);
    r.grad_l2_v = grad_l2(s.v, g);
    try {
        r.energy = lyapunov_energy(s, ss, p, g);
    } catch (const std::domain_error&) {
        r.energy = std::numeric_limits<double>::quiet_NaN(); // undefined off the positive cone
    }
    r.mass_y1 = (1.0 + p.b1 * p.b2 / p.b3) * integral(s.u, vol) +
                p.b1 * integral(s.v, vol) + p.b1 * p.b2 * integral(s.w, vol);
    return r;
}

DecayFit fit_decay(const std::vector<DiagnosticsRecord>& records,
                   double window_lo, double window_hi) {
    if (!(window_lo < window_hi))
        throw std::invalid_argument("fit_decay: window must satisfy lo < hi");
    std::vector<double> ts, ys;
    for (const auto& r : records) {
        if (r.t < window_lo || r.t > window_hi) continue;
        const double d = r.linf_dist_sum();
        if (!(d > 0.0))
            throw std::invalid_argument(
                "fit_decay: non-positive distance at t = " + std::to_string(r.t) +
                "; state coincides with the steady state");
        ts.push_back(r.t);
        ys.push_back(std::log(d));
    }
    if (ts.size() < 10)
        throw std::invalid_argument("fit_decay: need at least 10 records in the window, got " +
                                    std::to_string(ts.size()));

    const size_t n = ts.size();
    double tm = 0.0, ym = 0.0;
    for (size_t i = 0; i < n; ++i) { tm += ts[i]; ym += ys[i]; }
    tm /= n; ym /= n;
    double stt = 0.0, sty = 0.0;
    for (size_t i = 0; i < n; ++i) {
        stt += (ts[i] - tm) * (ts[i] - tm);
        sty += (ts[i] - tm) * (ys[i] - ym);
    }
    if (stt == 0.0)
        throw std::invalid_argument("fit_decay: all records share one time value");
    const double slope = sty / stt;
    const double intercept = ym - slope * tm;

    double ss_res = 0.0, ss_tot = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double e = ys[i] - (intercept + slope * ts[i]);
        ss_res += e * e;
        ss_tot += (ys[i] - ym) * (ys[i] - ym);
    }

    DecayFit fit;
    fit.c1 = std::exp(intercept);
    fit.c2 = -slope;
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    fit.n_points = n;
    return fit;
}

} // namespace alarmtaxis
