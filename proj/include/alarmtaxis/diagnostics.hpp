#pragma once

#include "alarmtaxis/grid.hpp"
#include "alarmtaxis/params.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace alarmtaxis {

// One timeseries row. Column order is the file schema and must not change.
struct DiagnosticsRecord {
    double t = 0.0;
    double linf_u = 0.0, linf_v = 0.0, linf_w = 0.0;
    double l1_u = 0.0, l1_v = 0.0, l1_w = 0.0;
    double l2_dist_u = 0.0, l2_dist_v = 0.0, l2_dist_w = 0.0;
    double linf_dist_u = 0.0, linf_dist_v = 0.0, linf_dist_w = 0.0;
    double grad_l2_u = 0.0, grad_l2_v = 0.0;
    double energy = 0.0; // NaN when the state had a non-positive cell
    double mass_y1 = 0.0;

    double linf_dist_sum() const { return linf_dist_u + linf_dist_v + linf_dist_w; }
};

inline constexpr std::array<const char*, 17> record_columns = {
    "t",
    "linf_u", "linf_v", "linf_w",
    "l1_u", "l1_v", "l1_w",
    "l2_dist_u", "l2_dist_v", "l2_dist_w",
    "linf_dist_u", "linf_dist_v", "linf_dist_w",
    "grad_l2_u", "grad_l2_v",
    "energy", "mass_y1",
};

std::array<double, 17> record_values(const DiagnosticsRecord& r);
DiagnosticsRecord record_from_values(const std::array<double, 17>& vals);

// Relative-entropy Lyapunov functional
//   E = (1/b3) Int(u - u* - u* ln(u/u*)) + (1/b2) Int(v - ...) + Int(w - ...)
// with midpoint quadrature. Each cell contribution is evaluated in a form that
// stays nonnegative in floating point. Throws std::domain_error naming the
// first non-positive cell/species.
double lyapunov_energy(const StateField& s, const SteadyState& ss,
                       const ModelParams& p, const Grid& g);

// x - log1p(x) evaluated stably (series branch near zero); >= 0 for x > -1.
double entropy_gap(double x);

struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0;
    double det() const { return a11 * a22 - a12 * a12; }
};

struct Mat3Sym {
    double a11 = 0.0, a12 = 0.0, a13 = 0.0;
    double a22 = 0.0, a23 = 0.0, a33 = 0.0;
    double minor1() const { return a11; }
    double minor2() const { return a11 * a22 - a12 * a12; }
    double det() const;
};

// leading-principal-minor tests (Sylvester)
bool is_positive_definite(const Mat2& m);
bool is_positive_definite(const Mat3Sym& m);

// Quadratic-form matrix acting on (u - u*, v - v*) in the energy dissipation
// identity. Positive definite exactly when the stability margin
// 4 b2 b3 - (b1 b2 - b3)^2 is positive; det A = that margin / (4 b2^2 b3^2).
Mat2 matrix_A(const ModelParams& p);

// Gradient-form matrix of the dissipation identity, evaluated at pointwise
// density values (u_val, v_val); typically called at running maxima.
Mat3Sym matrix_B(const ModelParams& p, const SteadyState& ss, double u_val, double v_val);

// Norms, distances to the steady state, energy and the weighted mass
// functional y1 = (1 + b1 b2 / b3) Int u + b1 Int v + b1 b2 Int w.
DiagnosticsRecord record(const StateField& s, const SteadyState& ss,
                         const ModelParams& p, const Grid& g);

struct DecayFit {
    double c1 = 0.0;        // exp(intercept)
    double c2 = 0.0;        // -slope
    double r_squared = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::size_t n_points = 0;
};

// Least-squares line through (t, ln d(t)), d = sum of the three L-inf
// distances. Needs at least 10 records inside the window, all with d > 0.
DecayFit fit_decay(const std::vector<DiagnosticsRecord>& records,
                   double window_lo, double window_hi);

} // namespace alarmtaxis
