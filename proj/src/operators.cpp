#include "alarmtaxis/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace alarmtaxis {

static void check_size(const Field& f, const Grid& g, const char* what) {
    if (static_cast<int>(f.size()) != g.cells())
        throw std::invalid_argument(std::string(what) + ": field size does not match grid");
}

void add_laplacian(const Field& f, const Grid& g, double coeff, Field& out) {
    check_size(f, g, "laplacian");
    check_size(out, g, "laplacian");
    const int nx = g.nx, ny = g.ny;
    const double sx = coeff / (g.hx * g.hx);
    for (int j = 0; j < ny; ++j) {
        const double* row = f.data() + static_cast<size_t>(j) * nx;
        double* orow = out.data() + static_cast<size_t>(j) * nx;
        double left = 0.0; // zero flux through the x=0 wall
        for (int i = 0; i < nx - 1; ++i) {
            const double right = row[i + 1] - row[i];
            orow[i] += sx * (right - left);
            left = right;
        }
        orow[nx - 1] += sx * (0.0 - left);
    }
    if (g.dim == 2) {
        const double sy = coeff / (g.hy * g.hy);
        for (int i = 0; i < nx; ++i) {
            double below = 0.0;
            for (int j = 0; j < ny - 1; ++j) {
                const double above = f[g.idx(i, j + 1)] - f[g.idx(i, j)];
                out[g.idx(i, j)] += sy * (above - below);
                below = above;
            }
            out[g.idx(i, ny - 1)] += sy * (0.0 - below);
        }
    }
}

Field laplacian(const Field& f, const Grid& g) {
    Field out(g.cells(), 0.0);
    add_laplacian(f, g, 1.0, out);
    return out;
}

FaceField grad_face(const Field& f, const Grid& g) {
    check_size(f, g, "grad_face");
    FaceField out;
    const int nx = g.nx, ny = g.ny;
    out.x.assign(static_cast<size_t>(nx + 1) * ny, 0.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i)
            out.x[static_cast<size_t>(j) * (nx + 1) + i] =
                (f[g.idx(i, j)] - f[g.idx(i - 1, j)]) / g.hx;
    if (g.dim == 2) {
        out.y.assign(static_cast<size_t>(nx) * (ny + 1), 0.0);
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                out.y[static_cast<size_t>(j) * nx + i] =
                    (f[g.idx(i, j)] - f[g.idx(i, j - 1)]) / g.hy;
    }
    return out;
}

void add_taxis_divergence(const Field& carrier, const Field& potential, double coeff,
                          const Grid& g, Field& out) {
    check_size(carrier, g, "taxis_divergence");
    check_size(potential, g, "taxis_divergence");
    check_size(out, g, "taxis_divergence");
    for (int c = 0; c < g.cells(); ++c)
        if (carrier[c] < 0.0)
            throw std::domain_error("taxis_divergence: negative carrier at cell " +
                                    std::to_string(c));
    const int nx = g.nx, ny = g.ny;
    const double ix = 1.0 / g.hx;
    for (int j = 0; j < ny; ++j) {
        const double* cr = carrier.data() + static_cast<size_t>(j) * nx;
        const double* pt = potential.data() + static_cast<size_t>(j) * nx;
        double* orow = out.data() + static_cast<size_t>(j) * nx;
        double flux_left = 0.0; // wall
        for (int i = 0; i < nx - 1; ++i) {
            const double vel = coeff * (pt[i + 1] - pt[i]) * ix;
            const double flux = vel * (vel > 0.0 ? cr[i] : cr[i + 1]);
            orow[i] -= (flux - flux_left) * ix;
            flux_left = flux;
        }
        orow[nx - 1] -= (0.0 - flux_left) * ix;
    }
    if (g.dim == 2) {
        const double iy = 1.0 / g.hy;
        for (int i = 0; i < nx; ++i) {
            double flux_below = 0.0;
            for (int j = 0; j < ny - 1; ++j) {
                const double vel = coeff * (potential[g.idx(i, j + 1)] - potential[g.idx(i, j)]) * iy;
                const double flux = vel * (vel > 0.0 ? carrier[g.idx(i, j)] : carrier[g.idx(i, j + 1)]);
                out[g.idx(i, j)] -= (flux - flux_below) * iy;
                flux_below = flux;
            }
            out[g.idx(i, ny - 1)] -= (0.0 - flux_below) * iy;
        }
    }
}

Field taxis_divergence(const Field& carrier, const Field& potential, double coeff,
                       const Grid& g) {
    Field out(g.cells(), 0.0);
    add_taxis_divergence(carrier, potential, coeff, g, out);
    return out;
}

void product_field(const Field& a, const Field& b, Field& out) {
    if (a.size() != b.size())
        throw std::invalid_argument("product_field: size mismatch");
    out.resize(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

Field product_field(const Field& a, const Field& b) {
    Field out;
    product_field(a, b, out);
    return out;
}

double max_face_gradient(const Field& f, const Grid& g) {
    check_size(f, g, "max_face_gradient");
    const int nx = g.nx, ny = g.ny;
    double m = 0.0;
    for (int j = 0; j < ny; ++j)
        for (int i = 1; i < nx; ++i)
            m = std::max(m, std::abs(f[g.idx(i, j)] - f[g.idx(i - 1, j)]) / g.hx);
    if (g.dim == 2)
        for (int j = 1; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                m = std::max(m, std::abs(f[g.idx(i, j)] - f[g.idx(i, j - 1)]) / g.hy);
    return m;
}

} // namespace alarmtaxis
