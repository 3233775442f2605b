#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "alarmtaxis/grid.hpp"
#include "alarmtaxis/operators.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace alarmtaxis;

namespace {

const double pi = std::acos(-1.0);

Field random_field(const Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    Field f(g.cells());
    for (double& x : f) x = d(rng);
    return f;
}

double cell_sum(const Field& f, const Grid& g) {
    double s = 0.0;
    for (double x : f) s += x;
    return s * g.cell_volume();
}

double sum_abs(const Field& f, const Grid& g) {
    double s = 0.0;
    for (double x : f) s += std::abs(x);
    return s * g.cell_volume();
}

double max_abs_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("laplacian of a constant field vanishes identically") {
    for (const Grid& g : {Grid::line(16, 1.0), Grid::rect(8, 12, 1.0, 0.7)}) {
        const Field f(g.cells(), 3.25);
        for (double x : laplacian(f, g)) CHECK(x == 0.0);
    }
}

TEST_CASE("laplacian of x^2 matches the zero-flux ghost formula cell by cell") {
    // With f = x^2 the two-point face gradients are exact, so interior cells
    // get exactly 2. The left wall happens to be compatible (f'(0) = 0) and
    // also gets 2; the right wall forces flux 0 where the true gradient is
    // 2L, leaving (2 - 2L/h) in the last cell.
    const int n = 16;
    const Grid g = Grid::line(n, 1.0);
    Field f(g.cells());
    for (int i = 0; i < n; ++i) f[i] = g.x_center(i) * g.x_center(i);
    const Field lap = laplacian(f, g);
    for (int i = 0; i < n - 1; ++i)
        CHECK(lap[i] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(lap[n - 1] == doctest::Approx(2.0 - 2.0 / g.hx).epsilon(1e-12));
}

TEST_CASE("add_laplacian accumulates coeff * laplacian on top of existing content") {
    const Grid g = Grid::line(8, 2.0);
    std::mt19937_64 rng(3);
    const Field f = random_field(g, rng);
    Field out(g.cells(), 1.0);
    add_laplacian(f, g, 0.25, out);
    const Field lap = laplacian(f, g);
    for (int i = 0; i < g.cells(); ++i)
        CHECK(out[i] == doctest::Approx(1.0 + 0.25 * lap[i]).epsilon(1e-13));
}

TEST_CASE("laplacian cell sums telescope to zero") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        const Grid g = rep % 2 == 0 ? Grid::line(64, 1.5) : Grid::rect(24, 17, 1.5, 0.9);
        const Field f = random_field(g, rng, 0.0, 5.0);
        const Field lap = laplacian(f, g);
        CHECK(std::abs(cell_sum(lap, g)) <= 1e-12 * std::max(1.0, sum_abs(lap, g)));
    }
}

TEST_CASE("taxis cell sums telescope to zero") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        const Grid g = rep % 2 == 0 ? Grid::line(64, 1.5) : Grid::rect(24, 17, 1.5, 0.9);
        const Field carrier = random_field(g, rng, 0.0, 2.0);
        const Field pot = random_field(g, rng, -1.0, 1.0);
        const Field div = taxis_divergence(carrier, pot, 0.35, g);
        CHECK(std::abs(cell_sum(div, g)) <= 1e-12 * std::max(1.0, sum_abs(div, g)));
    }
}

TEST_CASE("grad_face is exact on linear fields and zero on boundary faces") {
    const Grid g = Grid::line(10, 2.0);
    Field f(g.cells());
    for (int i = 0; i < g.nx; ++i) f[i] = 3.0 * g.x_center(i) + 1.0;
    const FaceField fg = grad_face(f, g);
    REQUIRE(fg.x.size() == static_cast<size_t>(g.nx + 1));
    CHECK(fg.x.front() == 0.0);
    CHECK(fg.x.back() == 0.0);
    for (int i = 1; i < g.nx; ++i) CHECK(fg.x[i] == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(max_face_gradient(f, g) == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(max_face_gradient(Field(g.cells(), 2.0), g) == 0.0);
}

TEST_CASE("upwind donor cell follows the face velocity sign") {
    const int n = 8, k = 4;
    const Grid g = Grid::line(n, 1.0);
    Field carrier(g.cells(), 0.0);
    carrier[k] = 1.0;
    Field pot(g.cells());
    const double xi = 0.3;

    // potential increasing in x: carrier mass moves right, out of cell k into k+1
    for (int i = 0; i < n; ++i) pot[i] = g.x_center(i);
    Field d = taxis_divergence(carrier, pot, xi, g);
    CHECK(d[k] == doctest::Approx(-xi / g.hx).epsilon(1e-13));
    CHECK(d[k + 1] == doctest::Approx(xi / g.hx).epsilon(1e-13));
    for (int i = 0; i < n; ++i)
        if (i != k && i != k + 1) CHECK(d[i] == 0.0);

    // potential decreasing in x: mass moves left instead
    for (int i = 0; i < n; ++i) pot[i] = -g.x_center(i);
    d = taxis_divergence(carrier, pot, xi, g);
    CHECK(d[k] == doctest::Approx(-xi / g.hx).epsilon(1e-13));
    CHECK(d[k - 1] == doctest::Approx(xi / g.hx).epsilon(1e-13));
    for (int i = 0; i < n; ++i)
        if (i != k && i != k - 1) CHECK(d[i] == 0.0);
}

TEST_CASE("negative carrier is rejected with the offending cell") {
    const Grid g = Grid::line(8, 1.0);
    Field carrier(g.cells(), 1.0);
    carrier[5] = -1e-12;
    const Field pot(g.cells(), 0.5);
    CHECK_THROWS_WITH_AS(taxis_divergence(carrier, pot, 0.1, g),
                         "taxis_divergence: negative carrier at cell 5", std::domain_error);
}

TEST_CASE("mirror symmetry in 1D is exact for both operators") {
    const Grid g = Grid::line(32, 1.0);
    std::mt19937_64 rng(11);
    const Field f = random_field(g, rng, 0.0, 3.0);
    const Field pot = random_field(g, rng);
    auto mirror = [&](const Field& a) {
        Field m(a.size());
        for (int i = 0; i < g.nx; ++i) m[i] = a[g.nx - 1 - i];
        return m;
    };
    CHECK(max_abs_diff(laplacian(mirror(f), g), mirror(laplacian(f, g))) == 0.0);
    CHECK(max_abs_diff(taxis_divergence(mirror(f), mirror(pot), 0.4, g),
                       mirror(taxis_divergence(f, pot, 0.4, g))) == 0.0);
}

TEST_CASE("transpose symmetry on a square 2D grid is exact") {
    const int n = 12;
    const Grid g = Grid::rect(n, n, 1.0, 1.0);
    std::mt19937_64 rng(13);
    const Field f = random_field(g, rng, 0.0, 3.0);
    auto transpose = [&](const Field& a) {
        Field t(a.size());
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) t[g.idx(i, j)] = a[g.idx(j, i)];
        return t;
    };
    CHECK(max_abs_diff(laplacian(transpose(f), g), transpose(laplacian(f, g))) == 0.0);
}

TEST_CASE("a y-constant 2D field reproduces the 1D laplacian in every row") {
    const Grid g1 = Grid::line(20, 1.3);
    const Grid g2 = Grid::rect(20, 6, 1.3, 0.8);
    std::mt19937_64 rng(17);
    const Field f1 = random_field(g1, rng);
    Field f2(g2.cells());
    for (int j = 0; j < g2.ny; ++j)
        for (int i = 0; i < g2.nx; ++i) f2[g2.idx(i, j)] = f1[i];
    const Field l1 = laplacian(f1, g1);
    const Field l2 = laplacian(f2, g2);
    for (int j = 0; j < g2.ny; ++j)
        for (int i = 0; i < g2.nx; ++i)
            CHECK(l2[g2.idx(i, j)] == doctest::Approx(l1[i]).epsilon(1e-13));
}

TEST_CASE("laplacian converges at second order on a Neumann-compatible field") {
    auto max_err = [](int n) {
        const Grid g = Grid::line(n, 1.0);
        Field f(g.cells());
        for (int i = 0; i < n; ++i) f[i] = std::cos(pi * g.x_center(i));
        const Field lap = laplacian(f, g);
        double e = 0.0;
        for (int i = 0; i < n; ++i)
            e = std::max(e, std::abs(lap[i] + pi * pi * std::cos(pi * g.x_center(i))));
        return e;
    };
    double prev = max_err(32);
    for (int n : {64, 128, 256}) {
        const double cur = max_err(n);
        const double ratio = prev / cur;
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
        prev = cur;
    }
}

TEST_CASE("2D laplacian converges at second order") {
    auto max_err = [](int n) {
        const Grid g = Grid::rect(n, n, 1.0, 1.0);
        Field f(g.cells());
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                f[g.idx(i, j)] = std::cos(pi * g.x_center(i)) * std::cos(pi * g.y_center(j));
        const Field lap = laplacian(f, g);
        double e = 0.0;
        for (int c = 0; c < g.cells(); ++c)
            e = std::max(e, std::abs(lap[c] + 2.0 * pi * pi * f[c]));
        return e;
    };
    double prev = max_err(16);
    for (int n : {32, 64}) {
        const double cur = max_err(n);
        const double ratio = prev / cur;
        CHECK(ratio > 3.5);
        CHECK(ratio < 4.5);
        prev = cur;
    }
}

TEST_CASE("upwind taxis converges at first order on a smooth manufactured field") {
    // carrier c = 2 + cos(pi x), potential phi = cos(pi x):
    // -d/dx(c phi') = pi^2 (2 cos(pi x) + cos(2 pi x))
    auto max_err = [](int n) {
        const Grid g = Grid::line(n, 1.0);
        Field c(g.cells()), phi(g.cells());
        for (int i = 0; i < n; ++i) {
            const double x = g.x_center(i);
            c[i] = 2.0 + std::cos(pi * x);
            phi[i] = std::cos(pi * x);
        }
        const Field d = taxis_divergence(c, phi, 1.0, g);
        double e = 0.0;
        for (int i = 0; i < n; ++i) {
            const double x = g.x_center(i);
            const double exact = pi * pi * (2.0 * std::cos(pi * x) + std::cos(2.0 * pi * x));
            e = std::max(e, std::abs(d[i] - exact));
        }
        return e;
    };
    double prev = max_err(32);
    for (int n : {64, 128, 256}) {
        const double cur = max_err(n);
        CHECK(prev / cur > 1.6); // at least first order
        prev = cur;
    }
}

TEST_CASE("product_field multiplies pointwise and rejects size mismatches") {
    const Field a = {1.0, 2.0, 3.0}, b = {4.0, 0.5, -1.0};
    const Field p = product_field(a, b);
    CHECK(p == Field{4.0, 1.0, -3.0});
    CHECK_THROWS_AS(product_field(a, Field{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("mismatched field sizes are rejected everywhere") {
    const Grid g = Grid::line(8, 1.0);
    const Field bad(g.cells() + 1, 1.0);
    const Field good(g.cells(), 1.0);
    CHECK_THROWS_AS(laplacian(bad, g), std::invalid_argument);
    CHECK_THROWS_AS(grad_face(bad, g), std::invalid_argument);
    CHECK_THROWS_AS(taxis_divergence(bad, good, 0.1, g), std::invalid_argument);
    CHECK_THROWS_AS(taxis_divergence(good, bad, 0.1, g), std::invalid_argument);
    CHECK_THROWS_AS(max_face_gradient(bad, g), std::invalid_argument);
}

TEST_CASE("grid construction rejects degenerate inputs") {
    CHECK_THROWS_WITH_AS(Grid::line(3, 1.0), "grid: need at least 4 cells along x",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(Grid::line(8, 0.0), "grid: length along x must be positive",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(Grid::rect(8, 2, 1.0, 1.0), "grid: need at least 4 cells along y",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(Grid::rect(8, 8, 1.0, -2.0), "grid: length along y must be positive",
                         std::invalid_argument);
}
