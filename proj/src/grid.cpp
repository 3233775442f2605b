#include "alarmtaxis/grid.hpp"

#include <stdexcept>
#include <string>

namespace alarmtaxis {

static void check_axis(int n, double length, const char* axis) {
    if (n < 4)
        throw std::invalid_argument(std::string("grid: need at least 4 cells along ") + axis);
    if (!(length > 0.0))
        throw std::invalid_argument(std::string("grid: length along ") + axis + " must be positive");
}

Grid Grid::line(int n, double length) {
    check_axis(n, length, "x");
    Grid g;
    g.dim = 1;
    g.nx = n;
    g.ny = 1;
    g.lx = length;
    g.ly = 0.0;
    g.hx = length / n;
    g.hy = 0.0;
    return g;
}

Grid Grid::rect(int nx, int ny, double lx, double ly) {
    check_axis(nx, lx, "x");
    check_axis(ny, ly, "y");
    Grid g;
    g.dim = 2;
    g.nx = nx;
    g.ny = ny;
    g.lx = lx;
    g.ly = ly;
    g.hx = lx / nx;
    g.hy = ly / ny;
    return g;
}

StateField make_state(const Grid& g, double u0, double v0, double w0) {
    StateField s;
    s.u.assign(g.cells(), u0);
    s.v.assign(g.cells(), v0);
    s.w.assign(g.cells(), w0);
    s.t = 0.0;
    return s;
}

} // namespace alarmtaxis
