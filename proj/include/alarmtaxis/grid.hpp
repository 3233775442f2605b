#pragma once

#include <algorithm>
#include <vector>

namespace alarmtaxis {

using Field = std::vector<double>;

// Uniform cell-centered mesh on an interval (dim 1) or rectangle (dim 2).
// Cells are stored row major, x fastest: index = j*nx + i.
struct Grid {
    int dim = 1;
    int nx = 0;
    int ny = 1;          // 1 when dim == 1
    double lx = 1.0;
    double ly = 1.0;
    double hx = 0.0;
    double hy = 0.0;

    // throws std::invalid_argument on n < 4 or non-positive lengths
    static Grid line(int n, double length);
    static Grid rect(int nx, int ny, double lx, double ly);

    int cells() const { return nx * ny; }
    double cell_volume() const { return dim == 1 ? hx : hx * hy; }
    double min_h() const { return dim == 1 ? hx : std::min(hx, hy); }
    int idx(int i, int j) const { return j * nx + i; }
    double x_center(int i) const { return (i + 0.5) * hx; }
    double y_center(int j) const { return (j + 0.5) * hy; }
};

// Cell fields for the three species plus simulation time.
struct StateField {
    Field u, v, w;
    double t = 0.0;
};

StateField make_state(const Grid& g, double u0, double v0, double w0);

// Per-axis face values. x faces: (nx+1) x ny, x fastest; y faces: nx x (ny+1)
// (empty in 1D). Boundary faces are included and hold 0 for gradients/fluxes.
struct FaceField {
    Field x;
    Field y;
};

} // namespace alarmtaxis
