#pragma once

#include "alarmtaxis/grid.hpp"

namespace alarmtaxis {

// Discrete Laplacian with homogeneous Neumann walls: two-point face gradients,
// boundary faces carry zero flux (ghost-cell reflection), divergence per cell.
// Cell sums telescope to zero exactly up to rounding.
Field laplacian(const Field& f, const Grid& g);
void add_laplacian(const Field& f, const Grid& g, double coeff, Field& out);

// Two-point gradient on every interior face; boundary faces are zero.
FaceField grad_face(const Field& f, const Grid& g);

// Conservative upwind form of -div(coeff * carrier * grad(potential)).
// Face flux = coeff * grad(potential) * carrier taken from the upwind side of
// the face velocity coeff*grad(potential); boundary faces contribute nothing.
// Throws std::domain_error naming the first cell with a negative carrier.
Field taxis_divergence(const Field& carrier, const Field& potential, double coeff,
                       const Grid& g);
void add_taxis_divergence(const Field& carrier, const Field& potential, double coeff,
                          const Grid& g, Field& out);

// Pointwise product, used for the alarm signal u*v.
Field product_field(const Field& a, const Field& b);
void product_field(const Field& a, const Field& b, Field& out);

// Largest face-gradient magnitude of f (zero on a constant field).
double max_face_gradient(const Field& f, const Grid& g);

} // namespace alarmtaxis
