#pragma once

#include <array>

#include <Eigen/Core>

#include "platesim/mesh.hpp"

namespace platesim {

/// Bogner-Fox-Schmit rectangle: bicubic Hermite element with the nodal values
/// (u, u_x, u_y, u_xy) at each corner. Derivative DOFs are in physical units.
namespace bfs {

inline constexpr int kDofsPerNode = 4;
inline constexpr int kLocalDofs = 16;

enum class DofKind : int { value = 0, dx = 1, dy = 2, dxy = 3 };

using LocalMatrix = Eigen::Matrix<double, kLocalDofs, kLocalDofs>;
using LocalVector = Eigen::Matrix<double, kLocalDofs, 1>;

/// Local index of DOF `kind` at corner `corner` (corners counter-clockwise from (xmin, ymin)).
constexpr int local_index(int corner, DofKind kind) { return kDofsPerNode * corner + static_cast<int>(kind); }

/// The four cubic Hermite functions on [0,1] in DOF order (v0, v0', v1, v1'), or their
/// first/second derivatives with respect to xi.
std::array<double, 4> hermite_1d(double xi, int deriv_order);

/// d^(ox+oy) N_k / dx^ox dy^oy for all 16 basis functions at physical point p of `cell`.
/// No bounds check.
LocalVector basis(const Rect& cell, Point2 p, int ox, int oy);

/// Element stiffness of the plate form
///   R [ (u_xx+u_yy)(v_xx+v_yy) + (1-nu)(2 u_xy v_xy - u_xx v_yy - u_yy v_xx) ]
/// integrated with a gauss_points^2 tensor Gauss rule (4 is exact).
LocalMatrix local_stiffness(double rigidity, double poisson, double hx, double hy, int gauss_points = 4);

/// Consistent mass matrix rho_d * int N_i N_j, exact for gauss_points >= 4.
LocalMatrix local_mass(double rho_d, double hx, double hy, int gauss_points = 4);

/// Point-evaluation functional u_h(p) restricted to one cell. Throws InvalidArgument if p is outside the closed cell.
LocalVector eval_vector(const Rect& cell, Point2 p);

}  // namespace bfs
}  // namespace platesim
