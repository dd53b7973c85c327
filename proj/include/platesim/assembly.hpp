#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Sparse>

#include "platesim/element.hpp"
#include "platesim/mesh.hpp"

namespace platesim {

using SparseMatrix = Eigen::SparseMatrix<double>;
using SparseVector = Eigen::SparseVector<double>;

struct Material {
    double rigidity = 1.0;  ///< R = E d^3 / (12 (1 - nu^2))
    double poisson = 0.3;
    double rho_d = 1.0;     ///< areal mass density rho * d
};

/// Mass M attached to the plate at `location` through a spring of stiffness K.
struct Oscillator {
    double mass = 0.0;
    double stiffness = 0.0;
    Point2 location;

    /// Squared natural frequency sigma = K / M; the pole of the operator function.
    [[nodiscard]] double sigma() const { return stiffness / mass; }
};

struct PlateProblem {
    Material material;
    std::vector<Oscillator> oscillators;
    /// Optional per-cell coefficients; empty means `material` everywhere.
    std::vector<Material> cell_materials;

    /// Throws InvalidArgument on non-positive M_j/K_j, nu outside (0, 1/2) or repeated locations.
    void validate() const;
    [[nodiscard]] std::vector<Point2> oscillator_points() const;
};

/// Clamped-plate numbering: all four DOFs at boundary nodes are eliminated, every interior
/// DOF gets a dense free index (node order, then DOF kind).
class DofMap {
public:
    static constexpr std::int32_t kConstrained = -1;

    DofMap() = default;
    explicit DofMap(const RectMesh& mesh);

    [[nodiscard]] std::int32_t free_index(NodeId n, bfs::DofKind kind) const {
        return index_[n.idx() * bfs::kDofsPerNode + static_cast<std::size_t>(kind)];
    }
    [[nodiscard]] std::int32_t n_free() const { return n_free_; }

private:
    std::vector<std::int32_t> index_;
    std::int32_t n_free_ = 0;
};

[[nodiscard]] inline DofMap build_dof_map(const RectMesh& mesh) { return DofMap(mesh); }

struct PointTerm {
    SparseVector e;      ///< point-evaluation functional at the oscillator location
    double mass = 0.0;
    double sigma = 0.0;
};

/// Discrete clamped plate: stiffness A, mass B and the point couplings C_j = M_j e_j e_j^T
/// (never formed). A and B share one sparsity pattern.
struct AssembledSystem {
    SparseMatrix A;
    SparseMatrix B;
    std::vector<PointTerm> point_terms;

    [[nodiscard]] Eigen::Index n_free() const { return A.rows(); }
};

/// Throws InvalidArgument if an oscillator does not sit on an interior mesh node.
[[nodiscard]] AssembledSystem assemble(const RectMesh& mesh, const PlateProblem& problem, const DofMap& dofs);

/// Smallest eigenvalue of A u = lambda B u (ignores the point terms).
[[nodiscard]] double rayleigh_linear_smoke(const AssembledSystem& system);

/// The k smallest eigenvalues of the linear pencil (A, B) by block inverse iteration.
[[nodiscard]] std::vector<double> smallest_linear_eigenvalues(const AssembledSystem& system, int k);

/// Coordinate text export, one "row col value" triple per line (0-based, full storage).
void write_coordinate(std::ostream& os, const SparseMatrix& m);

/// Vector of global free DOFs for a function given by its nodal data, used for interpolation.
/// `f(x, y)` returns {u, u_x, u_y, u_xy}.
template <class F>
Eigen::VectorXd interpolate(const RectMesh& mesh, const DofMap& dofs, F&& f) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dofs.n_free());
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        const NodeId id{n};
        const Point2 p = mesh.node_coords(id);
        const auto d = f(p.x, p.y);
        for (int k = 0; k < bfs::kDofsPerNode; ++k) {
            const std::int32_t g = dofs.free_index(id, static_cast<bfs::DofKind>(k));
            if (g != DofMap::kConstrained) v(g) = d[static_cast<std::size_t>(k)];
        }
    }
    return v;
}

}  // namespace platesim
