#include "platesim/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "platesim/error.hpp"

namespace platesim {

void PlateProblem::validate() const {
    auto check_material = [](const Material& m) {
        if (!(m.rigidity > 0.0)) throw InvalidArgument(fmt::format("rigidity must be positive, got {}", m.rigidity));
        if (!(m.poisson > 0.0 && m.poisson < 0.5)) {
            throw InvalidArgument(fmt::format("Poisson ratio must lie in (0, 1/2), got {}", m.poisson));
        }
        if (!(m.rho_d > 0.0)) throw InvalidArgument(fmt::format("areal density must be positive, got {}", m.rho_d));
    };
    check_material(material);
    for (const Material& m : cell_materials) check_material(m);
    for (std::size_t j = 0; j < oscillators.size(); ++j) {
        const Oscillator& o = oscillators[j];
        if (!(o.mass > 0.0)) throw InvalidArgument(fmt::format("oscillator {}: mass must be positive", j));
        if (!(o.stiffness > 0.0)) throw InvalidArgument(fmt::format("oscillator {}: stiffness must be positive", j));
        for (std::size_t k = 0; k < j; ++k) {
            if (oscillators[k].location.x == o.location.x && oscillators[k].location.y == o.location.y) {
                throw InvalidArgument(fmt::format("oscillators {} and {} share a location", k, j));
            }
        }
    }
}

std::vector<Point2> PlateProblem::oscillator_points() const {
    std::vector<Point2> pts;
    pts.reserve(oscillators.size());
    for (const Oscillator& o : oscillators) pts.push_back(o.location);
    return pts;
}

DofMap::DofMap(const RectMesh& mesh) : index_(mesh.num_nodes() * bfs::kDofsPerNode, kConstrained) {
    std::int32_t next = 0;
    for (std::size_t n = 0; n < mesh.num_nodes(); ++n) {
        if (mesh.is_boundary(NodeId{n})) continue;
        for (int k = 0; k < bfs::kDofsPerNode; ++k) index_[n * bfs::kDofsPerNode + static_cast<std::size_t>(k)] = next++;
    }
    n_free_ = next;
}

AssembledSystem assemble(const RectMesh& mesh, const PlateProblem& problem, const DofMap& dofs) {
    problem.validate();
    if (!problem.cell_materials.empty() && problem.cell_materials.size() != mesh.num_cells()) {
        throw InvalidArgument(fmt::format("assemble: {} cell materials given for {} cells",
                                          problem.cell_materials.size(), mesh.num_cells()));
    }

    using Key = std::tuple<double, double, double, double, double>;
    std::map<Key, std::pair<bfs::LocalMatrix, bfs::LocalMatrix>> cache;

    const auto n = static_cast<Eigen::Index>(dofs.n_free());
    std::vector<Eigen::Triplet<double>> ta;
    std::vector<Eigen::Triplet<double>> tb;
    ta.reserve(mesh.num_cells() * 256);
    tb.reserve(mesh.num_cells() * 256);

    std::array<std::int32_t, bfs::kLocalDofs> gdof{};
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const CellId cell{c};
        const Rect r = mesh.cell_rect(cell);
        const Material& mat = problem.cell_materials.empty() ? problem.material : problem.cell_materials[c];
        const double hx = r.xmax - r.xmin;
        const double hy = r.ymax - r.ymin;
        const Key key{hx, hy, mat.rigidity, mat.poisson, mat.rho_d};
        auto it = cache.find(key);
        if (it == cache.end()) {
            it = cache.emplace(key, std::pair{bfs::local_stiffness(mat.rigidity, mat.poisson, hx, hy),
                                              bfs::local_mass(mat.rho_d, hx, hy)})
                     .first;
        }
        const auto& [kloc, mloc] = it->second;
        const auto corners = mesh.cell_nodes(cell);
        for (int a = 0; a < 4; ++a) {
            for (int k = 0; k < bfs::kDofsPerNode; ++k) {
                gdof[static_cast<std::size_t>(bfs::local_index(a, static_cast<bfs::DofKind>(k)))] =
                    dofs.free_index(corners[static_cast<std::size_t>(a)], static_cast<bfs::DofKind>(k));
            }
        }
        for (int i = 0; i < bfs::kLocalDofs; ++i) {
            const std::int32_t gi = gdof[static_cast<std::size_t>(i)];
            if (gi == DofMap::kConstrained) continue;
            for (int j = 0; j < bfs::kLocalDofs; ++j) {
                const std::int32_t gj = gdof[static_cast<std::size_t>(j)];
                if (gj == DofMap::kConstrained) continue;
                ta.emplace_back(gi, gj, kloc(i, j));
                tb.emplace_back(gi, gj, mloc(i, j));
            }
        }
    }

    AssembledSystem sys;
    sys.A.resize(n, n);
    sys.B.resize(n, n);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.B.setFromTriplets(tb.begin(), tb.end());
    sys.A.makeCompressed();
    sys.B.makeCompressed();

    const double tol = 1e-10 * mesh.domain().diameter();
    for (std::size_t j = 0; j < problem.oscillators.size(); ++j) {
        const Oscillator& o = problem.oscillators[j];
        NodeId node;
        try {
            node = locate_node(mesh, o.location, tol);
        } catch (const InvalidArgument&) {
            throw InvalidArgument(fmt::format("assemble: oscillator {} at ({}, {}) is not a mesh node", j,
                                              o.location.x, o.location.y));
        }
        const std::int32_t g = dofs.free_index(node, bfs::DofKind::value);
        if (g == DofMap::kConstrained) {
            throw InvalidArgument(fmt::format("assemble: oscillator {} sits on a clamped node", j));
        }
        PointTerm term;
        term.e.resize(n);
        term.e.insert(g) = 1.0;
        term.mass = o.mass;
        term.sigma = o.sigma();
        sys.point_terms.push_back(std::move(term));
    }
    return sys;
}

std::vector<double> smallest_linear_eigenvalues(const AssembledSystem& system, int k) {
    const Eigen::Index n = system.n_free();
    if (k < 1 || k > n) throw InvalidArgument(fmt::format("smallest_linear_eigenvalues: k={} out of range", k));
    const Eigen::Index block = std::min<Eigen::Index>(n, k + 4);

    if (n <= 400) {
        const Eigen::MatrixXd a(system.A);
        const Eigen::MatrixXd b(system.B);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(a, b);
        const auto& ev = es.eigenvalues();
        return {ev.data(), ev.data() + k};
    }

    Eigen::SimplicialLDLT<SparseMatrix> chol(system.A);
    if (chol.info() != Eigen::Success) throw Error("smallest_linear_eigenvalues: A is not positive definite");

    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd x(n, block);
    for (Eigen::Index j = 0; j < block; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);
    }
    Eigen::VectorXd prev = Eigen::VectorXd::Constant(block, 0.0);
    Eigen::VectorXd theta;
    for (int it = 0; it < 500; ++it) {
        Eigen::MatrixXd y = chol.solve(system.B * x);
        const Eigen::MatrixXd ar = y.transpose() * (system.A * y);
        const Eigen::MatrixXd br = y.transpose() * (system.B * y);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (ar + ar.transpose()),
                                                                     0.5 * (br + br.transpose()));
        theta = es.eigenvalues();
        x = y * es.eigenvectors();
        const double change = ((theta - prev).head(k).cwiseAbs().array() / theta.head(k).cwiseAbs().array()).maxCoeff();
        prev = theta;
        if (change < 1e-14) break;
    }
    return {theta.data(), theta.data() + k};
}

double rayleigh_linear_smoke(const AssembledSystem& system) { return smallest_linear_eigenvalues(system, 1).front(); }

void write_coordinate(std::ostream& os, const SparseMatrix& m) {
    fmt::print(os, "% {} {} {}\n", m.rows(), m.cols(), m.nonZeros());
    for (Eigen::Index col = 0; col < m.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(m, col); it; ++it) {
            fmt::print(os, "{} {} {:.17g}\n", it.row(), it.col(), it.value());
        }
    }
}

}  // namespace platesim
