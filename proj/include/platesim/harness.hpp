#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "platesim/assembly.hpp"
#include "platesim/config.hpp"
#include "platesim/convergence.hpp"
#include "platesim/nep.hpp"
#include "platesim/sim.hpp"

namespace platesim {

/// Mesh, numbering and matrices of one refinement level. Not movable: the operator function
/// keeps a pointer to `system`.
struct Discretization {
    RectMesh mesh;
    DofMap dofs;
    AssembledSystem system;
    OperatorFunction f;

    Discretization(RectMesh m, const PlateProblem& problem);
    Discretization(const Discretization&) = delete;
    Discretization& operator=(const Discretization&) = delete;
};

/// Level i of the configuration; `previous` is required for the bisect rule when i > 0.
[[nodiscard]] std::unique_ptr<Discretization> discretize(const RunConfig& cfg, int level,
                                                         const Discretization* previous = nullptr);

/// Tiles of the configured search region around the configured poles.
[[nodiscard]] std::vector<SearchBox> search_tiles(const RunConfig& cfg);

struct SolveReport {
    double h = 0.0;
    Eigen::Index n_free = 0;
    std::vector<EigenResult> eigenvalues;
    SimStats stats;
    double seconds = 0.0;
};

/// SIM over the search region on level 0, then eigenvector refinement (Rayleigh-functional
/// polishing when cfg.polish). Results outside the region are dropped.
[[nodiscard]] SolveReport run_solve(const RunConfig& cfg, std::ostream* log = nullptr);
void write_solve_csv(std::ostream& os, const SolveReport& report);

struct ConvergenceReport {
    ConvergenceTable table;
    std::vector<double> seconds;  ///< wall time per level
};

/// Solves every refinement level and tracks the lowest `search.track` eigenvalues from level 0
/// by nearest-value continuation. Level 0 is searched with SIM over the whole region. With
/// continuation enabled, later levels confirm each eigenvalue with the indicator of a small box
/// around its previous value and polish it there; otherwise SIM runs on the full region again.
[[nodiscard]] ConvergenceReport run_convergence(const RunConfig& cfg, std::ostream* log = nullptr);

struct OracleReport {
    std::vector<std::complex<double>> sim;
    std::vector<std::complex<double>> oracle;
    double max_deviation = 0.0;  ///< largest relative deviation between paired eigenvalues
    bool counts_match = true;
    [[nodiscard]] bool passed(double tol = 1e-6) const { return counts_match && max_deviation <= tol; }
};

/// Pairs two sorted spectra and records the largest relative deviation.
[[nodiscard]] OracleReport compare_spectra(std::vector<std::complex<double>> sim,
                                           std::vector<std::complex<double>> oracle);

/// SIM (without polishing) against the dense augmented-pencil eigenvalues in the search region,
/// on level 0. Throws SizeGuardError when the mesh is too fine for the dense path.
[[nodiscard]] OracleReport run_oracle_check(const RunConfig& cfg, std::ostream* log = nullptr);
void write_oracle_report(std::ostream& os, const OracleReport& report);

/// Node, cell and DOF counts per level plus oscillator node placement.
void write_mesh_info(std::ostream& os, const RunConfig& cfg);

}  // namespace platesim
