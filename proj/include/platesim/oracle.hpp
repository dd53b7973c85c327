#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "platesim/assembly.hpp"

namespace platesim::oracle {

inline constexpr Eigen::Index kDefaultSizeGuard = 3000;
inline constexpr double kInfinityGuard = 1e12;

/// Linearization of the coupled plate/oscillator system in the unknowns (u, zeta):
///
///   L = [ A          0     ]      R = [ B   E_M^T ]
///       [ -S E       S     ]          [ 0   I     ]
///
/// with S = diag(sigma_j), E the rows e_j^T and E_M^T the columns M_j e_j.
struct AugmentedPencil {
    Eigen::MatrixXd L;
    Eigen::MatrixXd R;
    Eigen::Index n_plate = 0;
    Eigen::Index n_oscillators = 0;
};

struct Eigenpair {
    std::complex<double> lambda;
    Eigen::VectorXcd u;     ///< plate block of the eigenvector
    Eigen::VectorXcd zeta;  ///< oscillator displacements
};

/// Throws SizeGuardError when n_free + p exceeds `size_guard`.
[[nodiscard]] AugmentedPencil build_pencil(const AssembledSystem& system, Eigen::Index size_guard = kDefaultSizeGuard);

/// All finite generalized eigenvalues of (L, R), sorted by real part. Eigenvalues with
/// magnitude above kInfinityGuard (or zero beta) are dropped.
[[nodiscard]] std::vector<std::complex<double>> dense_eig(const AugmentedPencil& pencil);

/// As dense_eig, with eigenvectors split into their plate and oscillator blocks.
[[nodiscard]] std::vector<Eigenpair> dense_eigenpairs(const AugmentedPencil& pencil);

/// Eigenvalues with re_min <= Re < re_max and im_min <= Im < im_max.
[[nodiscard]] std::vector<std::complex<double>> in_box(const std::vector<std::complex<double>>& eigs, double re_min,
                                                      double re_max, double im_min, double im_max);

/// Schur complement of the oscillator block of L - lambda R, i.e. the operator function
/// obtained by eliminating zeta. Used to cross-check the direct matrix form.
[[nodiscard]] Eigen::MatrixXcd eliminate_oscillators(const AugmentedPencil& pencil, std::complex<double> lambda);

}  // namespace platesim::oracle
