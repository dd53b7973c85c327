#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "platesim/nep.hpp"

namespace platesim {

/// Axis-aligned square in the complex plane.
struct SearchBox {
    Complex center;
    double half_width = 0.0;

    [[nodiscard]] double re_min() const { return center.real() - half_width; }
    [[nodiscard]] double re_max() const { return center.real() + half_width; }
    [[nodiscard]] double im_min() const { return center.imag() - half_width; }
    [[nodiscard]] double im_max() const { return center.imag() + half_width; }
    /// Half-open membership [re_min, re_max) x [im_min, im_max).
    [[nodiscard]] bool contains(Complex z) const {
        return z.real() >= re_min() && z.real() < re_max() && z.imag() >= im_min() && z.imag() < im_max();
    }
};

struct SimConfig {
    int m_per_edge = 8;         ///< Gauss-Legendre nodes per box edge
    double alpha = 1e-6;        ///< indicator threshold (indicator is relative to ||y||)
    double beta = 1e-6;         ///< terminal half-width, relative to the half-width of the initial box
    std::uint64_t seed = 20240101;
    int probes = 1;             ///< number of random probe vectors averaged in the indicator
    int max_depth = 64;

    /// Throws InvalidArgument unless m_per_edge >= 2, alpha > 0, beta > 0, probes >= 1.
    void validate() const;
};

struct EigenResult {
    Complex lambda;             ///< centre of the terminal box (or the polished value)
    double box_half_width = 0.0;
    double indicator = 0.0;
    std::optional<ComplexVector> eigenvector;
    double residual = std::numeric_limits<double>::quiet_NaN();  ///< ||F(lambda) x|| / (||F(lambda)||_1 ||x||)
    bool converged = false;     ///< eigenvector refinement succeeded
    bool polished = false;      ///< lambda replaced by the Rayleigh-functional value
};

struct SimStats {
    std::size_t boxes = 0;      ///< indicator evaluations
    std::size_t solves = 0;     ///< factorizations (one per distinct quadrature node)
    int depth = 0;
};

/// Seeded standard-normal complex probe vector.
[[nodiscard]] ComplexVector random_probe(Eigen::Index n, std::uint64_t seed);

/// Relative spectral indicator
///   | (1 / 2 pi i) sum_k w_k F(eta_k)^{-1} y | / ||y||
/// with m_per_edge Gauss-Legendre nodes on each edge of the box, counter-clockwise.
/// Throws PoleProximityError if a pole lies in the closed box (within the pole guard).
[[nodiscard]] double indicator(const SearchBox& box, const OperatorFunction& f, const ComplexVector& y, int m_per_edge);

/// Recursive four-way subdivision: boxes whose indicator is below alpha are dropped, the
/// rest are split until half_width <= beta * box.half_width; chains of terminal centres
/// closer than four times that width are averaged. Result sorted by real part.
///
/// Throws PoleProximityError if a pole lies in the initial box and MaxDepthError if
/// max_depth is reached with boxes still larger than beta.
[[nodiscard]] std::vector<EigenResult> find_eigenvalues(const SearchBox& box, const OperatorFunction& f,
                                                        const SimConfig& config, SimStats* stats = nullptr);

/// Covers the rectangle [re_min, re_max] x [im_min, im_max] with squares of side at most
/// `max_side` (0: the rectangle's smaller extent) that avoid every pole by at least its guard.
/// Squares straddling the real axis are placed with the axis at one third of their height so
/// that no subdivision edge runs along it.
[[nodiscard]] std::vector<SearchBox> tile_region(double re_min, double re_max, double im_min, double im_max,
                                                 std::span<const double> poles, double pole_gap, double max_side = 0.0);

/// Runs find_eigenvalues on each box (beta relative to each box) and merges the results.
[[nodiscard]] std::vector<EigenResult> find_eigenvalues(std::span<const SearchBox> boxes, const OperatorFunction& f,
                                                        const SimConfig& config, SimStats* stats = nullptr);

/// Inverse iteration at a fixed shift near an eigenvalue. Fills eigenvector/residual;
/// converged=false when the iterates stagnate.
[[nodiscard]] EigenResult refine_eigenpair(Complex lambda_c, const OperatorFunction& f, std::uint64_t seed = 1,
                                           int steps = 4);

/// Rayleigh-functional iteration for the complex-symmetric problem started from a located
/// eigenvalue: rho solves x^T F(rho) x = 0, then x <- F(rho)^{-1} F'(rho) x. Sets polished;
/// converged once two successive values of rho agree to `tol` relative.
[[nodiscard]] EigenResult polish_eigenpair(Complex lambda_c, const OperatorFunction& f, std::uint64_t seed = 1,
                                           int max_iter = 8, double tol = 1e-10);

}  // namespace platesim
