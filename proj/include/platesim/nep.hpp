#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "platesim/assembly.hpp"

namespace platesim {

using Complex = std::complex<double>;
using ComplexSparse = Eigen::SparseMatrix<Complex>;
using ComplexVector = Eigen::VectorXcd;

namespace detail {
struct UmfpackSymbolic;
struct UmfpackNumeric;
}  // namespace detail

class ShiftFactorization;

/// The rational matrix function
///
///   F(eta) = A - eta B + sum_j  eta sigma_j / (eta - sigma_j)  M_j e_j e_j^T
///
/// of the discrete plate-spring-load problem. Holds a reference to the assembled system,
/// which must outlive it. Immutable after construction apart from the lazily computed
/// symbolic analysis (guarded internally), so it can be shared between threads.
class OperatorFunction {
public:
    static constexpr double kDefaultPoleGuard = 1e-8;

    explicit OperatorFunction(const AssembledSystem& system, double pole_guard = kDefaultPoleGuard);
    ~OperatorFunction();
    OperatorFunction(const OperatorFunction&) = delete;
    OperatorFunction& operator=(const OperatorFunction&) = delete;

    [[nodiscard]] const AssembledSystem& system() const { return *system_; }
    [[nodiscard]] Eigen::Index size() const { return system_->n_free(); }
    [[nodiscard]] std::vector<double> poles() const;
    [[nodiscard]] double pole_guard() const { return pole_guard_; }

    /// Distance-to-pole test: |eta - sigma_j| <= pole_guard * |sigma_j| for some j.
    [[nodiscard]] bool near_pole(Complex eta) const;
    /// Throws PoleProximityError when near_pole(eta).
    void check_shift(Complex eta) const;

    /// Coefficient eta sigma_j / (eta - sigma_j) * M_j of the j-th rank-one term.
    [[nodiscard]] Complex coupling(std::size_t j, Complex eta) const;
    /// d/d eta of coupling(j, eta) = -sigma_j^2 / (eta - sigma_j)^2 * M_j.
    [[nodiscard]] Complex coupling_derivative(std::size_t j, Complex eta) const;

    /// F(eta) as a sparse complex matrix with the rank-one terms folded in.
    [[nodiscard]] ComplexSparse evaluate(Complex eta) const;
    /// F(eta) v without forming the matrix.
    [[nodiscard]] ComplexVector apply(Complex eta, const ComplexVector& v) const;
    /// F'(eta) v = -B v + sum_j coupling_derivative(j, eta) (e_j^T v) e_j.
    [[nodiscard]] ComplexVector apply_derivative(Complex eta, const ComplexVector& v) const;

    /// Sparse direct factorization of F(eta). Throws PoleProximityError or SingularShiftError.
    [[nodiscard]] ShiftFactorization factorize(Complex eta) const;

private:
    friend class ShiftFactorization;
    std::shared_ptr<detail::UmfpackSymbolic> symbolic(const ComplexSparse& pattern) const;

    const AssembledSystem* system_;
    double pole_guard_;
    bool shared_pattern_;
    mutable std::mutex symbolic_mutex_;
    mutable std::shared_ptr<detail::UmfpackSymbolic> symbolic_;
};

/// LU factorization of F(eta) at one shift (UMFPACK, METIS fill-reducing order, pattern
/// analysis shared across shifts). Solves on one factorization are serialized internally;
/// factorizations at different shifts are independent.
class ShiftFactorization {
public:
    ShiftFactorization(ShiftFactorization&&) noexcept;
    ShiftFactorization& operator=(ShiftFactorization&&) noexcept;
    ~ShiftFactorization();

    [[nodiscard]] Complex shift() const { return shift_; }
    [[nodiscard]] const ComplexSparse& matrix() const { return matrix_; }
    /// UMFPACK's cheap reciprocal pivot-ratio estimate.
    [[nodiscard]] double pivot_rcond() const { return pivot_rcond_; }
    /// 1-norm condition number estimate ||F||_1 ||F^{-1}||_1 (Hager-Higham; a few solves).
    [[nodiscard]] double condition_estimate() const;

    /// x with F(eta) x = y.
    [[nodiscard]] ComplexVector solve(const ComplexVector& y) const;

private:
    friend class OperatorFunction;
    ShiftFactorization(Complex shift, ComplexSparse matrix, std::shared_ptr<detail::UmfpackSymbolic> symbolic);

    Complex shift_;
    ComplexSparse matrix_;
    std::shared_ptr<detail::UmfpackSymbolic> symbolic_;
    std::unique_ptr<detail::UmfpackNumeric> numeric_;
    double pivot_rcond_ = 0.0;
    std::unique_ptr<std::mutex> solve_mutex_;
};

/// Relative residual ||F x - y|| / ||y|| of a solve (0 for y = 0 and x = 0).
[[nodiscard]] double relative_residual(const ComplexSparse& f, const ComplexVector& x, const ComplexVector& y);

}  // namespace platesim
