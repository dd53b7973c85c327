#include "platesim/nep.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <umfpack.h>

#include "platesim/error.hpp"

namespace platesim {

namespace detail {

struct UmfpackSymbolic {
    void* handle = nullptr;
    ~UmfpackSymbolic() {
        if (handle != nullptr) umfpack_zi_free_symbolic(&handle);
    }
};

struct UmfpackNumeric {
    void* handle = nullptr;
    ~UmfpackNumeric() {
        if (handle != nullptr) umfpack_zi_free_numeric(&handle);
    }
};

}  // namespace detail

namespace {

std::array<double, UMFPACK_CONTROL> umfpack_control() {
    std::array<double, UMFPACK_CONTROL> control{};
    umfpack_zi_defaults(control.data());
    control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;
    control[UMFPACK_ORDERING] = UMFPACK_ORDERING_METIS;
    return control;
}

const double* packed(const ComplexSparse& m) { return reinterpret_cast<const double*>(m.valuePtr()); }
double* packed(ComplexVector& v) { return reinterpret_cast<double*>(v.data()); }
const double* packed(const ComplexVector& v) { return reinterpret_cast<const double*>(v.data()); }

bool same_pattern(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
    if (!a.isCompressed() || !b.isCompressed()) return false;
    return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + a.outerSize() + 1, b.outerIndexPtr()) &&
           std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

}  // namespace

OperatorFunction::OperatorFunction(const AssembledSystem& system, double pole_guard)
    : system_(&system), pole_guard_(pole_guard), shared_pattern_(same_pattern(system.A, system.B)) {
    if (!(pole_guard >= 0.0)) throw InvalidArgument("OperatorFunction: pole guard must be non-negative");
}

OperatorFunction::~OperatorFunction() = default;

std::vector<double> OperatorFunction::poles() const {
    std::vector<double> p;
    for (const PointTerm& t : system_->point_terms) p.push_back(t.sigma);
    return p;
}

bool OperatorFunction::near_pole(Complex eta) const {
    return std::any_of(system_->point_terms.begin(), system_->point_terms.end(), [&](const PointTerm& t) {
        return std::abs(eta - t.sigma) <= pole_guard_ * std::abs(t.sigma);
    });
}

void OperatorFunction::check_shift(Complex eta) const {
    if (near_pole(eta)) {
        throw PoleProximityError(
            fmt::format("shift {}{:+}i lies within the pole guard of an oscillator frequency", eta.real(), eta.imag()));
    }
}

Complex OperatorFunction::coupling(std::size_t j, Complex eta) const {
    const PointTerm& t = system_->point_terms[j];
    return eta * t.sigma / (eta - t.sigma) * t.mass;
}

Complex OperatorFunction::coupling_derivative(std::size_t j, Complex eta) const {
    const PointTerm& t = system_->point_terms[j];
    const Complex d = eta - t.sigma;
    return -t.sigma * t.sigma / (d * d) * t.mass;
}

ComplexSparse OperatorFunction::evaluate(Complex eta) const {
    check_shift(eta);
    const AssembledSystem& s = *system_;
    ComplexSparse f;
    if (shared_pattern_) {
        f = s.A.cast<Complex>();
        const double* bv = s.B.valuePtr();
        Complex* fv = f.valuePtr();
        for (Eigen::Index k = 0; k < f.nonZeros(); ++k) fv[k] -= eta * bv[k];
    } else {
        f = s.A.cast<Complex>() - eta * s.B.cast<Complex>();
    }
    for (std::size_t j = 0; j < s.point_terms.size(); ++j) {
        const Complex c = coupling(j, eta);
        const SparseVector& e = s.point_terms[j].e;
        for (SparseVector::InnerIterator a(e); a; ++a) {
            for (SparseVector::InnerIterator b(e); b; ++b) f.coeffRef(a.index(), b.index()) += c * a.value() * b.value();
        }
    }
    f.makeCompressed();
    return f;
}

ComplexVector OperatorFunction::apply(Complex eta, const ComplexVector& v) const {
    check_shift(eta);
    const AssembledSystem& s = *system_;
    ComplexVector out = s.A.cast<Complex>() * v - eta * (s.B.cast<Complex>() * v);
    for (std::size_t j = 0; j < s.point_terms.size(); ++j) {
        const SparseVector& e = s.point_terms[j].e;
        Complex ev = 0.0;
        for (SparseVector::InnerIterator a(e); a; ++a) ev += a.value() * v(a.index());
        const Complex c = coupling(j, eta) * ev;
        for (SparseVector::InnerIterator a(e); a; ++a) out(a.index()) += c * a.value();
    }
    return out;
}

ComplexVector OperatorFunction::apply_derivative(Complex eta, const ComplexVector& v) const {
    check_shift(eta);
    const AssembledSystem& s = *system_;
    ComplexVector out = -(s.B.cast<Complex>() * v);
    for (std::size_t j = 0; j < s.point_terms.size(); ++j) {
        const SparseVector& e = s.point_terms[j].e;
        Complex ev = 0.0;
        for (SparseVector::InnerIterator a(e); a; ++a) ev += a.value() * v(a.index());
        const Complex c = coupling_derivative(j, eta) * ev;
        for (SparseVector::InnerIterator a(e); a; ++a) out(a.index()) += c * a.value();
    }
    return out;
}

std::shared_ptr<detail::UmfpackSymbolic> OperatorFunction::symbolic(const ComplexSparse& pattern) const {
    std::lock_guard lock(symbolic_mutex_);
    if (symbolic_) return symbolic_;
    auto sym = std::make_shared<detail::UmfpackSymbolic>();
    const auto control = umfpack_control();
    std::array<double, UMFPACK_INFO> info{};
    const int n = static_cast<int>(pattern.rows());
    const int status = umfpack_zi_symbolic(n, n, pattern.outerIndexPtr(), pattern.innerIndexPtr(), packed(pattern),
                                           nullptr, &sym->handle, control.data(), info.data());
    if (status != UMFPACK_OK) throw Error(fmt::format("UMFPACK symbolic analysis failed (status {})", status));
    symbolic_ = std::move(sym);
    return symbolic_;
}

ShiftFactorization OperatorFunction::factorize(Complex eta) const {
    ComplexSparse f = evaluate(eta);
    auto sym = symbolic(f);
    return ShiftFactorization(eta, std::move(f), std::move(sym));
}

ShiftFactorization::ShiftFactorization(Complex shift, ComplexSparse matrix,
                                       std::shared_ptr<detail::UmfpackSymbolic> symbolic)
    : shift_(shift),
      matrix_(std::move(matrix)),
      symbolic_(std::move(symbolic)),
      numeric_(std::make_unique<detail::UmfpackNumeric>()),
      solve_mutex_(std::make_unique<std::mutex>()) {
    const auto control = umfpack_control();
    std::array<double, UMFPACK_INFO> info{};
    const int status = umfpack_zi_numeric(matrix_.outerIndexPtr(), matrix_.innerIndexPtr(), packed(matrix_), nullptr,
                                          symbolic_->handle, &numeric_->handle, control.data(), info.data());
    pivot_rcond_ = info[UMFPACK_RCOND];
    if (status == UMFPACK_WARNING_singular_matrix) {
        throw SingularShiftError(fmt::format("F(eta) is singular at eta = {}{:+}i", shift.real(), shift.imag()));
    }
    if (status != UMFPACK_OK) throw Error(fmt::format("UMFPACK numeric factorization failed (status {})", status));
    if (!std::isfinite(pivot_rcond_)) {
        throw SingularShiftError(fmt::format("F(eta) factorization is not finite at eta = {}{:+}i", shift.real(),
                                             shift.imag()));
    }
}

ShiftFactorization::ShiftFactorization(ShiftFactorization&&) noexcept = default;
ShiftFactorization& ShiftFactorization::operator=(ShiftFactorization&&) noexcept = default;
ShiftFactorization::~ShiftFactorization() = default;

namespace {

ComplexVector umf_solve(int sys, const ComplexSparse& m, void* numeric, const ComplexVector& y) {
    const auto control = umfpack_control();
    std::array<double, UMFPACK_INFO> info{};
    ComplexVector x(y.size());
    const int status = umfpack_zi_solve(sys, m.outerIndexPtr(), m.innerIndexPtr(), packed(m), nullptr, packed(x),
                                        nullptr, packed(y), nullptr, numeric, control.data(), info.data());
    if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix) {
        throw Error(fmt::format("UMFPACK solve failed (status {})", status));
    }
    return x;
}

}  // namespace

ComplexVector ShiftFactorization::solve(const ComplexVector& y) const {
    if (y.size() != matrix_.rows()) throw InvalidArgument("ShiftFactorization::solve: dimension mismatch");
    std::lock_guard lock(*solve_mutex_);
    return umf_solve(UMFPACK_A, matrix_, numeric_->handle, y);
}

double ShiftFactorization::condition_estimate() const {
    const Eigen::Index n = matrix_.rows();
    double norm_f = 0.0;
    for (Eigen::Index c = 0; c < matrix_.outerSize(); ++c) {
        double s = 0.0;
        for (ComplexSparse::InnerIterator it(matrix_, c); it; ++it) s += std::abs(it.value());
        norm_f = std::max(norm_f, s);
    }
    std::lock_guard lock(*solve_mutex_);
    ComplexVector x = ComplexVector::Constant(n, Complex(1.0 / static_cast<double>(n), 0.0));
    double estimate = 0.0;
    Eigen::Index last = -1;
    for (int it = 0; it < 5; ++it) {
        const ComplexVector y = umf_solve(UMFPACK_A, matrix_, numeric_->handle, x);
        const double est = y.cwiseAbs().sum();
        if (!std::isfinite(est)) return std::numeric_limits<double>::infinity();
        if (it > 0 && est <= estimate) break;
        estimate = est;
        ComplexVector xi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double a = std::abs(y(i));
            xi(i) = a > 0.0 ? y(i) / a : Complex(1.0, 0.0);
        }
        const ComplexVector z = umf_solve(UMFPACK_At, matrix_, numeric_->handle, xi);
        Eigen::Index j = 0;
        const double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= std::real(z.dot(x)) || j == last) break;
        last = j;
        x.setZero();
        x(j) = 1.0;
    }
    return norm_f * estimate;
}

double relative_residual(const ComplexSparse& f, const ComplexVector& x, const ComplexVector& y) {
    const double ny = y.norm();
    const double r = (f * x - y).norm();
    return ny > 0.0 ? r / ny : r;
}

}  // namespace platesim
