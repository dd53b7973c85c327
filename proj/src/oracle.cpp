#include "platesim/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "platesim/error.hpp"

namespace platesim::oracle {

AugmentedPencil build_pencil(const AssembledSystem& system, Eigen::Index size_guard) {
    const Eigen::Index n = system.n_free();
    const auto p = static_cast<Eigen::Index>(system.point_terms.size());
    if (n + p > size_guard) {
        throw SizeGuardError(fmt::format(
            "dense oracle needs a pencil of order {} but the guard is {}; use a coarser mesh", n + p, size_guard));
    }
    AugmentedPencil pen;
    pen.n_plate = n;
    pen.n_oscillators = p;
    pen.L = Eigen::MatrixXd::Zero(n + p, n + p);
    pen.R = Eigen::MatrixXd::Zero(n + p, n + p);
    pen.L.topLeftCorner(n, n) = Eigen::MatrixXd(system.A);
    pen.R.topLeftCorner(n, n) = Eigen::MatrixXd(system.B);
    for (Eigen::Index j = 0; j < p; ++j) {
        const PointTerm& t = system.point_terms[static_cast<std::size_t>(j)];
        for (SparseVector::InnerIterator it(t.e); it; ++it) {
            pen.L(n + j, it.index()) = -t.sigma * it.value();
            pen.R(it.index(), n + j) = t.mass * it.value();
        }
        pen.L(n + j, n + j) = t.sigma;
        pen.R(n + j, n + j) = 1.0;
    }
    return pen;
}

namespace {

bool finite_eigenvalue(std::complex<double> alpha, double beta) {
    if (beta == 0.0) return false;
    const std::complex<double> lambda = alpha / beta;
    return std::isfinite(lambda.real()) && std::isfinite(lambda.imag()) && std::abs(lambda) <= kInfinityGuard;
}

bool by_real(const std::complex<double>& a, const std::complex<double>& b) {
    return std::pair{a.real(), a.imag()} < std::pair{b.real(), b.imag()};
}

}  // namespace

std::vector<std::complex<double>> dense_eig(const AugmentedPencil& pencil) {
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(pencil.L, pencil.R, false);
    if (ges.info() != Eigen::Success) throw Error("dense_eig: QZ iteration did not converge");
    std::vector<std::complex<double>> out;
    for (Eigen::Index k = 0; k < ges.alphas().size(); ++k) {
        if (finite_eigenvalue(ges.alphas()(k), ges.betas()(k))) out.push_back(ges.alphas()(k) / ges.betas()(k));
    }
    std::sort(out.begin(), out.end(), by_real);
    return out;
}

std::vector<Eigenpair> dense_eigenpairs(const AugmentedPencil& pencil) {
    Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(pencil.L, pencil.R, true);
    if (ges.info() != Eigen::Success) throw Error("dense_eigenpairs: QZ iteration did not converge");
    const Eigen::MatrixXcd v = ges.eigenvectors();
    std::vector<Eigenpair> out;
    for (Eigen::Index k = 0; k < ges.alphas().size(); ++k) {
        if (!finite_eigenvalue(ges.alphas()(k), ges.betas()(k))) continue;
        Eigenpair e;
        e.lambda = ges.alphas()(k) / ges.betas()(k);
        e.u = v.col(k).head(pencil.n_plate);
        e.zeta = v.col(k).tail(pencil.n_oscillators);
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), [](const Eigenpair& a, const Eigenpair& b) { return by_real(a.lambda, b.lambda); });
    return out;
}

std::vector<std::complex<double>> in_box(const std::vector<std::complex<double>>& eigs, double re_min, double re_max,
                                         double im_min, double im_max) {
    std::vector<std::complex<double>> out;
    std::copy_if(eigs.begin(), eigs.end(), std::back_inserter(out), [&](const std::complex<double>& z) {
        return z.real() >= re_min && z.real() < re_max && z.imag() >= im_min && z.imag() < im_max;
    });
    return out;
}

Eigen::MatrixXcd eliminate_oscillators(const AugmentedPencil& pencil, std::complex<double> lambda) {
    const Eigen::Index n = pencil.n_plate;
    const Eigen::Index p = pencil.n_oscillators;
    const Eigen::MatrixXcd m = pencil.L.cast<std::complex<double>>() - lambda * pencil.R.cast<std::complex<double>>();
    if (p == 0) return m;
    const Eigen::MatrixXcd d = m.bottomRightCorner(p, p);
    return m.topLeftCorner(n, n) - m.topRightCorner(n, p) * d.partialPivLu().solve(m.bottomLeftCorner(p, n));
}

}  // namespace platesim::oracle
