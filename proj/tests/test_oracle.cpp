#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "platesim/error.hpp"
#include "platesim/oracle.hpp"
#include "support.hpp"

using namespace platesim;

TEST(Oracle, BlockStructure) {
    const auto fx = fixtures::example3();
    const auto p = oracle::build_pencil(fx->system);
    const Eigen::Index n = fx->system.n_free();
    EXPECT_EQ(p.n_plate, n);
    EXPECT_EQ(p.n_oscillators, 2);
    EXPECT_EQ(p.L.rows(), n + 2);
    EXPECT_EQ(p.L(n, n), 2000.0);
    EXPECT_EQ(p.L(n + 1, n + 1), 4000.0);
    EXPECT_EQ(p.R(n + 1, n + 1), 1.0);
    EXPECT_EQ(p.R.bottomLeftCorner(2, n).norm(), 0.0);
    EXPECT_EQ(p.L.topRightCorner(n, 2).norm(), 0.0);
}

TEST(Oracle, EliminationReproducesOperatorFunction) {
    const auto fx = fixtures::example3();
    const auto p = oracle::build_pencil(fx->system);
    for (Complex eta : {Complex(1500, 20), Complex(3000, 0), Complex(5000, -3)}) {
        const Eigen::MatrixXcd schur = oracle::eliminate_oscillators(p, eta);
        const Eigen::MatrixXcd direct = Eigen::MatrixXcd(fx->f->evaluate(eta));
        EXPECT_LT((schur - direct).norm(), 1e-12 * direct.norm());
    }
}

TEST(Oracle, WithoutOscillatorsReducesToLinearPencil) {
    const RectMesh m = build_mesh(PlateDomain::unit_square(), 0.2);
    const DofMap dofs(m);
    const AssembledSystem s = assemble(m, PlateProblem{}, dofs);
    const auto eigs = oracle::dense_eig(oracle::build_pencil(s));
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ref{Eigen::MatrixXd(s.A), Eigen::MatrixXd(s.B)};
    ASSERT_EQ(eigs.size(), static_cast<std::size_t>(s.n_free()));
    for (std::size_t k = 0; k < eigs.size(); ++k) {
        const double r = ref.eigenvalues()(static_cast<Eigen::Index>(k));
        EXPECT_LT(std::abs(eigs[k] - r), 1e-9 * r);
    }
}

TEST(Oracle, EigenpairsSolveTheNonlinearProblem) {
    const auto fx = fixtures::example1();
    const auto pairs = oracle::dense_eigenpairs(oracle::build_pencil(fx->system));
    EXPECT_EQ(pairs.size(), static_cast<std::size_t>(fx->system.n_free() + 1));
    int checked = 0;
    for (const auto& pr : pairs) {
        EXPECT_LT(std::abs(pr.lambda.imag()), 1e-8 * std::abs(pr.lambda));
        if (pr.lambda.real() > 8000.0 || fx->f->near_pole(pr.lambda)) continue;
        const ComplexVector r = fx->f->apply(pr.lambda, pr.u);
        const double scale = std::abs(pr.lambda) * pr.u.norm();
        EXPECT_LT(r.norm(), 1e-9 * scale) << pr.lambda;
        ++checked;
    }
    EXPECT_GE(checked, 3);
}

TEST(Oracle, EachOscillatorAddsOneEigenvalue) {
    const RectMesh m = build_mesh(PlateDomain::unit_square(), 0.2, fixtures::example3_problem().oscillator_points());
    const DofMap dofs(m);
    PlateProblem one = fixtures::example3_problem();
    one.oscillators.pop_back();
    const auto e0 = oracle::dense_eig(oracle::build_pencil(assemble(m, PlateProblem{}, dofs)));
    const auto e1 = oracle::dense_eig(oracle::build_pencil(assemble(m, one, dofs)));
    const auto e2 = oracle::dense_eig(oracle::build_pencil(assemble(m, fixtures::example3_problem(), dofs)));
    EXPECT_EQ(e1.size(), e0.size() + 1);
    EXPECT_EQ(e2.size(), e0.size() + 2);
    // Below the lowest pole the coupling only lowers eigenvalues.
    EXPECT_LT(e1[0].real(), e0[0].real());
    EXPECT_LT(e2[0].real(), 2000.0);
}

TEST(Oracle, InBoxIsHalfOpen) {
    const std::vector<Complex> e{{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.5}};
    EXPECT_EQ(oracle::in_box(e, 1.0, 2.0, -1.0, 1.0).size(), 1u);
    EXPECT_EQ(oracle::in_box(e, 0.0, 4.0, -1.0, 0.5).size(), 2u);
}

TEST(Oracle, SizeGuard) {
    const auto fx = fixtures::example1(0.1);
    EXPECT_THROW((void)oracle::build_pencil(fx->system, 100), SizeGuardError);
}
