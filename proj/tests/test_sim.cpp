#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "platesim/error.hpp"
#include "platesim/oracle.hpp"
#include "platesim/sim.hpp"
#include "support.hpp"

using namespace platesim;

namespace {

// Square of half-width hw around re with the real axis at one third of its height.
SearchBox axis_box(double re, double hw) { return {Complex(re, hw / 3.0), hw}; }

std::vector<Complex> oracle_in(const fixtures::Fixture& fx, double lo, double hi) {
    return oracle::in_box(oracle::dense_eig(oracle::build_pencil(fx.system)), lo, hi, -100.0, 100.0);
}

}  // namespace

TEST(SimConfig, Validation) {
    SimConfig c;
    EXPECT_NO_THROW(c.validate());
    c.m_per_edge = 1;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = SimConfig{};
    c.beta = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = SimConfig{};
    c.alpha = -1.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    c = SimConfig{};
    c.probes = 0;
    EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Indicator, InvariantUnderProbeScaling) {
    const auto fx = fixtures::example1();
    const ComplexVector y = random_probe(fx->f->size(), 5);
    for (const SearchBox& b : {axis_box(1270.0, 40.0), axis_box(2500.0, 300.0)}) {
        const double base = indicator(b, *fx->f, y, 8);
        for (Complex s : {Complex(1e-3), Complex(7.5, -2.0), Complex(0.0, 1e4)}) {
            const ComplexVector ys = s * y;
            EXPECT_NEAR(indicator(b, *fx->f, ys, 8), base, 1e-12 * std::max(base, 1.0));
        }
    }
}

TEST(Indicator, SeparatesOccupiedFromEmptyBoxes) {
    const auto fx = fixtures::example1();
    const auto eigs = oracle_in(*fx, 1000.0, 2000.0);
    ASSERT_EQ(eigs.size(), 1u);
    const double lam = eigs[0].real();
    const ComplexVector y = random_probe(fx->f->size(), 9);
    EXPECT_GT(indicator(axis_box(lam, 20.0), *fx->f, y, 8), 1.0);
    EXPECT_LT(indicator(axis_box(lam + 100.0, 20.0), *fx->f, y, 8), 1e-6);
    EXPECT_LT(indicator(axis_box(2500.0, 400.0), *fx->f, y, 8), 1e-6);
}

TEST(Indicator, StaysLargeOnNestedBoxesAroundAnEigenvalue) {
    const auto fx = fixtures::example1();
    const double lam = oracle_in(*fx, 1000.0, 2000.0).at(0).real();
    const ComplexVector y = random_probe(fx->f->size(), 9);
    for (double hw = 100.0; hw > 1e-3; hw /= 10.0) {
        EXPECT_GT(indicator(axis_box(lam + hw / 7.0, hw), *fx->f, y, 8), 1e-6) << hw;
    }
}

TEST(Indicator, RefusesBoxesAroundPoles) {
    const auto fx = fixtures::example1();
    const ComplexVector y = random_probe(fx->f->size(), 1);
    EXPECT_THROW((void)indicator(axis_box(10000.0, 100.0), *fx->f, y, 8), PoleProximityError);
}

TEST(FindEigenvalues, EmptyBoxGivesNothing) {
    const auto fx = fixtures::example1();
    SimStats stats;
    const auto r = find_eigenvalues(axis_box(2500.0, 400.0), *fx->f, SimConfig{}, &stats);
    EXPECT_TRUE(r.empty());
    EXPECT_EQ(stats.boxes, 1u);
}

TEST(FindEigenvalues, MatchesDenseEigenvaluesInRegion) {
    const auto fx = fixtures::example3();
    const auto poles = fx->f->poles();
    const auto tiles = tile_region(1000.0, 2600.0, -100.0, 100.0, poles, 1e-3);
    for (const SearchBox& t : tiles) {
        for (double p : poles) EXPECT_FALSE(t.contains(Complex(p, 0.0)));
    }
    const auto sim = find_eigenvalues(std::span<const SearchBox>(tiles), *fx->f, SimConfig{});
    const auto ref = oracle_in(*fx, 1000.0, 2600.0);
    ASSERT_EQ(ref.size(), 2u);
    ASSERT_EQ(sim.size(), ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
        EXPECT_LT(std::abs(sim[k].lambda - ref[k]), 1e-6 * std::abs(ref[k]));
    }
}

TEST(FindEigenvalues, Deterministic) {
    const auto fx = fixtures::example1();
    const SearchBox box = axis_box(1300.0, 100.0);
    SimStats s1;
    SimStats s2;
    const auto a = find_eigenvalues(box, *fx->f, SimConfig{}, &s1);
    const auto b = find_eigenvalues(box, *fx->f, SimConfig{}, &s2);
    ASSERT_EQ(a.size(), 1u);
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(a[0].lambda, b[0].lambda);
    EXPECT_EQ(s1.boxes, s2.boxes);
    EXPECT_EQ(s1.solves, s2.solves);
    EXPECT_LE(a[0].box_half_width, 1e-6 * box.half_width);
}

TEST(FindEigenvalues, DepthCap) {
    const auto fx = fixtures::example1();
    SimConfig c;
    c.max_depth = 3;
    EXPECT_THROW((void)find_eigenvalues(axis_box(1300.0, 100.0), *fx->f, c), MaxDepthError);
}

TEST(Refine, EigenvectorResidual) {
    const auto fx = fixtures::example1();
    const double lam = oracle_in(*fx, 1000.0, 2000.0).at(0).real();
    const EigenResult coarse = refine_eigenpair(Complex(lam * (1 + 1e-9), 0.0), *fx->f, 3);
    ASSERT_TRUE(coarse.eigenvector.has_value());
    EXPECT_TRUE(coarse.converged);
    EXPECT_LT(coarse.residual, 1e-8);
    const EigenResult other_seed = refine_eigenpair(Complex(lam * (1 + 1e-9), 0.0), *fx->f, 11);
    EXPECT_LT(other_seed.residual, 1e-8);

    const EigenResult p = polish_eigenpair(Complex(lam * (1 + 1e-4), 0.0), *fx->f);
    EXPECT_TRUE(p.polished);
    EXPECT_TRUE(p.converged);
    EXPECT_LT(std::abs(p.lambda - lam), 1e-9 * lam);
}

TEST(TileRegion, CoversRegionAndAvoidsPoles) {
    const std::vector<double> poles{2000.0, 4000.0};
    const auto tiles = tile_region(1500.0, 6000.0, -100.0, 100.0, poles, 1e-3, 400.0);
    ASSERT_FALSE(tiles.empty());
    for (const SearchBox& t : tiles) {
        EXPECT_LE(2.0 * t.half_width, 400.0 + 1e-9);
        for (double p : poles) EXPECT_GE(std::abs(t.center.real() - p), t.half_width);
        if (t.im_min() < 0.0 && t.im_max() > 0.0) EXPECT_NEAR(t.center.imag(), t.half_width / 3.0, 1e-9);
    }
    for (double x = 1500.0; x < 6000.0; x += 0.37) {
        if (std::abs(x - 2000.0) < 1e-3 || std::abs(x - 4000.0) < 1e-3) continue;
        const bool covered =
            std::any_of(tiles.begin(), tiles.end(), [&](const SearchBox& t) { return t.contains(Complex(x, 0.0)); });
        EXPECT_TRUE(covered) << x;
    }
}
