#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "platesim/element.hpp"
#include "platesim/error.hpp"

using namespace platesim;
using bfs::DofKind;
using bfs::LocalMatrix;
using bfs::LocalVector;

namespace {

std::array<Point2, 4> corners(const Rect& r) {
    return {{{r.xmin, r.ymin}, {r.xmax, r.ymin}, {r.xmax, r.ymax}, {r.xmin, r.ymax}}};
}

// Local DOFs of a function given as {u, u_x, u_y, u_xy}.
template <class F>
LocalVector nodal(const Rect& r, F&& f) {
    LocalVector v;
    const auto c = corners(r);
    for (int k = 0; k < 4; ++k) {
        const auto d = f(c[static_cast<std::size_t>(k)]);
        for (int q = 0; q < 4; ++q) v(bfs::local_index(k, static_cast<DofKind>(q))) = d[static_cast<std::size_t>(q)];
    }
    return v;
}

// Bicubic test function with all its first and mixed derivatives.
struct Bicubic {
    std::array<double, 16> c{};  // c[4*i+j] multiplies x^i y^j

    static double p(double t, int k, int d) {
        if (d > k) return 0.0;
        double coef = 1.0;
        for (int q = 0; q < d; ++q) coef *= k - q;
        return coef * std::pow(t, k - d);
    }
    double eval(Point2 x, int ox, int oy) const {
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s += c[static_cast<std::size_t>(4 * i + j)] * p(x.x, i, ox) * p(x.y, j, oy);
        return s;
    }
    std::array<double, 4> dofs(Point2 x) const { return {eval(x, 0, 0), eval(x, 1, 0), eval(x, 0, 1), eval(x, 1, 1)}; }
};

}  // namespace

TEST(Hermite, MidpointValues) {
    const auto h = bfs::hermite_1d(0.5, 0);
    EXPECT_DOUBLE_EQ(h[0], 0.5);
    EXPECT_DOUBLE_EQ(h[1], 0.125);
    EXPECT_DOUBLE_EQ(h[2], 0.5);
    EXPECT_DOUBLE_EQ(h[3], -0.125);
}

TEST(Hermite, EndpointInterpolation) {
    const auto v0 = bfs::hermite_1d(0.0, 0);
    const auto d0 = bfs::hermite_1d(0.0, 1);
    const auto v1 = bfs::hermite_1d(1.0, 0);
    const auto d1 = bfs::hermite_1d(1.0, 1);
    const std::array<double, 4> e0{1, 0, 0, 0};
    const std::array<double, 4> e1{0, 1, 0, 0};
    const std::array<double, 4> e2{0, 0, 1, 0};
    const std::array<double, 4> e3{0, 0, 0, 1};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(v0[k], e0[k], 1e-15);
        EXPECT_NEAR(d0[k], e1[k], 1e-15);
        EXPECT_NEAR(v1[k], e2[k], 1e-15);
        EXPECT_NEAR(d1[k], e3[k], 1e-15);
    }
}

TEST(Element, ReproducesBicubicsExactly) {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Bicubic f;
    for (double& c : f.c) c = u(gen);
    const Rect r{0.3, 0.55, -0.2, 0.4};
    const LocalVector dofs = nodal(r, [&](Point2 p) { return f.dofs(p); });
    for (int s = 0; s < 20; ++s) {
        const Point2 p{r.xmin + (r.xmax - r.xmin) * (u(gen) + 1) / 2, r.ymin + (r.ymax - r.ymin) * (u(gen) + 1) / 2};
        for (auto [ox, oy] : {std::pair{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}, {1, 1}}) {
            EXPECT_NEAR(bfs::basis(r, p, ox, oy).dot(dofs), f.eval(p, ox, oy), 1e-10) << ox << oy;
        }
    }
}

TEST(Element, C1AcrossSharedEdge) {
    // Cells [0,1]x[0,1] and [1,2.5]x[0,1] share the edge x = 1 with corners 1 and 2 of the
    // left cell equal to corners 0 and 3 of the right cell.
    const Rect left{0, 1, 0, 1};
    const Rect right{1, 2.5, 0, 1};
    std::mt19937 gen(11);
    std::normal_distribution<double> n;
    LocalVector a;
    for (int i = 0; i < 16; ++i) a(i) = n(gen);
    LocalVector b;
    for (int i = 0; i < 16; ++i) b(i) = n(gen);
    for (int q = 0; q < 4; ++q) {
        const auto kind = static_cast<DofKind>(q);
        b(bfs::local_index(0, kind)) = a(bfs::local_index(1, kind));
        b(bfs::local_index(3, kind)) = a(bfs::local_index(2, kind));
    }
    for (double y : {0.0, 0.13, 0.5, 0.77, 1.0}) {
        const Point2 p{1.0, y};
        for (auto [ox, oy] : {std::pair{0, 0}, {1, 0}, {0, 1}}) {
            EXPECT_NEAR(bfs::basis(left, p, ox, oy).dot(a), bfs::basis(right, p, ox, oy).dot(b), 1e-12);
        }
    }
}

TEST(Element, StiffnessAndMassAreSymmetric) {
    const LocalMatrix k = bfs::local_stiffness(2.5, 0.3, 0.2, 0.35);
    const LocalMatrix m = bfs::local_mass(1.7, 0.2, 0.35);
    EXPECT_LT((k - k.transpose()).norm(), 1e-12 * k.norm());
    EXPECT_LT((m - m.transpose()).norm(), 1e-14 * m.norm());
    Eigen::SelfAdjointEigenSolver<LocalMatrix> es(m);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(Element, StiffnessNullspaceIsAffineFunctions) {
    for (double nu : {0.3, 1e-4, 0.4999}) {
        const LocalMatrix k = bfs::local_stiffness(1.0, nu, 0.4, 0.25);
        Eigen::SelfAdjointEigenSolver<LocalMatrix> es(k);
        const auto ev = es.eigenvalues();
        const double scale = ev.maxCoeff();
        int zeros = 0;
        for (int i = 0; i < 16; ++i) zeros += std::abs(ev(i)) < 1e-10 * scale ? 1 : 0;
        EXPECT_EQ(zeros, 3) << "nu = " << nu;

        const Rect r{0, 0.4, 0, 0.25};
        for (auto f : {+[](Point2) { return std::array<double, 4>{1, 0, 0, 0}; },
                       +[](Point2 p) { return std::array<double, 4>{p.x, 1, 0, 0}; },
                       +[](Point2 p) { return std::array<double, 4>{p.y, 0, 1, 0}; }}) {
            EXPECT_LT((k * nodal(r, f)).norm(), 1e-10 * scale);
        }
        // xy has u_xy = 1 and energy 2 (1 - nu) |cell|.
        const LocalVector xy = nodal(r, [](Point2 p) { return std::array<double, 4>{p.x * p.y, p.y, p.x, 1}; });
        EXPECT_NEAR(xy.dot(k * xy), 2.0 * (1.0 - nu) * 0.1, 1e-12);
    }
}

TEST(Element, EnergyOfQuadratics) {
    const Rect r{0, 0.5, 0, 0.25};
    const double area = 0.125;
    const double nu = 0.3;
    const LocalMatrix k = bfs::local_stiffness(1.0, nu, 0.5, 0.25);
    const LocalVector x2 = nodal(r, [](Point2 p) { return std::array<double, 4>{p.x * p.x, 2 * p.x, 0, 0}; });
    const LocalVector y2 = nodal(r, [](Point2 p) { return std::array<double, 4>{p.y * p.y, 0, 2 * p.y, 0}; });
    EXPECT_NEAR(x2.dot(k * x2), 4.0 * area, 1e-12);
    EXPECT_NEAR(y2.dot(k * y2), 4.0 * area, 1e-12);
    EXPECT_NEAR(x2.dot(k * y2), 4.0 * nu * area, 1e-12);
}

TEST(Element, FourPointRuleIsExact) {
    const LocalMatrix k4 = bfs::local_stiffness(1.3, 0.25, 0.3, 0.7, 4);
    const LocalMatrix k8 = bfs::local_stiffness(1.3, 0.25, 0.3, 0.7, 8);
    const LocalMatrix m4 = bfs::local_mass(1.0, 0.3, 0.7, 4);
    const LocalMatrix m8 = bfs::local_mass(1.0, 0.3, 0.7, 8);
    EXPECT_LT((k4 - k8).norm(), 1e-12 * k8.norm());
    EXPECT_LT((m4 - m8).norm(), 1e-13 * m8.norm());
    const LocalMatrix k2 = bfs::local_stiffness(1.3, 0.25, 0.3, 0.7, 2);
    EXPECT_GT((k2 - k8).norm(), 1e-6 * k8.norm());
}

TEST(Element, MassValueDiagonal) {
    const double hx = 0.3;
    const double hy = 0.7;
    const LocalMatrix m = bfs::local_mass(2.0, hx, hy);
    const double expected = 2.0 * (13.0 / 35.0) * (13.0 / 35.0) * hx * hy;
    for (int c = 0; c < 4; ++c) {
        const int i = bfs::local_index(c, DofKind::value);
        EXPECT_NEAR(m(i, i), expected, 1e-14);
    }
    // Total mass: the value DOFs of u = 1 pick out rho_d |cell|.
    const LocalVector one = nodal(Rect{0, hx, 0, hy}, [](Point2) { return std::array<double, 4>{1, 0, 0, 0}; });
    EXPECT_NEAR(one.dot(m * one), 2.0 * hx * hy, 1e-14);
}

TEST(EvalVector, CornerAndCentre) {
    const Rect r{1.0, 1.5, 2.0, 2.25};
    const LocalVector corner = bfs::eval_vector(r, {1.5, 2.25});
    for (int i = 0; i < 16; ++i) EXPECT_NEAR(corner(i), i == bfs::local_index(2, DofKind::value) ? 1.0 : 0.0, 1e-15);

    const LocalVector centre = bfs::eval_vector(r, {1.25, 2.125});
    for (int c = 0; c < 4; ++c) EXPECT_NEAR(centre(bfs::local_index(c, DofKind::value)), 0.25, 1e-15);
    // d/dx coefficient is h_x * H1(1/2) * H0(1/2) in magnitude.
    EXPECT_NEAR(std::abs(centre(bfs::local_index(0, DofKind::dx))), 0.5 * 0.125 * 0.5, 1e-15);
    EXPECT_NEAR(std::abs(centre(bfs::local_index(0, DofKind::dxy))), 0.5 * 0.125 * 0.25 * 0.125, 1e-15);

    EXPECT_THROW((void)bfs::eval_vector(r, {0.9, 2.1}), InvalidArgument);
}
