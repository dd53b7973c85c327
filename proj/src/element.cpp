#include "platesim/element.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "platesim/error.hpp"
#include "platesim/quadrature.hpp"

namespace platesim::bfs {

namespace {

// Corner (a, b) offsets in the reference square, counter-clockwise.
constexpr std::array<std::array<int, 2>, 4> kCorners{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

// 1D physical-unit Hermite function of end `end` (0|1), `slope` selects the derivative DOF.
// Returns d^order/dx^order of the function evaluated at xi.
double hermite_physical(const std::array<double, 4>& ref, int end, bool slope, double h, int order) {
    const double v = ref[static_cast<std::size_t>(2 * end + (slope ? 1 : 0))];
    double scale = slope ? h : 1.0;
    for (int k = 0; k < order; ++k) scale /= h;
    return v * scale;
}

}  // namespace

std::array<double, 4> hermite_1d(double t, int deriv_order) {
    const double t2 = t * t;
    const double t3 = t2 * t;
    switch (deriv_order) {
        case 0:
            return {2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2};
        case 1:
            return {6 * t2 - 6 * t, 3 * t2 - 4 * t + 1, -6 * t2 + 6 * t, 3 * t2 - 2 * t};
        case 2:
            return {12 * t - 6, 6 * t - 4, -12 * t + 6, 6 * t - 2};
        case 3:
            return {12.0, 6.0, -12.0, 6.0};
        default:
            return {0.0, 0.0, 0.0, 0.0};
    }
}

LocalVector basis(const Rect& cell, Point2 p, int ox, int oy) {
    const double hx = cell.xmax - cell.xmin;
    const double hy = cell.ymax - cell.ymin;
    const double xi = (p.x - cell.xmin) / hx;
    const double eta = (p.y - cell.ymin) / hy;
    const auto fx = hermite_1d(xi, ox);
    const auto fy = hermite_1d(eta, oy);
    LocalVector out;
    for (int c = 0; c < 4; ++c) {
        const int a = kCorners[static_cast<std::size_t>(c)][0];
        const int b = kCorners[static_cast<std::size_t>(c)][1];
        const double vx = hermite_physical(fx, a, false, hx, ox);
        const double sx = hermite_physical(fx, a, true, hx, ox);
        const double vy = hermite_physical(fy, b, false, hy, oy);
        const double sy = hermite_physical(fy, b, true, hy, oy);
        out(local_index(c, DofKind::value)) = vx * vy;
        out(local_index(c, DofKind::dx)) = sx * vy;
        out(local_index(c, DofKind::dy)) = vx * sy;
        out(local_index(c, DofKind::dxy)) = sx * sy;
    }
    return out;
}

LocalMatrix local_stiffness(double rigidity, double poisson, double hx, double hy, int gauss_points) {
    if (!(rigidity > 0.0)) throw InvalidArgument(fmt::format("local_stiffness: rigidity must be positive, got {}", rigidity));
    if (!(poisson > 0.0 && poisson < 0.5)) {
        throw InvalidArgument(fmt::format("local_stiffness: Poisson ratio must lie in (0, 1/2), got {}", poisson));
    }
    if (!(hx > 0.0 && hy > 0.0)) throw InvalidArgument("local_stiffness: cell sizes must be positive");
    const Rect cell{0.0, hx, 0.0, hy};
    const GaussRule g = gauss_legendre(gauss_points);
    LocalMatrix k = LocalMatrix::Zero();
    for (std::size_t qi = 0; qi < g.nodes.size(); ++qi) {
        for (std::size_t qj = 0; qj < g.nodes.size(); ++qj) {
            const Point2 p{0.5 * hx * (g.nodes[qi] + 1.0), 0.5 * hy * (g.nodes[qj] + 1.0)};
            const double w = 0.25 * hx * hy * g.weights[qi] * g.weights[qj] * rigidity;
            const LocalVector uxx = basis(cell, p, 2, 0);
            const LocalVector uyy = basis(cell, p, 0, 2);
            const LocalVector uxy = basis(cell, p, 1, 1);
            const LocalVector lap = uxx + uyy;
            k.noalias() += w * (lap * lap.transpose() +
                                (1.0 - poisson) * (2.0 * uxy * uxy.transpose() - uxx * uyy.transpose() -
                                                   uyy * uxx.transpose()));
        }
    }
    return k;
}

LocalMatrix local_mass(double rho_d, double hx, double hy, int gauss_points) {
    if (!(rho_d > 0.0)) throw InvalidArgument(fmt::format("local_mass: areal density must be positive, got {}", rho_d));
    if (!(hx > 0.0 && hy > 0.0)) throw InvalidArgument("local_mass: cell sizes must be positive");
    const Rect cell{0.0, hx, 0.0, hy};
    const GaussRule g = gauss_legendre(gauss_points);
    LocalMatrix m = LocalMatrix::Zero();
    for (std::size_t qi = 0; qi < g.nodes.size(); ++qi) {
        for (std::size_t qj = 0; qj < g.nodes.size(); ++qj) {
            const Point2 p{0.5 * hx * (g.nodes[qi] + 1.0), 0.5 * hy * (g.nodes[qj] + 1.0)};
            const double w = 0.25 * hx * hy * g.weights[qi] * g.weights[qj] * rho_d;
            const LocalVector n = basis(cell, p, 0, 0);
            m.noalias() += w * n * n.transpose();
        }
    }
    return m;
}

LocalVector eval_vector(const Rect& cell, Point2 p) {
    const double tol = 1e-12 * std::max(cell.xmax - cell.xmin, cell.ymax - cell.ymin);
    if (p.x < cell.xmin - tol || p.x > cell.xmax + tol || p.y < cell.ymin - tol || p.y > cell.ymax + tol) {
        throw InvalidArgument(fmt::format("eval_vector: point ({}, {}) is outside the cell [{}, {}] x [{}, {}]", p.x,
                                          p.y, cell.xmin, cell.xmax, cell.ymin, cell.ymax));
    }
    return basis(cell, p, 0, 0);
}

}  // namespace platesim::bfs
