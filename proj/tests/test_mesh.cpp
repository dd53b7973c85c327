#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "platesim/error.hpp"
#include "platesim/mesh.hpp"

using namespace platesim;

namespace {

bool has_line(std::span<const double> lines, double v) {
    return std::any_of(lines.begin(), lines.end(), [&](double x) { return std::abs(x - v) < 1e-14; });
}

double max_gap(std::span<const double> lines) {
    double g = 0.0;
    for (std::size_t k = 1; k < lines.size(); ++k) g = std::max(g, lines[k] - lines[k - 1]);
    return g;
}

double cell_area_sum(const RectMesh& m) {
    double a = 0.0;
    for (std::size_t c = 0; c < m.num_cells(); ++c) a += m.cell_rect(CellId{c}).area();
    return a;
}

std::set<std::pair<double, double>> node_set(const RectMesh& m) {
    std::set<std::pair<double, double>> s;
    for (std::size_t n = 0; n < m.num_nodes(); ++n) {
        const Point2 p = m.node_coords(NodeId{n});
        s.emplace(p.x, p.y);
    }
    return s;
}

}  // namespace

TEST(PlateDomain, RejectsOverlapsAndDisconnectedPieces) {
    EXPECT_THROW(PlateDomain({{0, 1, 0, 1}, {0.5, 1.5, 0, 1}}), InvalidArgument);
    EXPECT_THROW(PlateDomain({{0, 1, 0, 1}, {2, 3, 0, 1}}), InvalidArgument);
    EXPECT_THROW(PlateDomain({{0, 0, 0, 1}}), InvalidArgument);
    EXPECT_THROW(PlateDomain(std::vector<Rect>{}), InvalidArgument);
    EXPECT_NO_THROW(PlateDomain({{0, 1, 0, 1}, {1, 2, 0, 1}}));
}

TEST(PlateDomain, LShapeGeometry) {
    const PlateDomain d = PlateDomain::l_shape();
    EXPECT_DOUBLE_EQ(d.area(), 3.0);
    EXPECT_TRUE(d.contains_interior({-0.5, -0.5}));
    EXPECT_TRUE(d.contains_interior({0.5, 0.5}));
    EXPECT_TRUE(d.contains_interior({-0.5, 0.0}));  // internal seam between rectangles
    EXPECT_FALSE(d.contains({0.5, -0.5}));
    EXPECT_TRUE(d.contains({0.0, 0.0}));
    EXPECT_FALSE(d.contains_interior({0.0, 0.0}));
    EXPECT_FALSE(d.contains_interior({0.0, -0.5}));
}

TEST(BuildMesh, ExampleOneInsertsOscillatorLines) {
    const Point2 x0{9.0 / 26.0, 19.0 / 26.0};
    const RectMesh m = build_mesh(PlateDomain::unit_square(), 0.2, std::span<const Point2>(&x0, 1));
    EXPECT_TRUE(has_line(m.x_coords(), 9.0 / 26.0));
    EXPECT_TRUE(has_line(m.y_coords(), 19.0 / 26.0));
    EXPECT_LE(max_gap(m.x_coords()), 0.2 + 1e-15);
    EXPECT_LE(max_gap(m.y_coords()), 0.2 + 1e-15);
    const NodeId n = locate_node(m, x0, 1e-12);
    EXPECT_NEAR(m.node_coords(n).x, x0.x, 0.0);
    EXPECT_NEAR(m.node_coords(n).y, x0.y, 0.0);
    EXPECT_FALSE(m.is_boundary(n));
}

TEST(BuildMesh, UniformUnitSquare) {
    const RectMesh m = build_mesh(PlateDomain::unit_square(), 0.5);
    ASSERT_EQ(m.x_coords().size(), 3u);
    EXPECT_EQ(m.x_coords()[1], 0.5);
    EXPECT_EQ(m.num_cells(), 4u);
    EXPECT_EQ(m.num_nodes(), 9u);
    EXPECT_DOUBLE_EQ(m.h_max(), 0.5);
    EXPECT_DOUBLE_EQ(m.h_label(), 0.5);
}

TEST(BuildMesh, LShapeActiveCells) {
    const Point2 x0{0.5, 0.5};
    const RectMesh m = build_mesh(PlateDomain::l_shape(), 0.5, std::span<const Point2>(&x0, 1));
    EXPECT_EQ(m.num_cells(), 12u);
    EXPECT_FALSE(m.find_cell({0.25, -0.75}).valid());
    EXPECT_TRUE(m.find_cell({-0.25, -0.75}).valid());
    EXPECT_NEAR(cell_area_sum(m), 3.0, 1e-12);
}

TEST(BuildMesh, RejectsBadPointsAndSpacing) {
    const Point2 outside{1.5, 0.5};
    const Point2 on_edge{1.0, 0.5};
    const Point2 notch{0.5, -0.5};
    EXPECT_THROW((void)build_mesh(PlateDomain::unit_square(), 0.2, std::span<const Point2>(&outside, 1)),
                 InvalidArgument);
    EXPECT_THROW((void)build_mesh(PlateDomain::unit_square(), 0.2, std::span<const Point2>(&on_edge, 1)),
                 InvalidArgument);
    EXPECT_THROW((void)build_mesh(PlateDomain::l_shape(), 0.2, std::span<const Point2>(&notch, 1)), InvalidArgument);
    EXPECT_THROW((void)build_mesh(PlateDomain::unit_square(), 0.0), InvalidArgument);
    EXPECT_THROW((void)build_mesh(PlateDomain::unit_square(), -1.0), InvalidArgument);
}

TEST(Refine, BisectionCounts) {
    const RectMesh m = build_mesh(PlateDomain::unit_square(), 0.5);
    const RectMesh r = refine(m);
    EXPECT_EQ(r.num_cells(), 16u);
    EXPECT_EQ(r.num_nodes(), 25u);
    EXPECT_DOUBLE_EQ(r.h_max(), m.h_max() / 2);
    EXPECT_DOUBLE_EQ(r.h_label(), m.h_label() / 2);
}

TEST(Refine, LShapeKeepsReentrantCornerOnBoundary) {
    const Point2 x0{0.5, 0.5};
    const RectMesh m = refine(build_mesh(PlateDomain::l_shape(), 0.5, std::span<const Point2>(&x0, 1)));
    EXPECT_EQ(m.num_cells(), 48u);
    EXPECT_TRUE(m.is_boundary(locate_node(m, {0.0, 0.0}, 1e-12)));
    EXPECT_TRUE(m.is_boundary(locate_node(m, {0.0, -0.5}, 1e-12)));
    EXPECT_FALSE(m.is_boundary(locate_node(m, {-0.5, 0.0}, 1e-12)));
}

TEST(Refine, NestingAndRequiredPointsPersist) {
    const Point2 x0{9.0 / 26.0, 19.0 / 26.0};
    RectMesh m = build_mesh(PlateDomain::unit_square(), 0.2, std::span<const Point2>(&x0, 1));
    for (int level = 0; level < 3; ++level) {
        const RectMesh r = refine(m);
        const auto coarse = node_set(m);
        const auto fine = node_set(r);
        EXPECT_TRUE(std::includes(fine.begin(), fine.end(), coarse.begin(), coarse.end()));
        EXPECT_NO_THROW((void)locate_node(r, x0, 0.0));
        EXPECT_NEAR(cell_area_sum(r), 1.0, 1e-12);
        m = r;
    }
}

TEST(Mesh, UnitSquareBoundaryIsExactlyTheOuterNodes) {
    const Point2 x0{9.0 / 26.0, 19.0 / 26.0};
    const RectMesh m = build_mesh(PlateDomain::unit_square(), 0.1, std::span<const Point2>(&x0, 1));
    for (std::size_t n = 0; n < m.num_nodes(); ++n) {
        const Point2 p = m.node_coords(NodeId{n});
        const bool outer = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
        EXPECT_EQ(m.is_boundary(NodeId{n}), outer) << p.x << ", " << p.y;
    }
}

TEST(Mesh, CellCornersExistAndAreCounterClockwise) {
    const Point2 x0{0.5, 0.5};
    const RectMesh m = build_mesh(PlateDomain::l_shape(), 0.25, std::span<const Point2>(&x0, 1));
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
        const Rect r = m.cell_rect(CellId{c});
        const auto nodes = m.cell_nodes(CellId{c});
        for (const NodeId n : nodes) ASSERT_TRUE(n.valid());
        EXPECT_EQ(m.node_coords(nodes[0]).x, r.xmin);
        EXPECT_EQ(m.node_coords(nodes[0]).y, r.ymin);
        EXPECT_EQ(m.node_coords(nodes[1]).x, r.xmax);
        EXPECT_EQ(m.node_coords(nodes[2]).y, r.ymax);
        EXPECT_EQ(m.node_coords(nodes[3]).x, r.xmin);
    }
}

TEST(LocateNode, FindsOrRejects) {
    const RectMesh m = build_mesh(PlateDomain::unit_square(), 0.5);
    const NodeId centre = locate_node(m, {0.5, 0.5}, 1e-12);
    EXPECT_EQ(m.node_coords(centre).x, 0.5);
    EXPECT_THROW((void)locate_node(m, {0.25, 0.25}, 1e-12), InvalidArgument);
    EXPECT_THROW((void)locate_node(m, {0.25, 0.25}, 0.6), InvalidArgument);  // several candidates
    EXPECT_THROW((void)locate_node(m, {0.5, 0.5}, -1.0), InvalidArgument);
}

TEST(Mesh, IdenticalInputsGiveIdenticalDumps) {
    const Point2 x0{0.4, 0.2};
    std::ostringstream a;
    std::ostringstream b;
    build_mesh(PlateDomain::unit_square(), 0.2, std::span<const Point2>(&x0, 1)).dump(a);
    build_mesh(PlateDomain::unit_square(), 0.2, std::span<const Point2>(&x0, 1)).dump(b);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str().find("boundary_nodes 20"), std::string::npos);
}
