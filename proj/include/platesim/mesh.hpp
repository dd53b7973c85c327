#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace platesim {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Dense zero-based index with a tag so node and cell ids cannot be mixed up.
template <class Tag>
struct Index {
    std::int32_t value = -1;

    constexpr Index() = default;
    constexpr explicit Index(std::int32_t v) : value(v) {}
    constexpr explicit Index(std::size_t v) : value(static_cast<std::int32_t>(v)) {}

    [[nodiscard]] constexpr bool valid() const { return value >= 0; }
    [[nodiscard]] constexpr std::size_t idx() const { return static_cast<std::size_t>(value); }
    constexpr auto operator<=>(const Index&) const = default;
};

using NodeId = Index<struct NodeTag>;
using CellId = Index<struct CellTag>;

/// Closed axis-aligned rectangle [xmin, xmax] x [ymin, ymax].
struct Rect {
    double xmin = 0.0;
    double xmax = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;

    [[nodiscard]] double area() const { return (xmax - xmin) * (ymax - ymin); }
    [[nodiscard]] bool contains(Point2 p) const {
        return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
    }
};

/// Plate geometry: a connected union of axis-aligned rectangles that overlap at most on edges.
class PlateDomain {
public:
    explicit PlateDomain(std::vector<Rect> rects);

    static PlateDomain unit_square();
    /// [-1,1]^2 minus (0,1] x [-1,0).
    static PlateDomain l_shape();

    [[nodiscard]] std::span<const Rect> rects() const { return rects_; }
    [[nodiscard]] Rect bounding_box() const { return bbox_; }
    [[nodiscard]] double diameter() const;
    [[nodiscard]] double area() const;
    /// Coordinate tolerance used for all geometric comparisons.
    [[nodiscard]] double tolerance() const { return 1e-12 * diameter(); }

    /// Membership in the closure of D.
    [[nodiscard]] bool contains(Point2 p) const;
    /// Membership in the open interior of D.
    [[nodiscard]] bool contains_interior(Point2 p) const;

private:
    std::vector<Rect> rects_;
    Rect bbox_;
};

struct GridIndex {
    std::int32_t i = 0;  ///< x-line / column index
    std::int32_t j = 0;  ///< y-line / row index
};

/// Tensor-product rectangular mesh restricted to the cells lying inside a PlateDomain.
///
/// Nodes are the grid points touching at least one active cell, numbered row by row
/// (y outer, x inner). Cells are numbered the same way. Both numberings depend only on the
/// grid lines and the domain, so identical inputs give identical ids.
class RectMesh {
public:
    RectMesh(PlateDomain domain, std::vector<double> x_coords, std::vector<double> y_coords,
             double h_label);

    [[nodiscard]] const PlateDomain& domain() const { return domain_; }
    [[nodiscard]] std::span<const double> x_coords() const { return x_; }
    [[nodiscard]] std::span<const double> y_coords() const { return y_; }

    [[nodiscard]] std::size_t num_nodes() const { return nodes_.size(); }
    [[nodiscard]] std::size_t num_cells() const { return cells_.size(); }

    [[nodiscard]] GridIndex node_grid(NodeId n) const { return nodes_[n.idx()]; }
    [[nodiscard]] Point2 node_coords(NodeId n) const;
    /// Node at grid point (i, j), invalid if that point is not part of the mesh.
    [[nodiscard]] NodeId node_at(std::int32_t i, std::int32_t j) const;
    [[nodiscard]] bool is_boundary(NodeId n) const { return boundary_[n.idx()] != 0; }
    [[nodiscard]] std::vector<NodeId> boundary_nodes() const;

    [[nodiscard]] GridIndex cell_grid(CellId c) const { return cells_[c.idx()]; }
    [[nodiscard]] Rect cell_rect(CellId c) const;
    /// Corner nodes in counter-clockwise order starting at (xmin, ymin).
    [[nodiscard]] std::array<NodeId, 4> cell_nodes(CellId c) const;
    /// Some active cell whose closure contains p, invalid if none.
    [[nodiscard]] CellId find_cell(Point2 p) const;

    /// Largest cell edge length.
    [[nodiscard]] double h_max() const { return h_max_; }
    /// Nominal uniform spacing the mesh was generated for (halved by each refinement).
    [[nodiscard]] double h_label() const { return h_label_; }

    /// Plain-text dump of grid lines, active cells and boundary nodes.
    void dump(std::ostream& os) const;

private:
    PlateDomain domain_;
    std::vector<double> x_;
    std::vector<double> y_;
    double h_label_;
    double h_max_ = 0.0;
    std::vector<GridIndex> cells_;
    std::vector<GridIndex> nodes_;
    std::vector<std::int32_t> node_of_point_;  // (nx+1)*(ny+1), -1 where absent
    std::vector<std::int32_t> cell_of_grid_;   // nx*ny, -1 where inactive
    std::vector<char> boundary_;
};

/// Uniform grid of spacing <= h_target over the bounding box with every rectangle edge and
/// every required point coordinate inserted as an extra grid line. Cells outside D are dropped.
/// Throws InvalidArgument if h_target <= 0 or a required point is not strictly inside D.
[[nodiscard]] RectMesh build_mesh(const PlateDomain& domain, double h_target,
                                  std::span<const Point2> required_points = {});

/// Bisects every grid interval; old grid lines and node coordinates persist.
[[nodiscard]] RectMesh refine(const RectMesh& mesh);

/// The unique node within distance tol of p. Throws InvalidArgument if there is none or more than one.
[[nodiscard]] NodeId locate_node(const RectMesh& mesh, Point2 p, double tol);

}  // namespace platesim
