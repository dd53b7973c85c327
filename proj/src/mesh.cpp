#include "platesim/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "platesim/error.hpp"

namespace platesim {

namespace {

double overlap_length(double a0, double a1, double b0, double b1) {
    return std::min(a1, b1) - std::max(a0, b0);
}

// Two rectangles share an edge segment of positive length (or overlap).
bool rects_touch(const Rect& a, const Rect& b, double tol) {
    const double ox = overlap_length(a.xmin, a.xmax, b.xmin, b.xmax);
    const double oy = overlap_length(a.ymin, a.ymax, b.ymin, b.ymax);
    return (ox > tol && oy >= -tol) || (oy > tol && ox >= -tol);
}

struct Line {
    double value;
    int priority;  // 0 = uniform background, 1 = domain edge, 2 = required point
};

// Sorted grid lines; clusters closer than tol collapse onto their highest-priority member.
std::vector<double> merge_lines(std::vector<Line> lines, double tol) {
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.value < b.value; });
    std::vector<double> out;
    std::size_t k = 0;
    while (k < lines.size()) {
        std::size_t end = k + 1;
        Line best = lines[k];
        while (end < lines.size() && lines[end].value - lines[k].value <= tol) {
            if (lines[end].priority > best.priority) best = lines[end];
            ++end;
        }
        out.push_back(best.value);
        k = end;
    }
    return out;
}

std::vector<Line> uniform_lines(double lo, double hi, double h) {
    const auto n = static_cast<std::int64_t>(std::ceil((hi - lo) / h - 1e-9));
    std::vector<Line> lines;
    lines.reserve(static_cast<std::size_t>(n) + 1);
    for (std::int64_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        lines.push_back({k == n ? hi : lo + (hi - lo) * t, 0});
    }
    return lines;
}

std::vector<double> bisect(std::span<const double> c) {
    std::vector<double> out;
    out.reserve(2 * c.size());
    for (std::size_t k = 0; k + 1 < c.size(); ++k) {
        out.push_back(c[k]);
        out.push_back(0.5 * (c[k] + c[k + 1]));
    }
    out.push_back(c.back());
    return out;
}

}  // namespace

PlateDomain::PlateDomain(std::vector<Rect> rects) : rects_(std::move(rects)) {
    if (rects_.empty()) throw InvalidArgument("PlateDomain: at least one rectangle is required");
    bbox_ = rects_.front();
    for (const Rect& r : rects_) {
        if (!(r.xmax > r.xmin) || !(r.ymax > r.ymin)) {
            throw InvalidArgument(fmt::format("PlateDomain: degenerate rectangle [{}, {}] x [{}, {}]",
                                              r.xmin, r.xmax, r.ymin, r.ymax));
        }
        bbox_.xmin = std::min(bbox_.xmin, r.xmin);
        bbox_.xmax = std::max(bbox_.xmax, r.xmax);
        bbox_.ymin = std::min(bbox_.ymin, r.ymin);
        bbox_.ymax = std::max(bbox_.ymax, r.ymax);
    }
    const double tol = tolerance();
    for (std::size_t a = 0; a < rects_.size(); ++a) {
        for (std::size_t b = a + 1; b < rects_.size(); ++b) {
            const double ox = overlap_length(rects_[a].xmin, rects_[a].xmax, rects_[b].xmin, rects_[b].xmax);
            const double oy = overlap_length(rects_[a].ymin, rects_[a].ymax, rects_[b].ymin, rects_[b].ymax);
            if (ox > tol && oy > tol) {
                throw InvalidArgument(fmt::format("PlateDomain: rectangles {} and {} overlap", a, b));
            }
        }
    }
    // Connectivity through shared edges.
    std::vector<char> seen(rects_.size(), 0);
    std::queue<std::size_t> todo;
    todo.push(0);
    seen[0] = 1;
    while (!todo.empty()) {
        const std::size_t a = todo.front();
        todo.pop();
        for (std::size_t b = 0; b < rects_.size(); ++b) {
            if (!seen[b] && rects_touch(rects_[a], rects_[b], tol)) {
                seen[b] = 1;
                todo.push(b);
            }
        }
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
        throw InvalidArgument("PlateDomain: rectangle union is not connected");
    }
}

PlateDomain PlateDomain::unit_square() { return PlateDomain({{0.0, 1.0, 0.0, 1.0}}); }

PlateDomain PlateDomain::l_shape() {
    return PlateDomain({{-1.0, 0.0, -1.0, 0.0}, {-1.0, 0.0, 0.0, 1.0}, {0.0, 1.0, 0.0, 1.0}});
}

double PlateDomain::diameter() const { return std::hypot(bbox_.xmax - bbox_.xmin, bbox_.ymax - bbox_.ymin); }

double PlateDomain::area() const {
    double a = 0.0;
    for (const Rect& r : rects_) a += r.area();
    return a;
}

bool PlateDomain::contains(Point2 p) const {
    return std::any_of(rects_.begin(), rects_.end(), [&](const Rect& r) { return r.contains(p); });
}

bool PlateDomain::contains_interior(Point2 p) const {
    if (!contains(p)) return false;
    // Interior iff a small neighbourhood lies inside: probe the four diagonal directions.
    const double d = 1e-9 * diameter();
    for (const double sx : {-1.0, 1.0}) {
        for (const double sy : {-1.0, 1.0}) {
            if (!contains({p.x + sx * d, p.y + sy * d})) return false;
        }
    }
    // Probing diagonals misses points on a slit; also probe the axes.
    for (const Point2 q : {Point2{p.x - d, p.y}, Point2{p.x + d, p.y}, Point2{p.x, p.y - d}, Point2{p.x, p.y + d}}) {
        if (!contains(q)) return false;
    }
    return true;
}

RectMesh::RectMesh(PlateDomain domain, std::vector<double> x_coords, std::vector<double> y_coords,
                   double h_label)
    : domain_(std::move(domain)), x_(std::move(x_coords)), y_(std::move(y_coords)), h_label_(h_label) {
    if (x_.size() < 2 || y_.size() < 2) throw InvalidArgument("RectMesh: need at least two grid lines per axis");
    if (!std::is_sorted(x_.begin(), x_.end()) || !std::is_sorted(y_.begin(), y_.end())) {
        throw InvalidArgument("RectMesh: grid lines must be sorted");
    }
    const auto nx = static_cast<std::int32_t>(x_.size() - 1);
    const auto ny = static_cast<std::int32_t>(y_.size() - 1);

    cell_of_grid_.assign(static_cast<std::size_t>(nx) * ny, -1);
    for (std::int32_t j = 0; j < ny; ++j) {
        for (std::int32_t i = 0; i < nx; ++i) {
            const Point2 c{0.5 * (x_[i] + x_[i + 1]), 0.5 * (y_[j] + y_[j + 1])};
            if (domain_.contains(c)) {
                cell_of_grid_[static_cast<std::size_t>(j) * nx + i] = static_cast<std::int32_t>(cells_.size());
                cells_.push_back({i, j});
                h_max_ = std::max({h_max_, x_[i + 1] - x_[i], y_[j + 1] - y_[j]});
            }
        }
    }
    if (cells_.empty()) throw InvalidArgument("RectMesh: no cell lies inside the domain");

    auto active = [&](std::int32_t i, std::int32_t j) {
        return i >= 0 && j >= 0 && i < nx && j < ny && cell_of_grid_[static_cast<std::size_t>(j) * nx + i] >= 0;
    };
    node_of_point_.assign(static_cast<std::size_t>(nx + 1) * (ny + 1), -1);
    for (std::int32_t j = 0; j <= ny; ++j) {
        for (std::int32_t i = 0; i <= nx; ++i) {
            if (active(i - 1, j - 1) || active(i, j - 1) || active(i - 1, j) || active(i, j)) {
                node_of_point_[static_cast<std::size_t>(j) * (nx + 1) + i] = static_cast<std::int32_t>(nodes_.size());
                nodes_.push_back({i, j});
            }
        }
    }

    // A node is interior when the centres of all four surrounding grid cells lie in D;
    // grid lines include every domain edge, so this is exact for the rectangle union.
    boundary_.assign(nodes_.size(), 0);
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        const auto [i, j] = nodes_[n];
        bool interior = i > 0 && j > 0 && i < nx && j < ny;
        if (interior) {
            for (const std::int32_t a : {i - 1, i}) {
                for (const std::int32_t b : {j - 1, j}) {
                    const Point2 c{0.5 * (x_[a] + x_[a + 1]), 0.5 * (y_[b] + y_[b + 1])};
                    interior = interior && domain_.contains(c);
                }
            }
        }
        boundary_[n] = interior ? 0 : 1;
    }

    // Union connectivity through shared cell edges.
    std::vector<char> seen(cells_.size(), 0);
    std::queue<std::int32_t> todo;
    todo.push(0);
    seen[0] = 1;
    std::size_t reached = 1;
    while (!todo.empty()) {
        const auto [i, j] = cells_[static_cast<std::size_t>(todo.front())];
        todo.pop();
        for (const auto& [di, dj] : {std::pair{-1, 0}, std::pair{1, 0}, std::pair{0, -1}, std::pair{0, 1}}) {
            if (!active(i + di, j + dj)) continue;
            const std::int32_t c = cell_of_grid_[static_cast<std::size_t>(j + dj) * nx + (i + di)];
            if (!seen[static_cast<std::size_t>(c)]) {
                seen[static_cast<std::size_t>(c)] = 1;
                ++reached;
                todo.push(c);
            }
        }
    }
    if (reached != cells_.size()) throw InvalidArgument("RectMesh: active cells are not connected");
}

Point2 RectMesh::node_coords(NodeId n) const {
    const auto [i, j] = nodes_[n.idx()];
    return {x_[static_cast<std::size_t>(i)], y_[static_cast<std::size_t>(j)]};
}

NodeId RectMesh::node_at(std::int32_t i, std::int32_t j) const {
    const auto nx1 = static_cast<std::int32_t>(x_.size());
    const auto ny1 = static_cast<std::int32_t>(y_.size());
    if (i < 0 || j < 0 || i >= nx1 || j >= ny1) return NodeId{};
    return NodeId{node_of_point_[static_cast<std::size_t>(j) * nx1 + i]};
}

std::vector<NodeId> RectMesh::boundary_nodes() const {
    std::vector<NodeId> out;
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
        if (boundary_[n]) out.emplace_back(n);
    }
    return out;
}

Rect RectMesh::cell_rect(CellId c) const {
    const auto [i, j] = cells_[c.idx()];
    return {x_[static_cast<std::size_t>(i)], x_[static_cast<std::size_t>(i) + 1], y_[static_cast<std::size_t>(j)],
            y_[static_cast<std::size_t>(j) + 1]};
}

std::array<NodeId, 4> RectMesh::cell_nodes(CellId c) const {
    const auto [i, j] = cells_[c.idx()];
    return {node_at(i, j), node_at(i + 1, j), node_at(i + 1, j + 1), node_at(i, j + 1)};
}

CellId RectMesh::find_cell(Point2 p) const {
    const double tol = domain_.tolerance();
    const auto nx = static_cast<std::int32_t>(x_.size() - 1);
    auto interval = [tol](std::span<const double> c, double v) -> std::int32_t {
        if (v < c.front() - tol || v > c.back() + tol) return -1;
        auto it = std::upper_bound(c.begin(), c.end(), v);
        auto k = static_cast<std::int32_t>(it - c.begin()) - 1;
        return std::clamp(k, 0, static_cast<std::int32_t>(c.size()) - 2);
    };
    const std::int32_t i = interval(x_, p.x);
    const std::int32_t j = interval(y_, p.y);
    if (i < 0 || j < 0) return CellId{};
    // p may sit on a line shared with an inactive neighbour; check the adjacent candidates.
    for (const std::int32_t a : {i, i - 1, i + 1}) {
        for (const std::int32_t b : {j, j - 1, j + 1}) {
            if (a < 0 || b < 0 || a >= nx || b >= static_cast<std::int32_t>(y_.size()) - 1) continue;
            const std::int32_t c = cell_of_grid_[static_cast<std::size_t>(b) * nx + a];
            if (c < 0) continue;
            const Rect r = cell_rect(CellId{c});
            if (p.x >= r.xmin - tol && p.x <= r.xmax + tol && p.y >= r.ymin - tol && p.y <= r.ymax + tol) {
                return CellId{c};
            }
        }
    }
    return CellId{};
}

void RectMesh::dump(std::ostream& os) const {
    fmt::print(os, "h_label {:.17g}\nh_max {:.17g}\n", h_label_, h_max_);
    fmt::print(os, "x_coords {}\n", x_.size());
    for (const double v : x_) fmt::print(os, "{:.17g}\n", v);
    fmt::print(os, "y_coords {}\n", y_.size());
    for (const double v : y_) fmt::print(os, "{:.17g}\n", v);
    fmt::print(os, "cells {}\n", cells_.size());
    for (const auto& c : cells_) fmt::print(os, "{} {}\n", c.i, c.j);
    const auto bnd = boundary_nodes();
    fmt::print(os, "boundary_nodes {}\n", bnd.size());
    for (const NodeId n : bnd) {
        const auto g = nodes_[n.idx()];
        fmt::print(os, "{} {} {}\n", n.value, g.i, g.j);
    }
}

RectMesh build_mesh(const PlateDomain& domain, double h_target, std::span<const Point2> required_points) {
    if (!(h_target > 0.0)) throw InvalidArgument(fmt::format("build_mesh: h_target must be positive, got {}", h_target));
    for (const Point2 p : required_points) {
        if (!domain.contains(p)) {
            throw InvalidArgument(fmt::format("build_mesh: point ({}, {}) lies outside the domain", p.x, p.y));
        }
        if (!domain.contains_interior(p)) {
            throw InvalidArgument(fmt::format("build_mesh: point ({}, {}) lies on the domain boundary", p.x, p.y));
        }
    }
    const Rect bb = domain.bounding_box();
    std::vector<Line> xs = uniform_lines(bb.xmin, bb.xmax, h_target);
    std::vector<Line> ys = uniform_lines(bb.ymin, bb.ymax, h_target);
    for (const Rect& r : domain.rects()) {
        xs.push_back({r.xmin, 1});
        xs.push_back({r.xmax, 1});
        ys.push_back({r.ymin, 1});
        ys.push_back({r.ymax, 1});
    }
    for (const Point2 p : required_points) {
        xs.push_back({p.x, 2});
        ys.push_back({p.y, 2});
    }
    const double tol = domain.tolerance();
    return RectMesh(domain, merge_lines(std::move(xs), tol), merge_lines(std::move(ys), tol), h_target);
}

RectMesh refine(const RectMesh& mesh) {
    return RectMesh(mesh.domain(), bisect(mesh.x_coords()), bisect(mesh.y_coords()), 0.5 * mesh.h_label());
}

NodeId locate_node(const RectMesh& mesh, Point2 p, double tol) {
    if (!(tol >= 0.0)) throw InvalidArgument("locate_node: tolerance must be non-negative");
    const auto xs = mesh.x_coords();
    const auto ys = mesh.y_coords();
    const auto x_lo = std::lower_bound(xs.begin(), xs.end(), p.x - tol);
    const auto y_lo = std::lower_bound(ys.begin(), ys.end(), p.y - tol);
    NodeId found;
    int count = 0;
    for (auto xi = x_lo; xi != xs.end() && *xi <= p.x + tol; ++xi) {
        for (auto yj = y_lo; yj != ys.end() && *yj <= p.y + tol; ++yj) {
            if (std::hypot(*xi - p.x, *yj - p.y) > tol) continue;
            const NodeId n = mesh.node_at(static_cast<std::int32_t>(xi - xs.begin()),
                                          static_cast<std::int32_t>(yj - ys.begin()));
            if (n.valid()) {
                found = n;
                ++count;
            }
        }
    }
    if (count == 0) throw InvalidArgument(fmt::format("locate_node: no node within {} of ({}, {})", tol, p.x, p.y));
    if (count > 1) {
        throw InvalidArgument(fmt::format("locate_node: {} nodes within {} of ({}, {})", count, tol, p.x, p.y));
    }
    return found;
}

}  // namespace platesim
