#include "platesim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <tuple>

#include <fmt/format.h>

#include "platesim/error.hpp"
#include "platesim/quadrature.hpp"

namespace platesim {

void SimConfig::validate() const {
    if (m_per_edge < 2) throw InvalidArgument(fmt::format("SimConfig: m_per_edge must be >= 2, got {}", m_per_edge));
    if (!(alpha > 0.0)) throw InvalidArgument(fmt::format("SimConfig: alpha must be positive, got {}", alpha));
    if (!(beta > 0.0)) throw InvalidArgument(fmt::format("SimConfig: beta must be positive, got {}", beta));
    if (probes < 1) throw InvalidArgument("SimConfig: at least one probe vector is required");
    if (max_depth < 0) throw InvalidArgument("SimConfig: max_depth must be non-negative");
}

ComplexVector random_probe(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    ComplexVector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        y(i) = Complex(re, im);
    }
    return y;
}

namespace {

constexpr Complex kI{0.0, 1.0};

double distance_to_box(Complex z, double re0, double re1, double im0, double im1) {
    const double dx = std::max({re0 - z.real(), 0.0, z.real() - re1});
    const double dy = std::max({im0 - z.imag(), 0.0, z.imag() - im1});
    return std::hypot(dx, dy);
}

void check_box_poles(const SearchBox& box, const OperatorFunction& f) {
    for (const double s : f.poles()) {
        if (distance_to_box(s, box.re_min(), box.re_max(), box.im_min(), box.im_max()) <= f.pole_guard() * std::abs(s)) {
            throw PoleProximityError(fmt::format(
                "search box [{}, {}] x [{}, {}]i contains the pole sigma = {}; move or split the box so that every "
                "oscillator frequency lies outside it",
                box.re_min(), box.re_max(), box.im_min(), box.im_max(), s));
        }
    }
}

// Sum_k w_k F(eta_k)^{-1} y_p over the Gauss nodes of segment a -> b, for every probe.
std::vector<ComplexVector> segment_sum(Complex a, Complex b, const GaussRule& rule, const OperatorFunction& f,
                                       std::span<const ComplexVector> probes, std::size_t* solves) {
    std::vector<ComplexVector> sums(probes.size(), ComplexVector::Zero(f.size()));
    const Complex half = 0.5 * (b - a);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const Complex eta = a + half * (1.0 + rule.nodes[k]);
        const ShiftFactorization fac = f.factorize(eta);
        if (solves != nullptr) ++*solves;
        for (std::size_t p = 0; p < probes.size(); ++p) sums[p] += (half * rule.weights[k]) * fac.solve(probes[p]);
    }
    return sums;
}

double indicator_from_sum(const std::vector<ComplexVector>& total, std::span<const ComplexVector> probes) {
    double acc = 0.0;
    for (std::size_t p = 0; p < probes.size(); ++p) {
        acc += (total[p] / (2.0 * std::numbers::pi * kI)).norm() / probes[p].norm();
    }
    return acc / static_cast<double>(probes.size());
}

double box_indicator(const SearchBox& box, const OperatorFunction& f, std::span<const ComplexVector> probes,
                     int m_per_edge, std::size_t* solves) {
    const GaussRule rule = gauss_legendre(m_per_edge);
    const Complex z0{box.re_min(), box.im_min()};
    const Complex z1{box.re_max(), box.im_min()};
    const Complex z2{box.re_max(), box.im_max()};
    const Complex z3{box.re_min(), box.im_max()};
    std::vector<ComplexVector> total(probes.size(), ComplexVector::Zero(f.size()));
    for (const auto& [a, b] : {std::pair{z0, z1}, std::pair{z1, z2}, std::pair{z2, z3}, std::pair{z3, z0}}) {
        const auto s = segment_sum(a, b, rule, f, probes, solves);
        for (std::size_t p = 0; p < probes.size(); ++p) total[p] += s[p];
    }
    return indicator_from_sum(total, probes);
}

// Boxes of one search live on a dyadic lattice over the root square so that shared edges of
// neighbouring boxes produce bit-identical quadrature nodes.
class LatticeSearch {
public:
    LatticeSearch(const SearchBox& root, const OperatorFunction& f, const SimConfig& cfg,
                  std::span<const ComplexVector> probes, SimStats& stats)
        : f_(f),
          cfg_(cfg),
          probes_(probes),
          stats_(stats),
          rule_(gauss_legendre(cfg.m_per_edge)),
          re0_(root.re_min()),
          im0_(root.im_min()),
          side_(2.0 * root.half_width) {}

    struct Cell {
        int level;
        std::int64_t i;
        std::int64_t j;
    };

    [[nodiscard]] double spacing(int level) const { return std::ldexp(side_, -level); }

    [[nodiscard]] SearchBox box(const Cell& c) const {
        const double d = spacing(c.level);
        return {Complex{re0_ + (static_cast<double>(c.i) + 0.5) * d, im0_ + (static_cast<double>(c.j) + 0.5) * d},
                0.5 * d};
    }

    [[nodiscard]] Complex corner(int level, std::int64_t i, std::int64_t j) const {
        const double d = spacing(level);
        return {re0_ + static_cast<double>(i) * d, im0_ + static_cast<double>(j) * d};
    }

    void new_level() { cache_.clear(); }

    double evaluate(const Cell& c) {
        ++stats_.boxes;
        try {
            std::vector<ComplexVector> total(probes_.size(), ComplexVector::Zero(f_.size()));
            accumulate(total, segment(c.level, 0, c.i, c.j), 1.0);       // bottom, left -> right
            accumulate(total, segment(c.level, 1, c.i + 1, c.j), 1.0);   // right, bottom -> top
            accumulate(total, segment(c.level, 0, c.i, c.j + 1), -1.0);  // top, traversed right -> left
            accumulate(total, segment(c.level, 1, c.i, c.j), -1.0);      // left, traversed top -> bottom
            return indicator_from_sum(total, probes_);
        } catch (const SingularShiftError&) {
            // A node hit an eigenvalue: redo this box with a shifted node set.
            return box_indicator(box(c), f_, probes_, cfg_.m_per_edge + 1, &stats_.solves);
        }
    }

private:
    using Key = std::tuple<int, int, std::int64_t, std::int64_t>;

    static void accumulate(std::vector<ComplexVector>& total, const std::vector<ComplexVector>& s, double sign) {
        for (std::size_t p = 0; p < total.size(); ++p) total[p] += sign * s[p];
    }

    // orientation 0: horizontal from (i, j) to (i+1, j); 1: vertical from (i, j) to (i, j+1).
    const std::vector<ComplexVector>& segment(int level, int orientation, std::int64_t i, std::int64_t j) {
        const Key key{level, orientation, i, j};
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const Complex a = corner(level, i, j);
        const Complex b = orientation == 0 ? corner(level, i + 1, j) : corner(level, i, j + 1);
        auto sums = segment_sum(a, b, rule_, f_, probes_, &stats_.solves);
        return cache_.emplace(key, std::move(sums)).first->second;
    }

    const OperatorFunction& f_;
    const SimConfig& cfg_;
    std::span<const ComplexVector> probes_;
    SimStats& stats_;
    GaussRule rule_;
    double re0_;
    double im0_;
    double side_;
    std::map<Key, std::vector<ComplexVector>> cache_;
};

// Single-linkage clusters of centres closer than `radius`, each replaced by its mean.
std::vector<EigenResult> merge_centres(std::vector<EigenResult> raw, double radius) {
    std::sort(raw.begin(), raw.end(), [](const EigenResult& a, const EigenResult& b) {
        return std::pair{a.lambda.real(), a.lambda.imag()} < std::pair{b.lambda.real(), b.lambda.imag()};
    });
    std::vector<std::size_t> parent(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) parent[k] = k;
    auto root = [&](std::size_t k) {
        while (parent[k] != k) k = parent[k] = parent[parent[k]];
        return k;
    };
    for (std::size_t a = 0; a < raw.size(); ++a) {
        for (std::size_t b = a + 1; b < raw.size() && raw[b].lambda.real() - raw[a].lambda.real() < radius; ++b) {
            if (std::abs(raw[b].lambda - raw[a].lambda) < radius) parent[root(b)] = root(a);
        }
    }
    std::map<std::size_t, std::vector<std::size_t>> clusters;
    for (std::size_t k = 0; k < raw.size(); ++k) clusters[root(k)].push_back(k);
    std::vector<EigenResult> out;
    for (const auto& [r, members] : clusters) {
        EigenResult merged;
        Complex sum = 0.0;
        for (const std::size_t q : members) {
            sum += raw[q].lambda;
            merged.box_half_width = std::max(merged.box_half_width, raw[q].box_half_width);
            merged.indicator = std::max(merged.indicator, raw[q].indicator);
        }
        merged.lambda = sum / static_cast<double>(members.size());
        out.push_back(std::move(merged));
    }
    std::sort(out.begin(), out.end(), [](const EigenResult& a, const EigenResult& b) {
        return std::pair{a.lambda.real(), a.lambda.imag()} < std::pair{b.lambda.real(), b.lambda.imag()};
    });
    return out;
}

std::vector<ComplexVector> make_probes(Eigen::Index n, const SimConfig& cfg) {
    std::vector<ComplexVector> probes;
    for (int p = 0; p < cfg.probes; ++p) probes.push_back(random_probe(n, cfg.seed + static_cast<std::uint64_t>(p)));
    return probes;
}

std::vector<EigenResult> search_raw(const SearchBox& root, const OperatorFunction& f, const SimConfig& cfg,
                                    std::span<const ComplexVector> probes, SimStats& stats) {
    if (!(root.half_width > 0.0)) throw InvalidArgument("find_eigenvalues: box half-width must be positive");
    check_box_poles(root, f);

    LatticeSearch search(root, f, cfg, probes, stats);
    using Cell = LatticeSearch::Cell;
    std::vector<std::pair<Cell, double>> active;
    const Cell root_cell{0, 0, 0};
    const double root_ind = search.evaluate(root_cell);
    if (root_ind >= cfg.alpha) active.emplace_back(root_cell, root_ind);

    const double terminal = cfg.beta * root.half_width;
    std::vector<EigenResult> emitted;
    int level = 0;
    while (!active.empty()) {
        stats.depth = std::max(stats.depth, level);
        std::vector<std::pair<Cell, double>> next;
        std::vector<SearchBox> unresolved;
        search.new_level();
        for (const auto& [cell, ind] : active) {
            const SearchBox b = search.box(cell);
            if (b.half_width <= terminal) {
                EigenResult r;
                r.lambda = b.center;
                r.box_half_width = b.half_width;
                r.indicator = ind;
                emitted.push_back(std::move(r));
                continue;
            }
            if (level >= cfg.max_depth) {
                unresolved.push_back(b);
                continue;
            }
            for (int dj = 0; dj < 2; ++dj) {
                for (int di = 0; di < 2; ++di) {
                    const Cell child{level + 1, 2 * cell.i + di, 2 * cell.j + dj};
                    const double ci = search.evaluate(child);
                    if (ci >= cfg.alpha) next.emplace_back(child, ci);
                }
            }
        }
        if (!unresolved.empty()) {
            std::string list;
            for (const SearchBox& b : unresolved) {
                list += fmt::format(" [{}, {}]x[{}, {}]i", b.re_min(), b.re_max(), b.im_min(), b.im_max());
            }
            throw MaxDepthError(
                fmt::format("find_eigenvalues: max_depth {} reached with {} unresolved box(es):{}", cfg.max_depth,
                            unresolved.size(), list));
        }
        active = std::move(next);
        ++level;
    }
    return emitted;
}

}  // namespace

double indicator(const SearchBox& box, const OperatorFunction& f, const ComplexVector& y, int m_per_edge) {
    if (m_per_edge < 1) throw InvalidArgument("indicator: m_per_edge must be positive");
    check_box_poles(box, f);
    return box_indicator(box, f, std::span<const ComplexVector>(&y, 1), m_per_edge, nullptr);
}

std::vector<EigenResult> find_eigenvalues(const SearchBox& box, const OperatorFunction& f, const SimConfig& config,
                                          SimStats* stats) {
    return find_eigenvalues(std::span<const SearchBox>(&box, 1), f, config, stats);
}

std::vector<EigenResult> find_eigenvalues(std::span<const SearchBox> boxes, const OperatorFunction& f,
                                          const SimConfig& config, SimStats* stats) {
    config.validate();
    SimStats local;
    SimStats& st = stats != nullptr ? *stats : local;
    const auto probes = make_probes(f.size(), config);
    std::vector<EigenResult> raw;
    double radius = 0.0;
    for (const SearchBox& b : boxes) {
        radius = std::max(radius, 4.0 * config.beta * b.half_width);
        auto part = search_raw(b, f, config, probes, st);
        raw.insert(raw.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return merge_centres(std::move(raw), radius);
}

std::vector<SearchBox> tile_region(double re_min, double re_max, double im_min, double im_max,
                                   std::span<const double> poles, double pole_gap, double max_side) {
    if (!(re_max > re_min) || !(im_max > im_min)) throw InvalidArgument("tile_region: empty region");
    // Split the real range at every pole that can lie inside the region.
    std::vector<std::pair<double, double>> spans{{re_min, re_max}};
    if (im_min <= 0.0 && im_max >= 0.0) {
        std::vector<double> sorted(poles.begin(), poles.end());
        std::sort(sorted.begin(), sorted.end());
        for (const double s : sorted) {
            std::vector<std::pair<double, double>> next;
            for (const auto& [a, b] : spans) {
                if (s + pole_gap <= a || s - pole_gap >= b) {
                    next.emplace_back(a, b);
                    continue;
                }
                if (s - pole_gap > a) next.emplace_back(a, s - pole_gap);
                if (s + pole_gap < b) next.emplace_back(s + pole_gap, b);
            }
            spans = std::move(next);
        }
    }
    const double height = im_max - im_min;
    std::vector<SearchBox> boxes;
    for (const auto& [a, b] : spans) {
        const double width = b - a;
        double side = std::min(width, height);
        if (max_side > 0.0) side = std::min(side, max_side);
        const auto cols = static_cast<std::int64_t>(std::ceil(width / side - 1e-12));
        const double s = width / static_cast<double>(cols);
        double y0 = im_min;
        if (im_min <= 0.0 && im_max >= 0.0) {
            // Row boundaries at -s/3 + k s keep the real axis off every dyadic subdivision line.
            const double base = -s / 3.0;
            y0 = base - std::ceil((base - im_min) / s - 1e-12) * s;
        }
        const auto rows = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((im_max - y0) / s - 1e-12)));
        for (std::int64_t r = 0; r < rows; ++r) {
            for (std::int64_t c = 0; c < cols; ++c) {
                boxes.push_back({Complex{a + (static_cast<double>(c) + 0.5) * s, y0 + (static_cast<double>(r) + 0.5) * s},
                                 0.5 * s});
            }
        }
    }
    return boxes;
}

namespace {

double one_norm(const ComplexSparse& m) {
    double best = 0.0;
    for (Eigen::Index c = 0; c < m.outerSize(); ++c) {
        double s = 0.0;
        for (ComplexSparse::InnerIterator it(m, c); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

// Scale the vector to unit norm with its largest entry real and positive.
void normalize_phase(ComplexVector& x) {
    Eigen::Index k = 0;
    x.cwiseAbs().maxCoeff(&k);
    const Complex ph = x(k) / std::abs(x(k));
    x /= ph;
    x.normalize();
}

ShiftFactorization factorize_nudged(const OperatorFunction& f, Complex& shift) {
    try {
        return f.factorize(shift);
    } catch (const SingularShiftError&) {
        shift *= (1.0 + 1e-13);
        return f.factorize(shift);
    }
}

Complex unconjugated_dot(const ComplexVector& a, const ComplexVector& b) { return (a.array() * b.array()).sum(); }

}  // namespace

EigenResult refine_eigenpair(Complex lambda_c, const OperatorFunction& f, std::uint64_t seed, int steps) {
    EigenResult res;
    res.lambda = lambda_c;
    Complex shift = lambda_c;
    const ShiftFactorization fac = factorize_nudged(f, shift);
    ComplexVector x = random_probe(f.size(), seed);
    x.normalize();
    double alignment = 0.0;
    for (int s = 0; s < std::max(steps, 2); ++s) {
        ComplexVector next = fac.solve(x);
        if (!next.allFinite() || next.norm() == 0.0) return res;
        normalize_phase(next);
        alignment = std::abs(next.dot(x));
        x = std::move(next);
    }
    const ComplexSparse& fm = fac.matrix();
    res.residual = (fm * x).norm() / (one_norm(fm) * x.norm());
    res.converged = 1.0 - alignment < 1e-8;
    res.eigenvector = std::move(x);
    return res;
}

EigenResult polish_eigenpair(Complex lambda_c, const OperatorFunction& f, std::uint64_t seed, int max_iter,
                             double tol) {
    EigenResult start = refine_eigenpair(lambda_c, f, seed, 3);
    if (!start.eigenvector) return start;
    const AssembledSystem& sys = f.system();
    const Eigen::SparseMatrix<Complex> a = sys.A.cast<Complex>();
    const Eigen::SparseMatrix<Complex> b = sys.B.cast<Complex>();
    ComplexVector x = *start.eigenvector;
    Complex rho = lambda_c;

    auto rayleigh_functional = [&](const ComplexVector& v, Complex guess) {
        const Complex xa = unconjugated_dot(v, a * v);
        const Complex xb = unconjugated_dot(v, b * v);
        std::vector<Complex> ex;
        for (const PointTerm& t : sys.point_terms) {
            Complex d = 0.0;
            for (SparseVector::InnerIterator it(t.e); it; ++it) d += it.value() * v(it.index());
            ex.push_back(d * d);
        }
        Complex r = guess;
        for (int it = 0; it < 60; ++it) {
            Complex g = xa - r * xb;
            Complex dg = -xb;
            for (std::size_t j = 0; j < ex.size(); ++j) {
                g += f.coupling(j, r) * ex[j];
                dg += f.coupling_derivative(j, r) * ex[j];
            }
            const Complex step = g / dg;
            r -= step;
            if (std::abs(step) <= 1e-15 * std::abs(r)) break;
        }
        return r;
    };

    bool converged = false;
    ComplexSparse last_matrix;
    for (int it = 0; it < max_iter; ++it) {
        const Complex next = rayleigh_functional(x, rho);
        if (!std::isfinite(next.real()) || f.near_pole(next)) break;
        const double change = std::abs(next - rho);
        rho = next;
        if (it > 0 && change <= tol * std::abs(rho)) {
            converged = true;
            break;
        }
        Complex shift = rho;
        try {
            const ShiftFactorization fac = factorize_nudged(f, shift);
            ComplexVector y = fac.solve(f.apply_derivative(rho, x));
            if (!y.allFinite()) break;
            normalize_phase(y);
            x = std::move(y);
        } catch (const SingularShiftError&) {
            converged = true;
            break;
        }
    }
    EigenResult res;
    res.lambda = rho;
    res.box_half_width = 0.0;
    res.converged = converged;
    res.polished = true;
    const ComplexSparse fm = f.evaluate(rho);
    res.residual = (fm * x).norm() / (one_norm(fm) * x.norm());
    res.eigenvector = std::move(x);
    return res;
}

}  // namespace platesim
