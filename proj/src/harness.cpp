#include "platesim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "platesim/error.hpp"
#include "platesim/oracle.hpp"

namespace platesim {

Discretization::Discretization(RectMesh m, const PlateProblem& problem)
    : mesh(std::move(m)), dofs(mesh), system(assemble(mesh, problem, dofs)), f(system) {}

std::unique_ptr<Discretization> discretize(const RunConfig& cfg, int level, const Discretization* previous) {
    const auto pts = cfg.problem.oscillator_points();
    if (level == 0 || cfg.refinement == RefinementRule::rebuild) {
        return std::make_unique<Discretization>(build_mesh(cfg.plate(), cfg.level_h(level), pts), cfg.problem);
    }
    if (previous == nullptr) throw InvalidArgument("discretize: bisection needs the previous level");
    return std::make_unique<Discretization>(refine(previous->mesh), cfg.problem);
}

std::vector<SearchBox> search_tiles(const RunConfig& cfg) {
    std::vector<double> poles;
    for (const Oscillator& o : cfg.problem.oscillators) poles.push_back(o.sigma());
    const SearchRegion& s = cfg.search;
    return tile_region(s.re_min, s.re_max, s.im_min, s.im_max, poles, s.pole_gap, s.max_side);
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool in_region(const SearchRegion& s, Complex z) {
    return z.real() >= s.re_min && z.real() < s.re_max && z.imag() >= s.im_min && z.imag() < s.im_max;
}

// Replaces a located eigenvalue by its polished value when that stays within `radius`;
// otherwise keeps the located value and attaches the inverse-iteration eigenvector.
EigenResult finish(const EigenResult& located, const OperatorFunction& f, std::uint64_t seed, bool polish,
                   double radius) {
    if (polish) {
        EigenResult p = polish_eigenpair(located.lambda, f, seed);
        if (p.converged && std::abs(p.lambda - located.lambda) <= radius) {
            p.box_half_width = located.box_half_width;
            p.indicator = located.indicator;
            return p;
        }
    }
    EigenResult r = refine_eigenpair(located.lambda, f, seed);
    r.lambda = located.lambda;
    r.box_half_width = located.box_half_width;
    r.indicator = located.indicator;
    return r;
}

std::vector<EigenResult> solve_region(const RunConfig& cfg, const Discretization& d, SimStats& stats, bool polish) {
    auto found = find_eigenvalues(search_tiles(cfg), d.f, cfg.sim, &stats);
    std::vector<EigenResult> out;
    for (const EigenResult& r : found) {
        if (!in_region(cfg.search, r.lambda)) continue;
        out.push_back(finish(r, d.f, cfg.sim.seed, polish, 4.0 * r.box_half_width + 1e-12 * std::abs(r.lambda)));
    }
    return out;
}

}  // namespace

SolveReport run_solve(const RunConfig& cfg, std::ostream* log) {
    const auto t0 = Clock::now();
    const auto d = discretize(cfg, 0);
    SolveReport rep;
    rep.h = cfg.level_h(0);
    rep.n_free = d->system.n_free();
    rep.eigenvalues = solve_region(cfg, *d, rep.stats, cfg.polish);
    rep.seconds = since(t0);
    if (log != nullptr) {
        fmt::print(*log, "h={:.6g} n_free={} eigenvalues={} boxes={} solves={} depth={} time={:.1f}s\n", rep.h,
                   rep.n_free, rep.eigenvalues.size(), rep.stats.boxes, rep.stats.solves, rep.stats.depth,
                   rep.seconds);
    }
    return rep;
}

void write_solve_csv(std::ostream& os, const SolveReport& report) {
    os << "lambda_re,lambda_im,box_half_width,indicator,residual\n";
    for (const EigenResult& r : report.eigenvalues) {
        fmt::print(os, "{:.12g},{:.12g},{:.12g},{:.12g},{}\n", r.lambda.real(), r.lambda.imag(), r.box_half_width,
                   r.indicator, std::isnan(r.residual) ? std::string() : fmt::format("{:.12g}", r.residual));
    }
}

namespace {

struct Tracked {
    Complex value;
    std::optional<Complex> previous;
};

// Half-width cap that keeps a continuation box clear of poles and of the other tracked values.
double clearance(const RunConfig& cfg, const std::vector<Tracked>& tracked, std::size_t k) {
    const Complex c = tracked[k].value;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < tracked.size(); ++q) {
        if (q != k) gap = std::min(gap, std::abs(tracked[q].value - c));
    }
    double pole = std::numeric_limits<double>::infinity();
    for (const Oscillator& o : cfg.problem.oscillators) pole = std::min(pole, std::abs(o.sigma() - c));
    return std::min(0.45 * gap, 0.9 * (pole - cfg.search.pole_gap));
}

SearchBox axis_box(Complex centre, double half_width) {
    // Real axis at one third of the box height, never on a quadrature edge.
    return SearchBox{Complex{centre.real(), half_width / 3.0}, half_width};
}

bool box_holds(const SearchBox& b, Complex z) {
    return z.real() >= b.re_min() && z.real() <= b.re_max() && z.imag() >= b.im_min() && z.imag() <= b.im_max();
}

struct Continued {
    EigenResult result;
    bool flagged = false;
};

Continued continue_eigenvalue(const RunConfig& cfg, const Discretization& d, const std::vector<Tracked>& tracked,
                              std::size_t k, std::ostream* log) {
    const ContinuationConfig& cc = cfg.continuation;
    const Tracked& t = tracked[k];
    const double scale = std::abs(t.value);
    double r = t.previous ? cc.growth * std::abs(t.value - *t.previous) : cc.initial_width * scale;
    r = std::max(r, cc.min_width * scale);
    const double cap = clearance(cfg, tracked, k);
    r = std::min(r, cap);
    const ComplexVector probe = random_probe(d.f.size(), cfg.sim.seed);

    for (int attempt = 0; attempt < 4; ++attempt) {
        const SearchBox box = axis_box(t.value, r);
        const double ind = indicator(box, d.f, probe, cc.m_per_edge);
        if (ind >= cfg.sim.alpha) {
            EigenResult p = polish_eigenpair(t.value, d.f, cfg.sim.seed);
            if (p.converged && box_holds(box, p.lambda)) {
                p.box_half_width = r;
                p.indicator = ind;
                return {std::move(p), false};
            }
            // The polished value left the box: resolve the box with SIM and restart from there.
            SimConfig local = cfg.sim;
            local.beta = 1e-3;
            const auto found = find_eigenvalues(box, d.f, local);
            if (log != nullptr) {
                fmt::print(*log, "  lambda_{}: polishing left the box, SIM found {} value(s) inside\n", k + 1,
                           found.size());
            }
            if (!found.empty()) {
                auto best = std::min_element(found.begin(), found.end(), [&](const auto& a, const auto& b) {
                    return std::abs(a.lambda - t.value) < std::abs(b.lambda - t.value);
                });
                EigenResult q = finish(*best, d.f, cfg.sim.seed, cfg.polish, 4.0 * best->box_half_width);
                return {std::move(q), found.size() != 1};
            }
        }
        if (r >= cap) break;
        r = std::min(4.0 * r, cap);
    }
    if (log != nullptr) fmt::print(*log, "  lambda_{}: not confirmed near {:.10g}\n", k + 1, t.value.real());
    EigenResult fallback;
    fallback.lambda = t.value;
    return {fallback, true};
}

// Nearest candidate to `target`, flagged when the guard radius (10% of the local gap) holds
// none or several candidates.
std::pair<std::size_t, bool> nearest(const std::vector<EigenResult>& cands, Complex target, double gap) {
    std::size_t best = 0;
    int within = 0;
    for (std::size_t q = 0; q < cands.size(); ++q) {
        if (std::abs(cands[q].lambda - target) < std::abs(cands[best].lambda - target)) best = q;
        if (std::abs(cands[q].lambda - target) <= 0.1 * gap) ++within;
    }
    return {best, within != 1};
}

}  // namespace

ConvergenceReport run_convergence(const RunConfig& cfg, std::ostream* log) {
    if (cfg.refinements < 2) throw ConfigError("a convergence study needs at least two refinements");
    ConvergenceReport rep;
    std::unique_ptr<Discretization> prev;
    std::vector<Tracked> tracked;
    std::vector<Complex> all_prev;

    for (int level = 0; level <= cfg.refinements; ++level) {
        const auto t0 = Clock::now();
        auto d = discretize(cfg, level, prev.get());
        ConvergenceRow row;
        row.h = cfg.level_h(level);
        row.n_free = d->system.n_free();
        if (log != nullptr) fmt::print(*log, "level {}: h={:.6g} n_free={}\n", level, row.h, row.n_free);

        if (level == 0 || !cfg.continuation.enabled) {
            SimStats stats;
            const auto found = solve_region(cfg, *d, stats, cfg.polish);
            if (log != nullptr) {
                fmt::print(*log, "  SIM: {} eigenvalue(s), {} boxes, {} solves\n", found.size(), stats.boxes,
                           stats.solves);
            }
            if (level == 0) {
                if (found.empty()) throw Error("no eigenvalues found in the search region on the coarsest mesh");
                const std::size_t n = std::min<std::size_t>(found.size(), static_cast<std::size_t>(cfg.search.track));
                for (std::size_t k = 0; k < n; ++k) {
                    tracked.push_back({found[k].lambda, std::nullopt});
                    row.entries.push_back({found[k].lambda, std::nullopt, std::nullopt, false});
                }
            } else {
                for (std::size_t k = 0; k < tracked.size(); ++k) {
                    ConvergenceEntry e;
                    if (found.empty()) {
                        e.lambda = tracked[k].value;
                        e.flagged = true;
                    } else {
                        double gap = std::numeric_limits<double>::infinity();
                        for (const Complex z : all_prev) {
                            if (z != tracked[k].value) gap = std::min(gap, std::abs(z - tracked[k].value));
                        }
                        const auto [q, ambiguous] = nearest(found, tracked[k].value, gap);
                        e.lambda = found[q].lambda;
                        e.flagged = ambiguous;
                    }
                    row.entries.push_back(e);
                }
            }
            all_prev.clear();
            for (const EigenResult& r : found) all_prev.push_back(r.lambda);
        } else {
            for (std::size_t k = 0; k < tracked.size(); ++k) {
                const Continued c = continue_eigenvalue(cfg, *d, tracked, k, log);
                row.entries.push_back({c.result.lambda, std::nullopt, std::nullopt, c.flagged});
                if (log != nullptr) {
                    fmt::print(*log, "  lambda_{} = {:.12g}{}\n", k + 1, c.result.lambda.real(),
                               c.flagged ? " (flagged)" : "");
                }
            }
        }

        for (std::size_t k = 0; k < tracked.size(); ++k) {
            if (level > 0) {
                tracked[k].previous = tracked[k].value;
                tracked[k].value = row.entries[k].lambda;
            }
        }
        rep.table.rows.push_back(std::move(row));
        rep.seconds.push_back(since(t0));
        if (log != nullptr) fmt::print(*log, "  {:.1f}s\n", rep.seconds.back());
        prev = std::move(d);
    }
    rep.table.update_columns();
    return rep;
}

OracleReport compare_spectra(std::vector<std::complex<double>> sim, std::vector<std::complex<double>> oracle) {
    auto by_real = [](const Complex& a, const Complex& b) {
        return std::pair{a.real(), a.imag()} < std::pair{b.real(), b.imag()};
    };
    std::sort(sim.begin(), sim.end(), by_real);
    std::sort(oracle.begin(), oracle.end(), by_real);
    OracleReport rep;
    rep.counts_match = sim.size() == oracle.size();
    for (std::size_t k = 0; k < std::min(sim.size(), oracle.size()); ++k) {
        const double scale = std::max(std::abs(oracle[k]), std::numeric_limits<double>::min());
        rep.max_deviation = std::max(rep.max_deviation, std::abs(sim[k] - oracle[k]) / scale);
    }
    rep.sim = std::move(sim);
    rep.oracle = std::move(oracle);
    return rep;
}

OracleReport run_oracle_check(const RunConfig& cfg, std::ostream* log) {
    const auto d = discretize(cfg, 0);
    const auto pencil = oracle::build_pencil(d->system);
    const SearchRegion& s = cfg.search;
    const auto reference = oracle::in_box(oracle::dense_eig(pencil), s.re_min, s.re_max, s.im_min, s.im_max);
    SimStats stats;
    const auto found = find_eigenvalues(search_tiles(cfg), d->f, cfg.sim, &stats);
    std::vector<Complex> sim;
    for (const EigenResult& r : found) {
        if (in_region(s, r.lambda)) sim.push_back(r.lambda);
    }
    if (log != nullptr) {
        fmt::print(*log, "h={:.6g} n_free={} SIM boxes={} solves={}\n", cfg.level_h(0), d->system.n_free(),
                   stats.boxes, stats.solves);
    }
    return compare_spectra(std::move(sim), reference);
}

void write_oracle_report(std::ostream& os, const OracleReport& report) {
    fmt::print(os, "{:>4} {:>22} {:>22} {:>12}\n", "k", "SIM", "oracle", "rel.dev");
    const std::size_t n = std::max(report.sim.size(), report.oracle.size());
    for (std::size_t k = 0; k < n; ++k) {
        const std::string s = k < report.sim.size() ? fmt::format("{:.12g}", report.sim[k].real()) : "-";
        const std::string o = k < report.oracle.size() ? fmt::format("{:.12g}", report.oracle[k].real()) : "-";
        std::string dev = "-";
        if (k < report.sim.size() && k < report.oracle.size()) {
            dev = fmt::format("{:.3e}", std::abs(report.sim[k] - report.oracle[k]) / std::abs(report.oracle[k]));
        }
        fmt::print(os, "{:>4} {:>22} {:>22} {:>12}\n", k + 1, s, o, dev);
    }
    fmt::print(os, "count {} vs {}, max relative deviation {:.3e}: {}\n", report.sim.size(), report.oracle.size(),
               report.max_deviation, report.passed() ? "PASS" : "FAIL");
}

void write_mesh_info(std::ostream& os, const RunConfig& cfg) {
    std::unique_ptr<RectMesh> prev;
    for (int level = 0; level <= cfg.refinements; ++level) {
        const auto pts = cfg.problem.oscillator_points();
        RectMesh mesh = (level == 0 || cfg.refinement == RefinementRule::rebuild)
                            ? build_mesh(cfg.plate(), cfg.level_h(level), pts)
                            : refine(*prev);
        const DofMap dofs(mesh);
        fmt::print(os, "level {}: h={:.6g} h_max={:.6g} grid={}x{} nodes={} cells={} boundary_nodes={} n_free={}\n",
                   level, cfg.level_h(level), mesh.h_max(), mesh.x_coords().size(), mesh.y_coords().size(),
                   mesh.num_nodes(), mesh.num_cells(), mesh.boundary_nodes().size(), dofs.n_free());
        for (std::size_t j = 0; j < pts.size(); ++j) {
            const NodeId n = locate_node(mesh, pts[j], 1e-10 * cfg.plate().diameter());
            fmt::print(os, "  oscillator {} at ({:.6g}, {:.6g}) -> node {}\n", j + 1, pts[j].x, pts[j].y, n.value);
        }
        prev = std::make_unique<RectMesh>(std::move(mesh));
    }
}

}  // namespace platesim
