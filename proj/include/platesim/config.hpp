#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "platesim/assembly.hpp"
#include "platesim/mesh.hpp"
#include "platesim/sim.hpp"

namespace platesim {

enum class RefinementRule {
    rebuild,  ///< every level is generated from scratch at spacing h0 / 2^i
    bisect,   ///< every level bisects all intervals of the previous one
};

struct SearchRegion {
    double re_min = 0.0;
    double re_max = 0.0;
    double im_min = -1.0;
    double im_max = 1.0;
    double max_side = 0.0;     ///< tile side cap, 0 = the region's smaller extent
    double pole_gap = 1e-3;    ///< distance kept between tiles and each sigma_j (absolute)
    int track = 3;             ///< eigenvalues followed across refinement levels
};

/// How levels after the first are solved in a convergence study.
struct ContinuationConfig {
    bool enabled = true;
    int m_per_edge = 4;          ///< nodes per edge for the confirmation indicator
    double initial_width = 0.02; ///< half-width of the first continuation box, relative to |lambda|
    double growth = 3.0;         ///< later boxes: half-width = growth * |last change|
    double min_width = 1e-6;     ///< lower bound on the half-width, relative to |lambda|
};

struct RunConfig {
    std::string name = "run";
    std::string shape = "unit_square";
    std::optional<PlateDomain> domain;
    double h0 = 0.2;
    int refinements = 0;
    RefinementRule refinement = RefinementRule::rebuild;
    PlateProblem problem;
    SearchRegion search;
    SimConfig sim;
    bool polish = true;
    ContinuationConfig continuation;

    [[nodiscard]] const PlateDomain& plate() const;
    /// Spacing of level i: h0 / 2^i.
    [[nodiscard]] double level_h(int i) const;
};

/// Parses the flat section/key format:
///
///   [domain]        shape, rectangles, h0, refinements, refinement
///   [material]      rigidity, poisson, rho_d
///   [oscillator.N]  mass, stiffness, x, y
///   [search]        re_min, re_max, im_min, im_max, max_side, pole_gap, track
///   [sim]           m_per_edge, alpha, beta, seed, probes, max_depth, polish,
///                   continuation, continuation_m, continuation_width, continuation_growth,
///                   continuation_min_width
///
/// '#' starts a comment anywhere, ';' only at the start of a line. Numbers may be written as fractions ("9/26"). Unknown sections
/// or keys, duplicates and bad values raise ConfigError naming the line and key.
[[nodiscard]] RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);

/// Parses a real number or a fraction p/q. Throws InvalidArgument on trailing garbage.
[[nodiscard]] double parse_number(const std::string& text);

}  // namespace platesim
