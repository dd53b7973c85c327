#include "platesim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "platesim/error.hpp"

namespace platesim {

const PlateDomain& RunConfig::plate() const {
    if (!domain) throw ConfigError("configuration has no domain");
    return *domain;
}

double RunConfig::level_h(int i) const { return std::ldexp(h0, -i); }

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_plain(const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) {
        throw InvalidArgument(fmt::format("'{}' is not a number", text));
    }
    return v;
}

struct Entry {
    std::string value;
    int line = 0;
};

using Section = std::map<std::string, Entry>;

struct Document {
    std::map<std::string, Section> sections;
    std::map<std::string, int> section_lines;
};

Document read_document(std::istream& in, const std::string& source) {
    Document doc;
    std::string raw;
    std::string current;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        // ';' separates rectangles, so it only starts a comment at the beginning of a line.
        const auto cut = raw.find('#');
        const std::string line = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
        if (line.empty() || line.front() == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(fmt::format("{}:{}: unterminated section header", source, line_no));
            current = trim(line.substr(1, line.size() - 2));
            if (current.empty()) throw ConfigError(fmt::format("{}:{}: empty section name", source, line_no));
            if (doc.sections.count(current) != 0) {
                throw ConfigError(fmt::format("{}:{}: duplicate section [{}]", source, line_no, current));
            }
            doc.sections[current];
            doc.section_lines[current] = line_no;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, line_no));
        if (current.empty()) throw ConfigError(fmt::format("{}:{}: key outside of any section", source, line_no));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(fmt::format("{}:{}: missing key name", source, line_no));
        auto& sec = doc.sections[current];
        if (sec.count(key) != 0) {
            throw ConfigError(fmt::format("{}:{}: duplicate key '{}' in [{}] (first set on line {})", source, line_no,
                                          key, current, sec[key].line));
        }
        sec[key] = Entry{value, line_no};
    }
    return doc;
}

class SectionReader {
public:
    SectionReader(const Section& sec, std::string name, std::string source)
        : sec_(sec), name_(std::move(name)), source_(std::move(source)) {}

    void allow(std::initializer_list<const char*> keys) {
        std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [k, e] : sec_) {
            if (ok.count(k) == 0) {
                throw ConfigError(fmt::format("{}:{}: unknown key '{}' in [{}]", source_, e.line, k, name_));
            }
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return sec_.count(key) != 0; }

    [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const {
        const auto it = sec_.find(key);
        return it == sec_.end() ? fallback : it->second.value;
    }

    [[nodiscard]] double number(const std::string& key, double fallback) const {
        const auto it = sec_.find(key);
        if (it == sec_.end()) return fallback;
        try {
            return parse_number(it->second.value);
        } catch (const InvalidArgument& e) {
            throw fail(key, e.what());
        }
    }

    [[nodiscard]] double required(const std::string& key) const {
        if (!has(key)) throw ConfigError(fmt::format("{}: [{}] requires key '{}'", source_, name_, key));
        return number(key, 0.0);
    }

    [[nodiscard]] long long integer(const std::string& key, long long fallback) const {
        const auto it = sec_.find(key);
        if (it == sec_.end()) return fallback;
        const std::string& v = it->second.value;
        long long out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) throw fail(key, "expected an integer");
        return out;
    }

    [[nodiscard]] bool flag(const std::string& key, bool fallback) const {
        const auto it = sec_.find(key);
        if (it == sec_.end()) return fallback;
        std::string v = it->second.value;
        std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
        if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
        if (v == "false" || v == "no" || v == "off" || v == "0") return false;
        throw fail(key, "expected true or false");
    }

    [[nodiscard]] ConfigError fail(const std::string& key, const std::string& why) const {
        const auto it = sec_.find(key);
        const int line = it == sec_.end() ? 0 : it->second.line;
        return ConfigError(fmt::format("{}:{}: [{}] {}: {}", source_, line, name_, key, why));
    }

private:
    const Section& sec_;
    std::string name_;
    std::string source_;
};

std::vector<Rect> parse_rectangles(const std::string& text) {
    std::vector<Rect> rects;
    std::stringstream all(text);
    std::string item;
    while (std::getline(all, item, ';')) {
        item = trim(item);
        if (item.empty()) continue;
        std::replace(item.begin(), item.end(), ',', ' ');
        std::stringstream parts(item);
        std::vector<double> v;
        std::string tok;
        while (parts >> tok) v.push_back(parse_number(tok));
        if (v.size() != 4) throw InvalidArgument(fmt::format("rectangle '{}' needs xmin xmax ymin ymax", item));
        rects.push_back(Rect{v[0], v[1], v[2], v[3]});
    }
    if (rects.empty()) throw InvalidArgument("no rectangles given");
    return rects;
}

template <class Fn>
void checked(const SectionReader& r, const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const InvalidArgument& e) {
        throw r.fail(key, e.what());
    }
}

}  // namespace

double parse_number(const std::string& raw) {
    const std::string text = trim(raw);
    const auto slash = text.find('/');
    if (slash == std::string::npos) return parse_plain(text);
    const double num = parse_plain(trim(text.substr(0, slash)));
    const double den = parse_plain(trim(text.substr(slash + 1)));
    if (den == 0.0) throw InvalidArgument(fmt::format("'{}' divides by zero", text));
    return num / den;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    const Document doc = read_document(in, source);
    RunConfig cfg;
    static const Section empty;
    auto section = [&](const std::string& name) -> const Section& {
        const auto it = doc.sections.find(name);
        return it == doc.sections.end() ? empty : it->second;
    };

    std::vector<std::pair<int, std::string>> oscillator_sections;
    for (const auto& [name, sec] : doc.sections) {
        if (name == "domain" || name == "material" || name == "search" || name == "sim") continue;
        const int line = doc.section_lines.at(name);
        if (name.rfind("oscillator.", 0) == 0) {
            const std::string idx = name.substr(11);
            int k = 0;
            const auto [ptr, ec] = std::from_chars(idx.data(), idx.data() + idx.size(), k);
            if (ec != std::errc{} || ptr != idx.data() + idx.size() || idx.empty()) {
                throw ConfigError(fmt::format("{}:{}: oscillator sections are named [oscillator.N]", source, line));
            }
            oscillator_sections.emplace_back(k, name);
            continue;
        }
        throw ConfigError(fmt::format("{}:{}: unknown section [{}]", source, line, name));
    }

    {
        SectionReader r(section("domain"), "domain", source);
        r.allow({"shape", "rectangles", "h0", "refinements", "refinement"});
        cfg.shape = r.text("shape", "unit_square");
        checked(r, "shape", [&] {
            if (cfg.shape == "unit_square") {
                if (r.has("rectangles")) throw InvalidArgument("'rectangles' only applies to shape = rectangles");
                cfg.domain = PlateDomain::unit_square();
            } else if (cfg.shape == "l_shape") {
                if (r.has("rectangles")) throw InvalidArgument("'rectangles' only applies to shape = rectangles");
                cfg.domain = PlateDomain::l_shape();
            } else if (cfg.shape == "rectangles") {
                if (!r.has("rectangles")) throw InvalidArgument("shape = rectangles needs a 'rectangles' key");
            } else {
                throw InvalidArgument(fmt::format("unknown shape '{}' (unit_square, l_shape, rectangles)", cfg.shape));
            }
        });
        if (cfg.shape == "rectangles") {
            checked(r, "rectangles", [&] { cfg.domain = PlateDomain(parse_rectangles(r.text("rectangles", ""))); });
        }
        cfg.h0 = r.number("h0", cfg.h0);
        if (!(cfg.h0 > 0.0)) throw r.fail("h0", "must be positive");
        cfg.refinements = static_cast<int>(r.integer("refinements", cfg.refinements));
        if (cfg.refinements < 0 || cfg.refinements > 12) throw r.fail("refinements", "must lie in [0, 12]");
        const std::string rule = r.text("refinement", "rebuild");
        if (rule == "rebuild") {
            cfg.refinement = RefinementRule::rebuild;
        } else if (rule == "bisect") {
            cfg.refinement = RefinementRule::bisect;
        } else {
            throw r.fail("refinement", "expected 'rebuild' or 'bisect'");
        }
    }

    {
        SectionReader r(section("material"), "material", source);
        r.allow({"rigidity", "poisson", "rho_d"});
        cfg.problem.material.rigidity = r.number("rigidity", 1.0);
        cfg.problem.material.poisson = r.number("poisson", 0.3);
        cfg.problem.material.rho_d = r.number("rho_d", 1.0);
    }

    std::sort(oscillator_sections.begin(), oscillator_sections.end());
    for (const auto& [k, name] : oscillator_sections) {
        SectionReader r(section(name), name, source);
        r.allow({"mass", "stiffness", "x", "y"});
        Oscillator o;
        o.mass = r.required("mass");
        o.stiffness = r.required("stiffness");
        o.location = Point2{r.required("x"), r.required("y")};
        if (!(o.mass > 0.0)) throw r.fail("mass", "must be positive");
        if (!(o.stiffness > 0.0)) throw r.fail("stiffness", "must be positive");
        if (!cfg.plate().contains_interior(o.location)) {
            throw r.fail("x", fmt::format("point ({}, {}) is not inside the plate", o.location.x, o.location.y));
        }
        cfg.problem.oscillators.push_back(o);
    }
    try {
        cfg.problem.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(fmt::format("{}: {}", source, e.what()));
    }

    {
        SectionReader r(section("search"), "search", source);
        r.allow({"re_min", "re_max", "im_min", "im_max", "max_side", "pole_gap", "track"});
        auto& s = cfg.search;
        s.re_min = r.required("re_min");
        s.re_max = r.required("re_max");
        s.im_min = r.number("im_min", s.im_min);
        s.im_max = r.number("im_max", s.im_max);
        s.max_side = r.number("max_side", s.max_side);
        s.pole_gap = r.number("pole_gap", s.pole_gap);
        s.track = static_cast<int>(r.integer("track", s.track));
        if (!(s.re_max > s.re_min)) throw r.fail("re_max", "must exceed re_min");
        if (!(s.im_max > s.im_min)) throw r.fail("im_max", "must exceed im_min");
        if (!(s.max_side >= 0.0)) throw r.fail("max_side", "must be non-negative");
        if (!(s.pole_gap > 0.0)) throw r.fail("pole_gap", "must be positive");
        if (s.track < 1) throw r.fail("track", "must be at least 1");
    }

    {
        SectionReader r(section("sim"), "sim", source);
        r.allow({"m_per_edge", "alpha", "beta", "seed", "probes", "max_depth", "polish", "continuation",
                 "continuation_m", "continuation_width", "continuation_growth", "continuation_min_width"});
        auto& s = cfg.sim;
        s.m_per_edge = static_cast<int>(r.integer("m_per_edge", s.m_per_edge));
        s.alpha = r.number("alpha", s.alpha);
        s.beta = r.number("beta", s.beta);
        const long long seed = r.integer("seed", static_cast<long long>(s.seed));
        if (seed < 0) throw r.fail("seed", "must be non-negative");
        s.seed = static_cast<std::uint64_t>(seed);
        s.probes = static_cast<int>(r.integer("probes", s.probes));
        s.max_depth = static_cast<int>(r.integer("max_depth", s.max_depth));
        cfg.polish = r.flag("polish", cfg.polish);
        auto& c = cfg.continuation;
        c.enabled = r.flag("continuation", c.enabled);
        c.m_per_edge = static_cast<int>(r.integer("continuation_m", c.m_per_edge));
        c.initial_width = r.number("continuation_width", c.initial_width);
        c.growth = r.number("continuation_growth", c.growth);
        c.min_width = r.number("continuation_min_width", c.min_width);
        try {
            s.validate();
        } catch (const InvalidArgument& e) {
            throw ConfigError(fmt::format("{}: [sim] {}", source, e.what()));
        }
        if (!(s.beta < 1.0)) throw r.fail("beta", "is relative to the box half-width and must be below 1");
        if (c.m_per_edge < 2) throw r.fail("continuation_m", "must be >= 2");
        if (!(c.initial_width > 0.0 && c.initial_width < 1.0)) throw r.fail("continuation_width", "must lie in (0, 1)");
        if (!(c.growth >= 1.0)) throw r.fail("continuation_growth", "must be >= 1");
        if (!(c.min_width > 0.0)) throw r.fail("continuation_min_width", "must be positive");
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open configuration file '{}'", path.string()));
    RunConfig cfg = parse_config(in, path.string());
    cfg.name = path.stem().string();
    return cfg;
}

}  // namespace platesim
