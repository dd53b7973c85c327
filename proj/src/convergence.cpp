#include "platesim/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "platesim/config.hpp"
#include "platesim/error.hpp"

namespace platesim {

std::vector<std::optional<double>> convergence_orders(std::span<const std::complex<double>> seq) {
    std::vector<std::optional<double>> out(seq.size());
    for (std::size_t i = 2; i < seq.size(); ++i) {
        const double prev = std::abs(seq[i - 1] - seq[i - 2]);
        const double cur = std::abs(seq[i] - seq[i - 1]);
        if (prev > 0.0 && cur > 0.0) out[i] = std::log2(prev / cur);
    }
    return out;
}

std::vector<std::optional<double>> convergence_orders(std::span<const double> seq) {
    std::vector<std::complex<double>> c(seq.begin(), seq.end());
    return convergence_orders(std::span<const std::complex<double>>(c));
}

std::vector<std::optional<double>> relative_changes(std::span<const std::complex<double>> seq) {
    std::vector<std::optional<double>> out(seq.size());
    for (std::size_t i = 1; i < seq.size(); ++i) {
        if (std::abs(seq[i]) > 0.0) out[i] = std::abs(seq[i] - seq[i - 1]) / std::abs(seq[i]);
    }
    return out;
}

std::vector<std::complex<double>> ConvergenceTable::series(std::size_t k) const {
    std::vector<std::complex<double>> s;
    for (const ConvergenceRow& r : rows) s.push_back(r.entries.at(k).lambda);
    return s;
}

void ConvergenceTable::update_columns() {
    for (std::size_t k = 0; k < tracked(); ++k) {
        const auto s = series(k);
        const auto rel = relative_changes(s);
        const auto ord = convergence_orders(std::span<const std::complex<double>>(s));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            rows[i].entries[k].rel_err = rel[i];
            rows[i].entries[k].order = ord[i];
        }
    }
}

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }
std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> read_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return parse_number(s);
}

}  // namespace

void write_csv(std::ostream& os, const ConvergenceTable& table) {
    os << "h,n_free";
    for (std::size_t k = 1; k <= table.tracked(); ++k) {
        os << fmt::format(",lambda{0}_re,lambda{0}_im,rel_err{0},order{0},flag{0}", k);
    }
    os << '\n';
    for (const ConvergenceRow& r : table.rows) {
        os << num(r.h) << ',' << r.n_free;
        for (const ConvergenceEntry& e : r.entries) {
            os << ',' << num(e.lambda.real()) << ',' << num(e.lambda.imag()) << ',' << opt(e.rel_err) << ','
               << opt(e.order) << ',' << (e.flagged ? 1 : 0);
        }
        os << '\n';
    }
}

ConvergenceTable read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InvalidArgument("read_csv: missing header");
    const auto header = split(line);
    if (header.size() < 2 || header[0] != "h" || header[1] != "n_free" || (header.size() - 2) % 5 != 0) {
        throw InvalidArgument("read_csv: unexpected header");
    }
    const std::size_t tracked = (header.size() - 2) / 5;
    ConvergenceTable t;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw InvalidArgument(fmt::format("read_csv: line {} has {} fields, expected {}", line_no, cells.size(),
                                              header.size()));
        }
        ConvergenceRow r;
        try {
            r.h = parse_number(cells[0]);
            r.n_free = static_cast<long long>(parse_number(cells[1]));
            for (std::size_t k = 0; k < tracked; ++k) {
                const std::size_t c = 2 + 5 * k;
                ConvergenceEntry e;
                e.lambda = {parse_number(cells[c]), parse_number(cells[c + 1])};
                e.rel_err = read_opt(cells[c + 2]);
                e.order = read_opt(cells[c + 3]);
                e.flagged = cells[c + 4] == "1";
                r.entries.push_back(e);
            }
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(fmt::format("read_csv: line {}: {}", line_no, e.what()));
        }
        t.rows.push_back(std::move(r));
    }
    return t;
}

void write_gnuplot_data(std::ostream& os, const ConvergenceTable& table) {
    os << "# n_free";
    for (std::size_t k = 1; k <= table.tracked(); ++k) os << " rel_err" << k;
    os << '\n';
    for (const ConvergenceRow& r : table.rows) {
        os << r.n_free;
        for (const ConvergenceEntry& e : r.entries) os << ' ' << (e.rel_err ? num(*e.rel_err) : std::string("NaN"));
        os << '\n';
    }
}

void write_svg(std::ostream& os, const ConvergenceTable& table, const std::string& title) {
    constexpr double width = 640;
    constexpr double height = 480;
    constexpr double left = 80;
    constexpr double right = 150;
    constexpr double top = 40;
    constexpr double bottom = 60;
    static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const ConvergenceRow& r : table.rows) {
        for (const ConvergenceEntry& e : r.entries) {
            if (!e.rel_err || *e.rel_err <= 0.0 || r.n_free <= 0) continue;
            xmin = std::min(xmin, std::log10(static_cast<double>(r.n_free)));
            xmax = std::max(xmax, std::log10(static_cast<double>(r.n_free)));
            ymin = std::min(ymin, std::log10(*e.rel_err));
            ymax = std::max(ymax, std::log10(*e.rel_err));
        }
    }
    const bool empty = !(xmin <= xmax);
    if (empty) {
        xmin = 0;
        xmax = 1;
        ymin = -1;
        ymax = 0;
    }
    xmin = std::floor(xmin);
    xmax = std::max(std::ceil(xmax), xmin + 1);
    ymin = std::floor(ymin);
    ymax = std::max(std::ceil(ymax), ymin + 1);
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };

    fmt::print(os, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
                   "font-size=\"12\">\n",
               width, height);
    fmt::print(os, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    fmt::print(os, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", left + pw / 2, title);
    for (double d = xmin; d <= xmax + 1e-9; d += 1.0) {
        fmt::print(os, "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" stroke=\"#ddd\"/>\n", px(d),
                   top, top + ph);
        fmt::print(os, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">1e{}</text>\n", px(d), top + ph + 18,
                   static_cast<int>(d));
    }
    for (double d = ymin; d <= ymax + 1e-9; d += 1.0) {
        fmt::print(os, "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"#ddd\"/>\n", left,
                   py(d), left + pw);
        fmt::print(os, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">1e{}</text>\n", left - 6, py(d) + 4,
                   static_cast<int>(d));
    }
    fmt::print(os, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", left, top,
               pw, ph);
    fmt::print(os, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">degrees of freedom</text>\n", left + pw / 2,
               height - 16);
    fmt::print(os,
               "<text x=\"18\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0:.1f})\">relative "
               "error</text>\n",
               top + ph / 2);
    for (std::size_t k = 0; k < table.tracked(); ++k) {
        const char* colour = colours[k % std::size(colours)];
        std::string points;
        for (const ConvergenceRow& r : table.rows) {
            const ConvergenceEntry& e = r.entries[k];
            if (!e.rel_err || *e.rel_err <= 0.0 || r.n_free <= 0) continue;
            const double x = px(std::log10(static_cast<double>(r.n_free)));
            const double y = py(std::log10(*e.rel_err));
            points += fmt::format("{:.1f},{:.1f} ", x, y);
            fmt::print(os, "<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\"/>\n", x, y, colour);
        }
        if (!points.empty()) {
            fmt::print(os, "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", points,
                       colour);
        }
        const double ly = top + 16 + 18 * static_cast<double>(k);
        fmt::print(os, "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                   left + pw + 12, ly, left + pw + 36, colour);
        fmt::print(os, "<text x=\"{}\" y=\"{}\">lambda {}</text>\n", left + pw + 42, ly + 4, k + 1);
    }
    os << "</svg>\n";
}

void write_text(std::ostream& os, const ConvergenceTable& table) {
    os << fmt::format("{:>12} {:>9}", "h", "n_free");
    for (std::size_t k = 1; k <= table.tracked(); ++k) {
        os << fmt::format(" {:>16} {:>10} {:>6}", fmt::format("lambda_{}", k), "rel.err", "order");
    }
    os << '\n';
    for (const ConvergenceRow& r : table.rows) {
        const double inv = 1.0 / r.h;
        const std::string h = std::abs(inv - std::round(inv)) < 1e-9 ? fmt::format("1/{}", std::lround(inv))
                                                                      : fmt::format("{:.6g}", r.h);
        os << fmt::format("{:>12} {:>9}", h, r.n_free);
        for (const ConvergenceEntry& e : r.entries) {
            os << fmt::format(" {:>16.10g} {:>10} {:>6}{}", e.lambda.real(),
                              e.rel_err ? fmt::format("{:.3e}", *e.rel_err) : "-",
                              e.order ? fmt::format("{:.2f}", *e.order) : "-", e.flagged ? "*" : "");
        }
        os << '\n';
    }
}

}  // namespace platesim
