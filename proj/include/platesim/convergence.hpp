#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace platesim {

/// order_i = log2(D_{i-1} / D_i) with D_i = |x_i - x_{i-1}|. Entries 0 and 1 are empty, as is
/// any entry where a difference vanishes.
[[nodiscard]] std::vector<std::optional<double>> convergence_orders(std::span<const std::complex<double>> seq);
[[nodiscard]] std::vector<std::optional<double>> convergence_orders(std::span<const double> seq);

/// |x_i - x_{i-1}| / |x_i|; entry 0 is empty.
[[nodiscard]] std::vector<std::optional<double>> relative_changes(std::span<const std::complex<double>> seq);

struct ConvergenceEntry {
    std::complex<double> lambda;
    std::optional<double> rel_err;
    std::optional<double> order;
    bool flagged = false;  ///< tracking was ambiguous or the value could not be confirmed
};

struct ConvergenceRow {
    double h = 0.0;
    long long n_free = 0;
    std::vector<ConvergenceEntry> entries;  ///< one per tracked eigenvalue
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;

    [[nodiscard]] std::size_t tracked() const { return rows.empty() ? 0 : rows.front().entries.size(); }
    /// Sequence of the k-th tracked eigenvalue over all levels.
    [[nodiscard]] std::vector<std::complex<double>> series(std::size_t k) const;
    /// Recomputes rel_err and order of every entry from the eigenvalues.
    void update_columns();
};

/// Header "h,n_free,lambda1_re,lambda1_im,rel_err1,order1,flag1,..." and one row per level,
/// 12 significant digits, empty fields for undefined values.
void write_csv(std::ostream& os, const ConvergenceTable& table);
/// Inverse of write_csv. Throws InvalidArgument on malformed input.
[[nodiscard]] ConvergenceTable read_csv(std::istream& is);

/// Columns: n_free followed by rel_err of each tracked eigenvalue (NaN where undefined).
void write_gnuplot_data(std::ostream& os, const ConvergenceTable& table);

/// Log-log plot of rel_err against the number of degrees of freedom, one series per
/// tracked eigenvalue.
void write_svg(std::ostream& os, const ConvergenceTable& table, const std::string& title);

/// Aligned text table in the layout "h | lambda_1 | order | lambda_2 | order | ...".
void write_text(std::ostream& os, const ConvergenceTable& table);

}  // namespace platesim
