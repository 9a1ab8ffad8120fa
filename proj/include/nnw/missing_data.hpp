#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nnw/core.hpp"
#include "nnw/distributions.hpp"
#include "nnw/nn_index.hpp"
#include "nnw/quadrature.hpp"

namespace nnw {

using Cell = std::optional<double>;

/// Rows of covariates and responses with possibly missing cells. observed[i]
/// is true iff every response cell of row i is present.
struct MARTable {
    std::vector<std::string> covariate_names;
    std::vector<std::string> response_names;
    std::vector<std::string> ids;  ///< empty when the source had no id column
    std::vector<std::vector<Cell>> covariates;
    std::vector<std::vector<Cell>> responses;
    std::vector<bool> observed;

    [[nodiscard]] std::size_t rows() const noexcept { return covariates.size(); }
    [[nodiscard]] std::size_t n_nonmissing() const noexcept {
        return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), true));
    }
    [[nodiscard]] std::size_t n_missing() const noexcept { return rows() - n_nonmissing(); }

    [[nodiscard]] bool covariates_complete() const noexcept {
        return std::all_of(covariates.begin(), covariates.end(), [](const auto& row) {
            return std::all_of(row.begin(), row.end(), [](const Cell& c) { return c.has_value(); });
        });
    }

    /// Recomputes observed from the response cells.
    void refresh_observed() {
        observed.resize(rows());
        for (std::size_t i = 0; i < rows(); ++i)
            observed[i] = std::all_of(responses[i].begin(), responses[i].end(),
                                      [](const Cell& c) { return c.has_value(); });
    }

    /// Builds a table from complete covariates and responses; a NaN response marks the row missing.
    static MARTable from_values(const PointSet& x, const PointSet& y, std::vector<std::string> covariate_names = {},
                                std::vector<std::string> response_names = {}) {
        if (x.size() != y.size()) throw std::invalid_argument("MARTable: covariate/response row mismatch");
        MARTable t;
        for (std::size_t c = 0; c < x.dim(); ++c)
            t.covariate_names.push_back(c < covariate_names.size() ? covariate_names[c] : "x" + std::to_string(c));
        for (std::size_t c = 0; c < y.dim(); ++c)
            t.response_names.push_back(c < response_names.size() ? response_names[c] : "y" + std::to_string(c));
        t.covariates.resize(x.size());
        t.responses.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            for (double v : x[i]) t.covariates[i].emplace_back(v);
            for (double v : y[i]) t.responses[i].push_back(std::isnan(v) ? Cell{} : Cell{v});
        }
        t.refresh_observed();
        return t;
    }
};

struct TableSchema {
    std::vector<std::string> covariates;
    std::vector<std::string> responses;
    std::optional<std::string> id;
};

/// Ingestion failure located at a data row (1-based, header is row 0) and column.
class TableError : public std::invalid_argument {
public:
    TableError(std::size_t row, std::string column, const std::string& what)
        : std::invalid_argument("row " + std::to_string(row) + ", column '" + column + "': " + what),
          row_(row),
          column_(std::move(column)) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

namespace detail {

[[nodiscard]] inline std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

// RFC 4180 style: comma separated, double quotes with "" escapes.
[[nodiscard]] inline std::vector<std::string> split_csv_line(std::string_view line, std::size_t row) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur.push_back(ch);
        }
    }
    if (quoted) throw TableError(row, "", "unterminated quoted field");
    fields.push_back(was_quoted ? cur : trim(cur));
    return fields;
}

[[nodiscard]] inline Cell parse_cell(const std::string& field, std::size_t row, const std::string& column) {
    if (field.empty()) return std::nullopt;
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size() || !std::isfinite(v)) throw std::invalid_argument("");
        return v;
    } catch (const std::logic_error&) {
        throw TableError(row, column, "non-numeric value '" + field + "'");
    }
}

}  // namespace detail

/// Reads a CSV with a header row; empty fields are missing.
[[nodiscard]] inline MARTable ingest_table(std::istream& in, const TableSchema& schema) {
    if (schema.covariates.empty()) throw std::invalid_argument("ingest_table: schema names no covariate columns");
    if (schema.responses.empty()) throw std::invalid_argument("ingest_table: schema names no response columns");
    std::string line;
    if (!std::getline(in, line)) throw TableError(0, "", "missing header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = detail::split_csv_line(line, 0);

    auto locate = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw TableError(0, name, "unknown column");
        return static_cast<std::size_t>(it - header.begin());
    };
    std::vector<std::size_t> cov_idx;
    std::vector<std::size_t> resp_idx;
    for (const auto& c : schema.covariates) cov_idx.push_back(locate(c));
    for (const auto& c : schema.responses) resp_idx.push_back(locate(c));
    const std::optional<std::size_t> id_idx = schema.id ? std::optional(locate(*schema.id)) : std::nullopt;

    MARTable t;
    t.covariate_names = schema.covariates;
    t.response_names = schema.responses;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line, row);
        if (fields.size() != header.size())
            throw TableError(row, "", "expected " + std::to_string(header.size()) + " fields, found " +
                                          std::to_string(fields.size()));
        std::vector<Cell> cov;
        std::vector<Cell> resp;
        for (std::size_t k = 0; k < cov_idx.size(); ++k)
            cov.push_back(detail::parse_cell(fields[cov_idx[k]], row, schema.covariates[k]));
        for (std::size_t k = 0; k < resp_idx.size(); ++k)
            resp.push_back(detail::parse_cell(fields[resp_idx[k]], row, schema.responses[k]));
        t.covariates.push_back(std::move(cov));
        t.responses.push_back(std::move(resp));
        if (id_idx) t.ids.push_back(fields[*id_idx]);
    }
    if (t.rows() == 0) throw TableError(0, "", "table has zero data rows");
    t.refresh_observed();
    return t;
}

[[nodiscard]] inline MARTable ingest_table_file(const std::string& path, const TableSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("ingest_table: cannot open '" + path + "'");
    return ingest_table(in, schema);
}

struct PreprocessOptions {
    bool impute_median = true;
    bool add_indicators = true;
    bool standardize = true;
};

struct ColumnSummary {
    std::string name;
    std::optional<double> imputed_value;  ///< median used for missing cells, if any
    double mean = 0.0;
    double sd = 1.0;
    bool standardized = false;
};

struct PreprocessResult {
    MARTable table;
    std::vector<ColumnSummary> columns;
    std::vector<std::string> warnings;
};

/// Sample median over present values; even counts average the two middle values.
[[nodiscard]] inline double sample_median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("sample_median: no values");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// Median-imputes covariates (adding a 0/1 missingness indicator per imputed
/// column), then z-scores every covariate column including the indicators.
/// Zero-variance columns are left as they are and reported in warnings.
[[nodiscard]] inline PreprocessResult preprocess(const MARTable& table, const PreprocessOptions& opt = {}) {
    PreprocessResult res;
    MARTable& t = res.table;
    t = table;
    const std::size_t rows = t.rows();
    const std::size_t p = t.covariate_names.size();

    for (std::size_t c = 0; c < p; ++c) {
        ColumnSummary summary{t.covariate_names[c], std::nullopt};
        std::vector<double> present;
        bool any_missing = false;
        for (std::size_t i = 0; i < rows; ++i) {
            if (t.covariates[i][c])
                present.push_back(*t.covariates[i][c]);
            else
                any_missing = true;
        }
        if (any_missing && opt.impute_median) {
            if (present.empty())
                throw std::invalid_argument("preprocess: covariate '" + t.covariate_names[c] +
                                            "' has no observed values to impute from");
            const double med = sample_median(present);
            summary.imputed_value = med;
            if (opt.add_indicators) {
                t.covariate_names.push_back(t.covariate_names[c] + "_missing");
                for (std::size_t i = 0; i < rows; ++i) t.covariates[i].emplace_back(t.covariates[i][c] ? 0.0 : 1.0);
            }
            for (std::size_t i = 0; i < rows; ++i)
                if (!t.covariates[i][c]) t.covariates[i][c] = med;
        }
        res.columns.push_back(std::move(summary));
    }
    for (std::size_t c = p; c < t.covariate_names.size(); ++c) res.columns.push_back({t.covariate_names[c], std::nullopt});

    if (opt.standardize) {
        for (std::size_t c = 0; c < t.covariate_names.size(); ++c) {
            std::vector<double> col;
            for (std::size_t i = 0; i < rows; ++i)
                if (t.covariates[i][c]) col.push_back(*t.covariates[i][c]);
            ColumnSummary& s = res.columns[c];
            if (col.size() < 2) {
                res.warnings.push_back("column '" + s.name + "' has fewer than two values; left unstandardized");
                continue;
            }
            s.mean = mean(col);
            s.sd = std::sqrt(sample_variance(col));
            if (!(s.sd > 0.0)) {
                s.sd = 1.0;
                s.mean = 0.0;
                res.warnings.push_back("column '" + s.name + "' has zero variance; left unstandardized");
                continue;
            }
            s.standardized = true;
            for (std::size_t i = 0; i < rows; ++i)
                if (t.covariates[i][c]) t.covariates[i][c] = (*t.covariates[i][c] - s.mean) / s.sd;
        }
    }
    return res;
}

/// Aggregate query over rows: the mean of transform(x, y) over rows passing filter.
/// With no filter this is the plain functional E[g(X, Y) | M = 0] with g = transform.
struct Query {
    std::string description;
    std::function<bool(std::span<const double>, std::span<const double>)> filter;  ///< empty: every row passes
    std::function<double(std::span<const double>, std::span<const double>)> transform;

    [[nodiscard]] bool passes(std::span<const double> x, std::span<const double> y) const {
        return !filter || filter(x, y);
    }
};

enum class EstimateMethod { nn_weighted, complete_case };
enum class EstimateStatus { defined, empty_filter };

[[nodiscard]] constexpr std::string_view to_string(EstimateMethod m) noexcept {
    return m == EstimateMethod::nn_weighted ? "nn_weighted" : "complete_case";
}

struct FunctionalEstimate {
    std::optional<double> value;  ///< absent when no row passes the filter
    EstimateStatus status = EstimateStatus::defined;
    EstimateMethod method = EstimateMethod::nn_weighted;
    std::size_t n_nonmissing = 0;
    std::size_t n_missing = 0;
    std::size_t n_passing = 0;  ///< imputed (or complete-case) rows passing the filter
    double per_row_form = std::numeric_limits<double>::quiet_NaN();
    double weight_form = std::numeric_limits<double>::quiet_NaN();
};

/// 1NN donor for every missing row, among the non-missing rows.
struct NNAssignment {
    std::vector<std::size_t> donor_rows;    ///< table rows with observed responses
    std::vector<std::size_t> missing_rows;  ///< table rows with missing responses
    std::vector<std::size_t> donor_of;      ///< per missing row, position in donor_rows
    std::vector<std::uint64_t> counts;      ///< per donor, number of missing rows it serves

    /// counts / (N - n), the surrogate inverse-propensity weights.
    [[nodiscard]] std::vector<double> weights() const {
        std::vector<double> w(counts.size());
        const double total = static_cast<double>(missing_rows.size());
        for (std::size_t j = 0; j < counts.size(); ++j) w[j] = static_cast<double>(counts[j]) / total;
        return w;
    }
};

namespace detail {

[[nodiscard]] inline std::vector<double> complete_row(const std::vector<Cell>& cells, std::size_t row,
                                                      const char* what) {
    std::vector<double> out;
    out.reserve(cells.size());
    for (const Cell& c : cells) {
        if (!c) throw std::invalid_argument(std::string("row ") + std::to_string(row) + " has a missing " + what);
        out.push_back(*c);
    }
    return out;
}

}  // namespace detail

[[nodiscard]] inline NNAssignment one_nn_assignment(const MARTable& table, std::uint64_t tie_seed,
                                                    unsigned threads = 1) {
    if (!table.covariates_complete())
        throw std::invalid_argument("nn_weighted_functional: covariates contain missing cells; preprocess first");
    NNAssignment a;
    for (std::size_t i = 0; i < table.rows(); ++i) (table.observed[i] ? a.donor_rows : a.missing_rows).push_back(i);
    if (a.donor_rows.empty()) throw std::invalid_argument("nn_weighted_functional: no non-missing rows");
    if (a.missing_rows.empty()) throw std::invalid_argument("nn_weighted_functional: no missing population");

    const std::size_t p = table.covariate_names.size();
    PointSet donors(a.donor_rows.size(), p);
    for (std::size_t j = 0; j < a.donor_rows.size(); ++j) {
        const auto& row = table.covariates[a.donor_rows[j]];
        for (std::size_t c = 0; c < p; ++c) donors.row(j)[c] = *row[c];
    }
    PointSet queries(a.missing_rows.size(), p);
    for (std::size_t i = 0; i < a.missing_rows.size(); ++i) {
        const auto& row = table.covariates[a.missing_rows[i]];
        for (std::size_t c = 0; c < p; ++c) queries.row(i)[c] = *row[c];
    }
    const NNIndex index(std::move(donors), tie_seed);
    a.donor_of = assign_nearest(index, queries, threads);
    a.counts.assign(a.donor_rows.size(), 0);
    for (std::size_t j : a.donor_of) ++a.counts[j];
    return a;
}

/// Evaluates the 1NN weighted functional for a fixed assignment. Both the
/// per-missing-row sum and the count-weighted donor sum are computed and must agree.
[[nodiscard]] inline FunctionalEstimate functional_from_assignment(const MARTable& table, const NNAssignment& a,
                                                                   const Query& query) {
    FunctionalEstimate est;
    est.method = EstimateMethod::nn_weighted;
    est.n_nonmissing = a.donor_rows.size();
    est.n_missing = a.missing_rows.size();

    // g and the filter indicator at each donor
    std::vector<double> g(a.donor_rows.size(), 0.0);
    std::vector<double> pass(a.donor_rows.size(), 0.0);
    for (std::size_t j = 0; j < a.donor_rows.size(); ++j) {
        const std::size_t r = a.donor_rows[j];
        if (a.counts[j] == 0) continue;
        const auto x = detail::complete_row(table.covariates[r], r, "covariate");
        const auto y = detail::complete_row(table.responses[r], r, "response");
        if (!query.passes(x, y)) continue;
        pass[j] = 1.0;
        g[j] = query.transform(x, y);
        if (!std::isfinite(g[j]))
            throw std::domain_error("query '" + query.description + "' is not finite at row " + std::to_string(r));
    }

    std::vector<double> per_row;
    per_row.reserve(a.missing_rows.size());
    std::size_t passing = 0;
    for (std::size_t j : a.donor_of) {
        if (pass[j] == 0.0) continue;
        per_row.push_back(g[j]);
        ++passing;
    }
    est.n_passing = passing;
    if (passing == 0) {
        est.status = EstimateStatus::empty_filter;
        return est;
    }
    const double den = static_cast<double>(passing);
    est.per_row_form = accurate_sum(per_row) / den;

    std::vector<double> counts(a.counts.begin(), a.counts.end());
    for (std::size_t j = 0; j < counts.size(); ++j) counts[j] *= pass[j];
    est.weight_form = accurate_weighted_mean(counts, g, den);

    double scale = 0.0;
    for (double v : per_row) scale += std::abs(v);
    scale /= den;
    if (std::abs(est.per_row_form - est.weight_form) > 8.0 * std::numeric_limits<double>::epsilon() * scale + 1e-300)
        throw std::logic_error("nn_weighted_functional: per-row and weight forms disagree");
    est.value = est.weight_form;
    return est;
}

[[nodiscard]] inline FunctionalEstimate nn_weighted_functional(const MARTable& table, const Query& query,
                                                               std::uint64_t tie_seed, unsigned threads = 1) {
    return functional_from_assignment(table, one_nn_assignment(table, tie_seed, threads), query);
}

/// Mean of the query over non-missing rows (the missing-completely-at-random baseline).
[[nodiscard]] inline FunctionalEstimate complete_case_functional(const MARTable& table, const Query& query) {
    FunctionalEstimate est;
    est.method = EstimateMethod::complete_case;
    est.n_nonmissing = table.n_nonmissing();
    est.n_missing = table.n_missing();
    if (est.n_nonmissing == 0) throw std::invalid_argument("complete_case_functional: no non-missing rows");
    std::vector<double> vals;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (!table.observed[r]) continue;
        std::vector<double> x;
        for (const Cell& c : table.covariates[r]) x.push_back(c.value_or(std::numeric_limits<double>::quiet_NaN()));
        const auto y = detail::complete_row(table.responses[r], r, "response");
        if (!query.passes(x, y)) continue;
        const double v = query.transform(x, y);
        if (!std::isfinite(v))
            throw std::domain_error("query '" + query.description + "' is not finite at row " + std::to_string(r));
        vals.push_back(v);
    }
    est.n_passing = vals.size();
    if (vals.empty()) {
        est.status = EstimateStatus::empty_filter;
        return est;
    }
    est.value = accurate_sum(vals) / static_cast<double>(vals.size());
    est.per_row_form = est.weight_form = *est.value;
    return est;
}

// --- synthetic missing-at-random model ----------------------------------------

/// X ~ covariate law, Y | X ~ Normal(response_mean(X), noise_sd^2), P(M = 1 | X) = propensity(X).
struct MarModel {
    DistributionSpec covariate = DistributionSpec::uniform(0.0, 1.0);
    std::function<double(double)> response_mean = [](double x) { return x; };
    double noise_sd = 0.1;
    std::function<double(double)> propensity = [](double x) { return 0.2 + 0.6 * x; };

    static MarModel mcar(double observed_probability = 0.5) {
        MarModel m;
        m.propensity = [observed_probability](double) { return observed_probability; };
        return m;
    }
};

struct SyntheticMar {
    MARTable table;
    std::vector<double> hidden_responses;  ///< true Y for every row, including missing ones
};

[[nodiscard]] inline SyntheticMar synthetic_mar(const MarModel& model, std::size_t rows, std::uint64_t seed) {
    if (model.covariate.dim() != 1) throw std::invalid_argument("synthetic_mar: 1-D covariate law expected");
    const PointSet x = sample_points(model.covariate, rows, derive_seed(seed, 11));
    std::mt19937_64 eng(derive_seed(seed, 12));
    std::normal_distribution<double> noise(0.0, model.noise_sd);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SyntheticMar out;
    PointSet y(rows, 1);
    for (std::size_t i = 0; i < rows; ++i) {
        const double xi = x[i][0];
        const double yi = model.response_mean(xi) + noise(eng);
        out.hidden_responses.push_back(yi);
        y.row(i)[0] = u(eng) < model.propensity(xi) ? yi : std::numeric_limits<double>::quiet_NaN();
    }
    out.table = MARTable::from_values(x, y, {"x"}, {"y"});
    return out;
}

/// E[Y | M = 0] under the model, by quadrature of E[Y | x] (1 - P(M=1|x)) f(x).
[[nodiscard]] inline double mar_missing_mean_target(const MarModel& model) {
    const IntervalSet sup = support(model.covariate);
    auto num = integrate_pieces(
        [&](double x) {
            return model.response_mean(x) * (1.0 - model.propensity(x)) * density_at(model.covariate, x);
        },
        sup.intervals());
    auto den = integrate_pieces(
        [&](double x) { return (1.0 - model.propensity(x)) * density_at(model.covariate, x); }, sup.intervals());
    if (num.status != QuadratureStatus::converged || den.status != QuadratureStatus::converged || den.value <= 0.0)
        throw std::runtime_error("mar_missing_mean_target: quadrature failed");
    return num.value / den.value;
}

}  // namespace nnw
