#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "nnw/core.hpp"
#include "nnw/covariate_shift.hpp"
#include "nnw/diagnostics.hpp"
#include "nnw/distributions.hpp"
#include "nnw/missing_data.hpp"
#include "nnw/nn_index.hpp"
#include "nnw/nn_measure.hpp"
#include "nnw/registry.hpp"

namespace nnw {

/// Replicate seeds derived from a master seed.
[[nodiscard]] inline std::vector<std::uint64_t> replicate_seeds(std::uint64_t master, std::size_t replicates) {
    std::vector<std::uint64_t> out(replicates);
    for (std::size_t r = 0; r < replicates; ++r) out[r] = derive_seed(master, r);
    return out;
}

/// Seed for one (replicate, n) cell; cells at different n are independent.
[[nodiscard]] inline std::uint64_t cell_seed(std::uint64_t replicate_seed, std::size_t n) {
    return derive_seed(replicate_seed, n);
}

[[nodiscard]] inline std::string sig6(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

[[nodiscard]] inline std::string full(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// --- table1 sweep --------------------------------------------------------------

struct Table1Params {
    std::vector<Example> examples;
    std::vector<std::size_t> n_grid{100, 1000, 10000, 100000};
    std::size_t m = 1000000;
    std::vector<std::uint64_t> seeds;
    unsigned threads = 1;
};

struct Table1Cell {
    std::string example;
    std::size_t n;
    std::size_t replicate;
    std::uint64_t seed;
    double q1;
    double mu0_direct;
};

struct Table1Summary {
    std::string example;
    std::size_t n;
    std::size_t replicates;
    double mean_q1;
    double variance_q1;  ///< NaN with one replicate
    double mean_abs_error;
    double mean_mu0_direct;
    double limit;
    std::optional<double> reference;
};

struct Table1Result {
    std::vector<Table1Cell> cells;
    std::vector<Table1Summary> summary;

    [[nodiscard]] const Table1Summary* find(const std::string& example, std::size_t n) const {
        for (const auto& s : summary)
            if (s.example == example && s.n == n) return &s;
        return nullptr;
    }
};

/// Rough single-thread seconds for a table1 sweep.
[[nodiscard]] inline double table1_runtime_estimate(const Table1Params& p) {
    double secs = 0.0;
    for (std::size_t n : p.n_grid)
        secs += static_cast<double>(p.m) * (1.0 + std::log2(static_cast<double>(n)) / 16.0) / 1.5e6;
    return secs * static_cast<double>(p.examples.size() * p.seeds.size());
}

[[nodiscard]] inline Table1Result run_table1(const Table1Params& p,
                                             const std::function<void(const Table1Cell&)>& progress = {}) {
    if (p.examples.empty() || p.n_grid.empty() || p.seeds.empty())
        throw std::invalid_argument("run_table1: need examples, n_grid and seeds");
    Table1Result res;
    for (const auto& ex : p.examples) {
        for (std::size_t n : p.n_grid) {
            std::vector<double> q;
            std::vector<double> err;
            std::vector<double> direct;
            for (std::size_t r = 0; r < p.seeds.size(); ++r) {
                const std::uint64_t s = cell_seed(p.seeds[r], n);
                const Q1Run run = run_q1(ex.pair, ex.eta, n, p.m, s, p.threads);
                Table1Cell c{ex.name, n, r, s, run.estimate.value, run.mu0_direct};
                q.push_back(c.q1);
                err.push_back(std::abs(c.q1 - ex.limit));
                direct.push_back(c.mu0_direct);
                res.cells.push_back(c);
                if (progress) progress(c);
            }
            std::optional<double> ref;
            static constexpr std::size_t published[] = {100, 1000, 10000, 100000};
            for (std::size_t k = 0; k < ex.reference.size() && k < 4; ++k)
                if (published[k] == n) ref = ex.reference[k];
            res.summary.push_back({ex.name, n, q.size(), mean(q),
                                   q.size() > 1 ? sample_variance(q) : std::numeric_limits<double>::quiet_NaN(),
                                   mean(err), mean(direct), ex.limit, ref});
        }
    }
    return res;
}

inline void write_table1_cells(std::ostream& os, const Table1Result& r) {
    os << "example,n,replicate,seed,q1,mu0_direct\n";
    for (const auto& c : r.cells)
        os << c.example << ',' << c.n << ',' << c.replicate << ',' << c.seed << ',' << full(c.q1) << ','
           << full(c.mu0_direct) << '\n';
}

inline void write_table1_summary(std::ostream& os, const Table1Result& r, bool human) {
    auto num = [human](double v) { return human ? sig6(v) : full(v); };
    os << "example,n,replicates,mean_q1,variance_q1,mean_abs_error,mean_mu0_direct,limit,reference\n";
    for (const auto& s : r.summary)
        os << s.example << ',' << s.n << ',' << s.replicates << ',' << num(s.mean_q1) << ',' << num(s.variance_q1)
           << ',' << num(s.mean_abs_error) << ',' << num(s.mean_mu0_direct) << ',' << num(s.limit) << ','
           << (s.reference ? num(*s.reference) : std::string()) << '\n';
}

// --- figure data --------------------------------------------------------------

struct FigureParams {
    Example example = builtin_example("beta");
    std::size_t n = 1000;
    std::size_t m = 1000000;
    std::uint64_t seed = 1;
    std::optional<std::pair<double, double>> subinterval;
    unsigned threads = 1;
};

struct FigureData {
    std::vector<CellRecord> records;
    std::vector<CellRecord> subinterval_records;
    double weight_total = 0.0;
};

[[nodiscard]] inline FigureData run_figure_data(const FigureParams& p) {
    if (p.example.pair.mu1.dim() != 1) throw std::invalid_argument("figure-data: 1-D example required");
    const PointSet data = sample_points(p.example.pair.mu1, p.n, derive_seed(p.seed, streams::data), p.threads);
    const PointSet mc = sample_points(p.example.pair.mu0, p.m, derive_seed(p.seed, streams::mu0_samples), p.threads);
    const NNIndex index(data, derive_seed(p.seed, streams::ties));
    const VoronoiWeights w = voronoi_weights(index, mc, p.threads);
    FigureData out;
    out.weight_total = w.total();
    out.records = cell_measure_profile(w, data, p.example.pair);
    if (p.subinterval)
        for (const auto& r : out.records)
            if (r.x >= p.subinterval->first && r.x <= p.subinterval->second) out.subinterval_records.push_back(r);
    return out;
}

inline void write_figure_records(std::ostream& os, const std::vector<CellRecord>& records) {
    os << "x,weight,n_weight,density_ratio\n";
    for (const auto& r : records) {
        os << full(r.x) << ',' << full(r.weight) << ',' << full(r.n_weight) << ',';
        if (r.ratio_kind == RatioKind::finite)
            os << full(r.density_ratio);
        else
            os << (r.ratio_kind == RatioKind::infinite ? "inf" : "nan");
        os << '\n';
    }
}

// --- missing data demo ----------------------------------------------------------

/// Aggregate query by name: transform in {y, log_y, one} of the first response,
/// optionally restricted by "<column> <op> <value>" on raw (unstandardized) values.
struct QuerySpec {
    std::string transform = "y";
    std::optional<std::string> filter_column;
    std::string filter_op;
    double filter_value = 0.0;

    [[nodiscard]] std::string describe() const {
        std::string d = transform == "one" ? "count" : "mean(" + transform + ")";
        if (filter_column) d += " where " + *filter_column + " " + filter_op + " " + sig6(filter_value);
        return d;
    }
};

[[nodiscard]] inline std::vector<std::string> query_transforms() { return {"y", "log_y", "one"}; }
[[nodiscard]] inline std::vector<std::string> query_ops() { return {"<", "<=", ">", ">=", "==", "!="}; }

/// Builds a Query against a table's columns; `columns` (from preprocess) maps
/// standardized covariates back to raw values for the filter.
[[nodiscard]] inline Query build_query(const QuerySpec& spec, const MARTable& table,
                                       const std::vector<ColumnSummary>* columns = nullptr) {
    Query q;
    q.description = spec.describe();
    if (spec.transform == "y")
        q.transform = [](std::span<const double>, std::span<const double> y) { return y[0]; };
    else if (spec.transform == "log_y")
        q.transform = [](std::span<const double>, std::span<const double> y) { return std::log(y[0]); };
    else if (spec.transform == "one")
        q.transform = [](std::span<const double>, std::span<const double>) { return 1.0; };
    else
        throw std::invalid_argument("unknown query transform '" + spec.transform + "'");
    if (!spec.filter_column) return q;

    bool on_response = false;
    std::size_t col = 0;
    const auto& cn = table.covariate_names;
    const auto& rn = table.response_names;
    if (auto it = std::find(cn.begin(), cn.end(), *spec.filter_column); it != cn.end()) {
        col = static_cast<std::size_t>(it - cn.begin());
    } else if (auto jt = std::find(rn.begin(), rn.end(), *spec.filter_column); jt != rn.end()) {
        col = static_cast<std::size_t>(jt - rn.begin());
        on_response = true;
    } else {
        throw std::invalid_argument("query filter: unknown column '" + *spec.filter_column + "'");
    }
    double scale = 1.0;
    double shift = 0.0;
    if (!on_response && columns && col < columns->size() && (*columns)[col].standardized) {
        scale = (*columns)[col].sd;
        shift = (*columns)[col].mean;
    }
    const std::string op = spec.filter_op;
    const double v = spec.filter_value;
    std::function<bool(double)> cmp;
    if (op == "<") cmp = [v](double a) { return a < v; };
    else if (op == "<=") cmp = [v](double a) { return a <= v; };
    else if (op == ">") cmp = [v](double a) { return a > v; };
    else if (op == ">=") cmp = [v](double a) { return a >= v; };
    else if (op == "==") cmp = [v](double a) { return a == v; };
    else if (op == "!=") cmp = [v](double a) { return a != v; };
    else throw std::invalid_argument("query filter: unknown operator '" + op + "'");
    q.filter = [=](std::span<const double> x, std::span<const double> y) {
        return cmp(on_response ? y[col] : x[col] * scale + shift);
    };
    return q;
}

struct MarDemoParams {
    bool synthetic = true;
    MarModel model;
    std::size_t rows = 20000;
    std::vector<std::uint64_t> seeds;
    // file source
    std::string path;
    TableSchema schema;
    bool preprocess_table = true;
    QuerySpec query;
    std::uint64_t tie_seed = 0;
    unsigned threads = 1;
};

struct MarDemoRow {
    std::size_t replicate;
    std::uint64_t seed;
    FunctionalEstimate nn;
    FunctionalEstimate cc;
    std::optional<double> target;
};

struct MarDemoResult {
    std::vector<MarDemoRow> rows;
    std::vector<std::string> warnings;
    std::optional<double> target;

    [[nodiscard]] double mean_nn_error() const {
        std::vector<double> e;
        for (const auto& r : rows)
            if (r.target && r.nn.value) e.push_back(std::abs(*r.nn.value - *r.target));
        return e.empty() ? std::numeric_limits<double>::quiet_NaN() : mean(e);
    }
    [[nodiscard]] double mean_nn_estimate() const {
        std::vector<double> e;
        for (const auto& r : rows)
            if (r.nn.value) e.push_back(*r.nn.value);
        return e.empty() ? std::numeric_limits<double>::quiet_NaN() : mean(e);
    }
    /// Replicates where complete-case is farther from the target than nn_weighted.
    [[nodiscard]] std::size_t cc_worse_count() const {
        std::size_t k = 0;
        for (const auto& r : rows)
            if (r.target && r.nn.value && r.cc.value &&
                std::abs(*r.cc.value - *r.target) > std::abs(*r.nn.value - *r.target))
                ++k;
        return k;
    }
};

[[nodiscard]] inline MarDemoResult run_mar_demo(const MarDemoParams& p) {
    MarDemoResult res;
    if (p.synthetic) {
        if (p.seeds.empty()) throw std::invalid_argument("mar-demo: need at least one seed");
        res.target = mar_missing_mean_target(p.model);
        for (std::size_t r = 0; r < p.seeds.size(); ++r) {
            const SyntheticMar sm = synthetic_mar(p.model, p.rows, p.seeds[r]);
            const Query q = build_query(p.query, sm.table);
            res.rows.push_back({r, p.seeds[r],
                                nn_weighted_functional(sm.table, q, derive_seed(p.seeds[r], streams::ties), p.threads),
                                complete_case_functional(sm.table, q), res.target});
        }
        return res;
    }
    const MARTable raw = ingest_table_file(p.path, p.schema);
    // complete-case works on raw rows; the 1NN estimate needs complete, scaled covariates
    const Query raw_q = build_query(p.query, raw);
    if (p.preprocess_table) {
        const PreprocessResult pr = preprocess(raw);
        res.warnings = pr.warnings;
        const Query q = build_query(p.query, pr.table, &pr.columns);
        res.rows.push_back({0, p.tie_seed, nn_weighted_functional(pr.table, q, p.tie_seed, p.threads),
                            complete_case_functional(raw, raw_q), std::nullopt});
    } else {
        res.rows.push_back({0, p.tie_seed, nn_weighted_functional(raw, raw_q, p.tie_seed, p.threads),
                            complete_case_functional(raw, raw_q), std::nullopt});
    }
    return res;
}

inline void write_mar_rows(std::ostream& os, const MarDemoResult& r, const std::string& query, bool human) {
    auto num = [human](const std::optional<double>& v) { return v ? (human ? sig6(*v) : full(*v)) : "undefined"; };
    os << "method,query,value,n,N,replicate,target\n";
    for (const auto& row : r.rows)
        for (const FunctionalEstimate* e : {&row.nn, &row.cc})
            os << to_string(e->method) << ',' << query << ',' << num(e->value) << ',' << e->n_nonmissing << ','
               << e->n_nonmissing + e->n_missing << ',' << row.replicate << ',' << num(row.target) << '\n';
}

// --- covariate shift demo ---------------------------------------------------------

struct ShiftDemoParams {
    std::string scenario_name = "gaussian_linear";
    ShiftScenario scenario = ShiftScenario::gaussian_linear();
    std::size_t train_rows = 2000;
    std::size_t validation_rows = 1000;
    std::size_t test_rows = 2000;
    std::size_t oracle_rows = 100000;
    double ridge_lambda = 0.0;
    LossSpec loss = LossSpec::squared_error();
    std::vector<double> constants{0.0, 1.0};  ///< constant hypotheses for selection
    std::vector<std::uint64_t> seeds;
    unsigned threads = 1;
};

struct ShiftDemoRow {
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    double tilde_e = 0.0;
    double validation_mean_loss = 0.0;  ///< unweighted, for comparison
    double true_risk = 0.0;             ///< oracle: fresh labeled test draws
    double hidden_label_risk = 0.0;     ///< the test rows' own hidden labels
    Selection selection;
    std::size_t empirical_choice = 0;
    std::size_t oracle_choice = 0;
    std::vector<double> oracle_risks;
};

struct ShiftDemoResult {
    std::vector<ShiftDemoRow> rows;
    std::vector<std::string> hypothesis_labels;

    [[nodiscard]] double mean_tilde_e() const {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.tilde_e);
        return mean(v);
    }
    [[nodiscard]] double mean_true_risk() const {
        std::vector<double> v;
        for (const auto& r : rows) v.push_back(r.true_risk);
        return mean(v);
    }
    [[nodiscard]] double relative_error() const { return std::abs(mean_tilde_e() - mean_true_risk()) / mean_true_risk(); }
    [[nodiscard]] std::size_t correct_selections() const {
        std::size_t k = 0;
        for (const auto& r : rows) k += r.selection.best == r.oracle_choice;
        return k;
    }
};

[[nodiscard]] inline ShiftDemoResult run_shift_demo(const ShiftDemoParams& p) {
    if (p.seeds.empty()) throw std::invalid_argument("shift-demo: need at least one seed");
    if (p.train_rows < 2 || p.validation_rows < 1 || p.test_rows < 1 || p.oracle_rows < 1)
        throw std::invalid_argument("shift-demo: split sizes too small");
    if (p.constants.empty()) throw std::invalid_argument("shift-demo: need at least one constant hypothesis");
    ShiftDemoResult res;
    std::vector<PredictorHandle> hyps;
    for (double c : p.constants) hyps.push_back(constant_predictor({c}, "constant(" + sig6(c) + ")"));
    for (const auto& h : hyps) res.hypothesis_labels.push_back(h.label);

    for (std::size_t r = 0; r < p.seeds.size(); ++r) {
        const std::uint64_t seed = p.seeds[r];
        const ShiftSample s = draw_shift(p.scenario, p.train_rows + p.validation_rows, p.test_rows, seed);
        std::vector<std::size_t> fit_idx(p.train_rows);
        std::vector<std::size_t> val_idx(p.validation_rows);
        for (std::size_t i = 0; i < p.train_rows; ++i) fit_idx[i] = i;
        for (std::size_t i = 0; i < p.validation_rows; ++i) val_idx[i] = p.train_rows + i;
        const LabeledRows fit = s.train.subset(fit_idx);
        const LabeledRows val = s.train.subset(val_idx);
        const PredictorHandle h = ridge_factory(p.ridge_lambda)(fit);
        const auto val_losses = detail::losses_of(val, h, p.loss);
        const std::uint64_t ties = derive_seed(seed, streams::ties);

        ShiftDemoRow row;
        row.replicate = r;
        row.seed = seed;
        row.tilde_e = estimate_test_error(val.x, val_losses, s.test_x, ties, p.threads).value;
        row.validation_mean_loss = accurate_sum(val_losses) / static_cast<double>(val_losses.size());
        const LabeledRows oracle = draw_labeled(p.scenario.test_x, p.scenario, p.oracle_rows, derive_seed(seed, 3));
        row.true_risk = empirical_risk(oracle, h, p.loss).value;
        row.hidden_label_risk = empirical_risk(LabeledRows{s.test_x, s.test_y_hidden}, h, p.loss).value;

        row.selection = select_hypothesis(hyps, s.train, s.test_x, p.loss, ties, p.threads);
        row.empirical_choice = select_by_empirical_risk(hyps, s.train, p.loss);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < hyps.size(); ++i) {
            row.oracle_risks.push_back(empirical_risk(oracle, hyps[i], p.loss).value);
            if (row.oracle_risks.back() < best) {
                best = row.oracle_risks.back();
                row.oracle_choice = i;
            }
        }
        res.rows.push_back(std::move(row));
    }
    return res;
}

inline void write_shift_rows(std::ostream& os, const ShiftDemoResult& r, bool human) {
    auto num = [human](double v) { return human ? sig6(v) : full(v); };
    os << "replicate,hypothesis,risk,method\n";
    for (const auto& row : r.rows) {
        os << row.replicate << ",ridge," << num(row.tilde_e) << ",one_nn_test_error\n";
        os << row.replicate << ",ridge," << num(row.validation_mean_loss) << ",validation_mean\n";
        os << row.replicate << ",ridge," << num(row.true_risk) << ",oracle_test_risk\n";
        os << row.replicate << ",ridge," << num(row.hidden_label_risk) << ",hidden_label_risk\n";
        for (std::size_t i = 0; i < r.hypothesis_labels.size(); ++i) {
            os << row.replicate << ',' << r.hypothesis_labels[i] << ',' << num(row.selection.risks[i].value)
               << ",one_nn_risk" << (i == row.selection.best ? "_selected" : "") << '\n';
            os << row.replicate << ',' << r.hypothesis_labels[i] << ',' << num(row.oracle_risks[i])
               << ",oracle_test_risk" << (i == row.oracle_choice ? "_best" : "") << '\n';
        }
    }
}

// --- diagnostics ------------------------------------------------------------------

struct DiagnosticsParams {
    Example example = builtin_example("beta");
    std::vector<double> q0_grid{1.5, 2.0, 3.0};
    std::uint64_t seed = 1;
    bool run_assumptions = true;
    bool run_variance = true;
    bool run_limit = true;
    bool run_discrepancy = true;
    // variance bound
    double q0 = 2.0;
    std::size_t variance_n = 1000;
    std::size_t variance_m = 100000;
    std::size_t variance_replicates = 30;
    std::size_t probes = 100000;
    // limit check
    std::vector<std::size_t> limit_n_grid{100, 1000, 10000};
    std::size_t limit_m = 200000;
    std::size_t bins = 20;
    std::size_t limit_replicates = 10;
    // discrepancy trend
    std::vector<std::size_t> discrepancy_n_grid{100, 10000};
    std::size_t discrepancy_replicates = 10;
    unsigned threads = 1;
};

/// Discrepancy moment E|eta(X_(1)) - eta(X_(2))|^(2q) averaged over replicates, per n.
[[nodiscard]] inline std::vector<double> discrepancy_trend(const Example& ex, std::span<const std::size_t> n_grid,
                                                           double q, std::span<const std::uint64_t> seeds,
                                                           std::size_t probes, unsigned threads = 1) {
    std::vector<double> out;
    for (std::size_t n : n_grid) {
        std::vector<double> vals;
        for (std::uint64_t s : seeds) {
            const std::uint64_t c = cell_seed(s, n);
            const NNIndex index(sample_points(ex.pair.mu1, n, derive_seed(c, streams::data), threads),
                                derive_seed(c, streams::ties));
            vals.push_back(nn_discrepancy_moment(index, ex.eta,
                                                 sample_points(ex.pair.mu1, probes, derive_seed(c, 4), threads), q));
        }
        out.push_back(mean(vals));
    }
    return out;
}

[[nodiscard]] inline DiagnosticsReport run_diagnostics(const DiagnosticsParams& p) {
    DiagnosticsReport rep;
    const Example& ex = p.example;
    if (p.run_assumptions) {
        const auto a = assumption_check(ex.pair, ex.eta, p.q0_grid, p.seed);
        rep.append(a.to_report());
        rep.notes.push_back(ex.name + ": largest feasible q0 in grid: " +
                            (a.max_feasible_q0 ? sig6(*a.max_feasible_q0) : std::string("none")));
    }
    if (p.run_variance) {
        const HolderPair h = HolderPair::from_q0(p.q0);
        const auto vb = variance_bound_estimate(ex.pair, ex.eta, h, p.variance_n, p.variance_m,
                                                replicate_seeds(p.seed, p.variance_replicates), p.probes, p.threads);
        const std::string params = "q0=" + sig6(p.q0) + " n=" + std::to_string(p.variance_n) +
                                   " m=" + std::to_string(p.variance_m) +
                                   " seeds=" + std::to_string(p.variance_replicates);
        rep.add("variance_bound", params, vb.empirical_variance, vb.bound_value, vb.satisfied,
                "seed_sample_variance_vs_assembled_bound");
        if (vb.infinite_ratio_moment) rep.notes.push_back("variance bound is vacuous: ratio moment is infinite");
    }
    if (p.run_limit && ex.pair.mu1.dim() == 1) {
        const auto seeds = replicate_seeds(derive_seed(p.seed, 7), p.limit_replicates);
        auto lc = voronoi_limit_check(ex.pair, p.limit_n_grid, p.limit_m, p.bins, seeds, p.threads);
        for (const auto& lvl : lc.levels)
            if (lvl.zero_ratio_records > 0)
                lc.report.notes.push_back("n=" + std::to_string(lvl.n) + ": " +
                                          std::to_string(lvl.zero_ratio_records) +
                                          " data points where f0/f1 = 0 have mean n*weight " +
                                          sig6(lvl.zero_ratio_mean_n_weight));
        rep.append(lc.report);
    }
    if (p.run_discrepancy && p.discrepancy_n_grid.size() >= 2) {
        const auto seeds = replicate_seeds(derive_seed(p.seed, 8), p.discrepancy_replicates);
        const auto t = discrepancy_trend(ex, p.discrepancy_n_grid, 1.0, seeds, std::min<std::size_t>(p.probes, 20000),
                                         p.threads);
        bool dec = true;
        for (std::size_t i = 1; i < t.size(); ++i) dec = dec && t[i] < t[i - 1];
        for (std::size_t i = 0; i < t.size(); ++i)
            rep.add("nn_discrepancy_moment", "q=1 n=" + std::to_string(p.discrepancy_n_grid[i]), t[i],
                    std::numeric_limits<double>::quiet_NaN(), true, "monte_carlo_probe");
        rep.add("nn_discrepancy_trend", "decreasing along n grid", dec ? 1.0 : 0.0, 1.0, dec, "monotone_trend");
    }
    return rep;
}

}  // namespace nnw
