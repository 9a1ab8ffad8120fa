#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "nnw/config.hpp"
#include "nnw/experiments.hpp"

namespace nnw {

[[nodiscard]] inline std::vector<std::string> experiment_kinds() {
    return {"table1", "figure_data", "mar_demo", "shift_demo", "diagnostics"};
}

/// Tolerances used by --check.
struct CheckSpec {
    // table1
    std::size_t check_n = 10000;
    std::map<std::string, double> limit_tolerance;
    // mar_demo
    double target_error = 0.02;
    std::size_t min_cc_worse = 8;
    // shift_demo
    double relative_error = 0.10;
    std::size_t min_correct = 9;
};

struct ExperimentConfig {
    std::string kind;
    std::uint64_t master_seed = 1;
    unsigned threads = 1;
    std::optional<std::string> output;
    std::string resolved;  ///< every key read, defaults included
    std::variant<Table1Params, FigureParams, MarDemoParams, ShiftDemoParams, DiagnosticsParams> params;
    CheckSpec check;
};

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> output;
};

namespace detail {

/// Built-in example, or a custom one from an [example.NAME] section.
inline std::optional<Example> read_example(ConfigReader& r, const std::string& name) {
    const std::string sec = "example." + name;
    if (!r.has_section(sec)) {
        try {
            return builtin_example(name);
        } catch (const std::exception& e) {
            r.fail(e.what());
            return std::nullopt;
        }
    }
    const std::string mu0 = r.text(sec, "mu0");
    const std::string mu1 = r.text(sec, "mu1");
    const std::string eta = r.choice(sec, "eta", eta_names());
    const double limit = r.real(sec, "limit");
    if (!r.ok()) return std::nullopt;
    try {
        auto pair = DistributionPair::make(parse_distribution(mu0), parse_distribution(mu1));
        auto f = make_eta(eta, pair);
        return Example{name, std::move(pair), std::move(f), limit, {}};
    } catch (const std::exception& e) {
        r.fail(sec + ": " + e.what());
        return std::nullopt;
    }
}

inline std::vector<std::size_t> sizes(ConfigReader& r, const std::string& sec, const std::string& key,
                                      std::vector<std::uint64_t> fallback, std::size_t min_value = 1) {
    std::vector<std::size_t> out;
    for (auto v : r.integer_list(sec, key, std::move(fallback))) {
        if (v < min_value) r.fail(sec, key, "values must be >= " + std::to_string(min_value));
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) r.fail(sec, key, "empty list");
    return out;
}

inline std::size_t positive(ConfigReader& r, const std::string& sec, const std::string& key, std::uint64_t fallback,
                            std::uint64_t min_value = 1) {
    const auto v = r.integer(sec, key, fallback);
    if (v < min_value) r.fail(sec, key, "must be >= " + std::to_string(min_value));
    return static_cast<std::size_t>(v);
}

inline QuerySpec read_query(ConfigReader& r) {
    QuerySpec q;
    q.transform = r.choice("query", "transform", query_transforms(), std::string("y"));
    const std::string filter = r.text("query", "filter", std::string());
    if (filter.empty()) return q;
    std::istringstream is(filter);
    std::string col;
    std::string op;
    std::string val;
    std::string extra;
    is >> col >> op >> val;
    if (col.empty() || op.empty() || val.empty() || (is >> extra)) {
        r.fail("query", "filter", "expected '<column> <op> <value>'");
        return q;
    }
    const auto ops = query_ops();
    if (std::find(ops.begin(), ops.end(), op) == ops.end()) r.fail("query", "filter", "unknown operator '" + op + "'");
    const auto v = ConfigReader::parse_real(val);
    if (!v) r.fail("query", "filter", "'" + val + "' is not a number");
    q.filter_column = col;
    q.filter_op = op;
    q.filter_value = v.value_or(0.0);
    return q;
}

}  // namespace detail

/// Reads and validates a config for `kind`. Every problem is collected and
/// reported in one ConfigError; nothing is run on failure.
[[nodiscard]] inline ExperimentConfig load_experiment(Config cfg, const std::string& kind, const Overrides& ov = {}) {
    if (ov.seed) cfg.set("", "seed", std::to_string(*ov.seed));
    if (ov.threads) cfg.set("", "threads", std::to_string(*ov.threads));
    if (ov.output) cfg.set("", "output", *ov.output);

    ConfigReader r(cfg);
    ExperimentConfig ec;
    ec.kind = r.choice("", "experiment", experiment_kinds(), kind);
    if (ec.kind != kind) r.fail("", "experiment", "config is for '" + ec.kind + "' but the command runs '" + kind + "'");
    ec.master_seed = r.integer("", "seed", 1);
    ec.threads = static_cast<unsigned>(r.integer("", "threads", 1));
    if (const std::string out = r.text("", "output", std::string()); !out.empty()) ec.output = out;

    if (kind == "table1") {
        Table1Params p;
        for (const auto& name : r.list("", "examples", std::vector<std::string>{"beta", "gaussian", "fat_cantor"}))
            if (auto ex = detail::read_example(r, name)) p.examples.push_back(std::move(*ex));
        p.n_grid = detail::sizes(r, "", "n_grid", {100, 1000, 10000, 100000});
        p.m = detail::positive(r, "", "m", 1000000);
        p.seeds = replicate_seeds(ec.master_seed, detail::positive(r, "", "replicates", 10));
        p.threads = ec.threads;
        ec.check.check_n = detail::positive(r, "tolerances", "check_n", 10000);
        for (const auto& ex : p.examples) {
            const double tol = r.real("tolerances", ex.name, ex.name == "beta"       ? 0.03
                                                             : ex.name == "gaussian" ? 0.08
                                                             : ex.name == "fat_cantor" ? 0.06
                                                                                       : 0.05);
            if (!(tol > 0.0)) r.fail("tolerances", ex.name, "must be > 0");
            ec.check.limit_tolerance[ex.name] = tol;
        }
        ec.params = std::move(p);
    } else if (kind == "figure_data") {
        FigureParams p;
        const std::string name = r.text("", "example", std::string("beta"));
        auto ex = detail::read_example(r, name);
        p.n = detail::positive(r, "", "n", 1000);
        p.m = detail::positive(r, "", "m", 1000000);
        p.seed = ec.master_seed;
        p.threads = ec.threads;
        const bool cantor = ex && ex->pair.mu0.as<FatCantorUniform>() != nullptr;
        std::optional<std::vector<double>> fb;
        if (cantor) fb = std::vector<double>{0.0, 0.375};
        if (r.has("", "subinterval") || fb) {
            const auto iv = r.real_list("", "subinterval", fb);
            if (iv.size() != 2 || !(iv[0] < iv[1]))
                r.fail("", "subinterval", "expected 'lo, hi' with lo < hi");
            else
                p.subinterval = std::pair{iv[0], iv[1]};
        }
        if (ex) {
            if (ex->pair.mu1.dim() != 1) r.fail("", "example", "figure data needs a 1-D example");
            p.example = std::move(*ex);
        }
        ec.params = std::move(p);
    } else if (kind == "mar_demo") {
        MarDemoParams p;
        const std::string source = r.choice("", "source", {"synthetic", "file"}, std::string("synthetic"));
        p.synthetic = source == "synthetic";
        p.threads = ec.threads;
        p.query = detail::read_query(r);
        if (p.synthetic) {
            p.rows = detail::positive(r, "", "rows", 20000, 2);
            p.seeds = replicate_seeds(ec.master_seed, detail::positive(r, "", "replicates", 10));
            const bool mcar = r.boolean("model", "mcar", false);
            const double noise = r.real("model", "noise_sd", 0.1);
            if (!(noise >= 0.0)) r.fail("model", "noise_sd", "must be >= 0");
            if (mcar) {
                const double pr = r.real("model", "observed_probability", 0.5);
                if (!(pr > 0.0 && pr < 1.0)) r.fail("model", "observed_probability", "must be in (0, 1)");
                p.model = MarModel::mcar(pr);
            } else {
                const double a = r.real("model", "propensity_intercept", 0.2);
                const double b = r.real("model", "propensity_slope", 0.6);
                if (!(a > 0.0 && a < 1.0 && a + b > 0.0 && a + b < 1.0))
                    r.fail("model", "propensity_slope", "observation probability a + b*x must stay in (0, 1) on [0, 1]");
                p.model.propensity = [a, b](double x) { return a + b * x; };
            }
            p.model.noise_sd = noise;
            if (p.query.filter_column && *p.query.filter_column != "x" && *p.query.filter_column != "y")
                r.fail("query", "filter", "synthetic data has columns x and y only");
        } else {
            p.path = r.text("data", "path");
            p.schema.covariates = r.list("data", "covariates");
            p.schema.responses = r.list("data", "response");
            if (const std::string id = r.text("data", "id", std::string()); !id.empty()) p.schema.id = id;
            p.preprocess_table = r.boolean("data", "preprocess", true);
            p.tie_seed = derive_seed(ec.master_seed, streams::ties);
        }
        ec.check.target_error = r.real("tolerances", "target_error", 0.02);
        ec.check.min_cc_worse = static_cast<std::size_t>(r.integer("tolerances", "min_cc_worse", 8));
        ec.params = std::move(p);
    } else if (kind == "shift_demo") {
        ShiftDemoParams p;
        p.scenario_name = r.choice("", "scenario", {"gaussian_linear", "step", "no_shift"}, std::string("gaussian_linear"));
        p.scenario = p.scenario_name == "step"       ? ShiftScenario::step()
                     : p.scenario_name == "no_shift" ? ShiftScenario::no_shift()
                                                     : ShiftScenario::gaussian_linear();
        p.train_rows = detail::positive(r, "", "train_rows", 2000, 2);
        p.validation_rows = detail::positive(r, "", "validation_rows", 1000);
        p.test_rows = detail::positive(r, "", "test_rows", 2000);
        p.oracle_rows = detail::positive(r, "", "oracle_rows", 100000);
        p.ridge_lambda = r.real("", "ridge_lambda", 0.0);
        if (!(p.ridge_lambda >= 0.0)) r.fail("", "ridge_lambda", "must be >= 0");
        const std::string loss = r.choice("", "loss", {"squared_error", "misclassification"}, std::string("squared_error"));
        p.loss = loss == "misclassification" ? LossSpec::misclassification() : LossSpec::squared_error();
        p.constants = r.real_list("", "constants", std::vector<double>{0.0, 1.0});
        if (p.constants.empty()) r.fail("", "constants", "need at least one hypothesis");
        p.seeds = replicate_seeds(ec.master_seed, detail::positive(r, "", "replicates", 10));
        p.threads = ec.threads;
        ec.check.relative_error = r.real("tolerances", "relative_error", 0.10);
        ec.check.min_correct = static_cast<std::size_t>(r.integer("tolerances", "min_correct", 9));
        ec.params = std::move(p);
    } else if (kind == "diagnostics") {
        DiagnosticsParams p;
        const std::string name = r.text("", "example", std::string("beta"));
        auto ex = detail::read_example(r, name);
        p.seed = ec.master_seed;
        p.threads = ec.threads;
        p.q0_grid = r.real_list("", "q0_grid", std::vector<double>{1.5, 2.0, 3.0});
        for (double q : p.q0_grid)
            if (!(q >= 1.0)) r.fail("", "q0_grid", "values must be >= 1");
        const auto checks = r.list("", "checks", std::vector<std::string>{"assumptions", "variance", "limit", "discrepancy"});
        p.run_assumptions = p.run_variance = p.run_limit = p.run_discrepancy = false;
        for (const auto& c : checks) {
            if (c == "assumptions") p.run_assumptions = true;
            else if (c == "variance") p.run_variance = true;
            else if (c == "limit") p.run_limit = true;
            else if (c == "discrepancy") p.run_discrepancy = true;
            else r.fail("", "checks", "unknown check '" + c + "' (known: assumptions, variance, limit, discrepancy)");
        }
        p.q0 = r.real("variance", "q0", 2.0);
        if (!(p.q0 > 1.0)) r.fail("variance", "q0", "must be > 1");
        p.variance_n = detail::positive(r, "variance", "n", 1000, 2);
        p.variance_m = detail::positive(r, "variance", "m", 100000);
        p.variance_replicates = detail::positive(r, "variance", "replicates", 30, 2);
        p.probes = detail::positive(r, "variance", "probes", 100000);
        p.limit_n_grid = detail::sizes(r, "limit", "n_grid", {100, 1000, 10000});
        p.limit_m = detail::positive(r, "limit", "m", 200000);
        p.bins = detail::positive(r, "limit", "bins", 20, 3);
        p.limit_replicates = detail::positive(r, "limit", "replicates", 10);
        p.discrepancy_n_grid = detail::sizes(r, "discrepancy", "n_grid", {100, 10000}, 2);
        p.discrepancy_replicates = detail::positive(r, "discrepancy", "replicates", 10);
        if (ex) p.example = std::move(*ex);
        ec.params = std::move(p);
    }
    r.finish();
    ec.resolved = r.resolved_text();
    return ec;
}

}  // namespace nnw
