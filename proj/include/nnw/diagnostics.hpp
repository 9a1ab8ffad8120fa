#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnw/core.hpp"
#include "nnw/distributions.hpp"
#include "nnw/nn_index.hpp"
#include "nnw/nn_measure.hpp"

namespace nnw {

/// Holder conjugates, 1/q0 + 1/q1 = 1; q0 = 1 pairs with q1 = +inf.
class HolderPair {
public:
    static HolderPair from_q0(double q0) {
        if (!(q0 >= 1.0) || !std::isfinite(q0)) throw std::invalid_argument("HolderPair: q0 must be finite and >= 1");
        if (q0 == 1.0) return HolderPair(1.0, std::numeric_limits<double>::infinity());
        return HolderPair(q0, q0 / (q0 - 1.0));
    }

    HolderPair(double q0, double q1) : q0_(q0), q1_(q1) {
        if (!(q0 >= 1.0) || !(q1 >= 1.0)) throw std::invalid_argument("HolderPair: exponents must be >= 1");
        const double s = 1.0 / q0 + 1.0 / q1;
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("HolderPair: 1/q0 + 1/q1 = " + std::to_string(s) + ", not 1");
    }

    [[nodiscard]] double q0() const noexcept { return q0_; }
    [[nodiscard]] double q1() const noexcept { return q1_; }

private:
    double q0_;
    double q1_;
};

struct DiagnosticRow {
    std::string check;
    std::string params;
    double value;
    double threshold;
    bool pass;
    std::string method;
    bool verdict = false;  ///< informational finding, not judged against a tolerance
};

/// Named scalar results with the tolerance each was judged against.
struct DiagnosticsReport {
    std::vector<DiagnosticRow> rows;
    std::vector<std::string> notes;

    void add(std::string check, std::string params, double value, double threshold, bool pass, std::string method) {
        rows.push_back({std::move(check), std::move(params), value, threshold, pass, std::move(method), false});
    }

    void add_verdict(std::string check, std::string params, double value, bool holds, std::string method) {
        rows.push_back({std::move(check), std::move(params), value, std::numeric_limits<double>::infinity(), holds,
                        std::move(method), true});
    }

    void append(const DiagnosticsReport& other) {
        rows.insert(rows.end(), other.rows.begin(), other.rows.end());
        notes.insert(notes.end(), other.notes.begin(), other.notes.end());
    }

    [[nodiscard]] bool all_passed() const noexcept {
        return std::all_of(rows.begin(), rows.end(), [](const DiagnosticRow& r) { return r.verdict || r.pass; });
    }

    /// "check,params,value,threshold,pass" with full precision.
    [[nodiscard]] std::string to_csv() const {
        std::ostringstream os;
        os << "check,params,value,threshold,pass\n";
        os << std::setprecision(17);
        for (const auto& r : rows)
            os << r.check << ",\"" << r.params << "\"," << r.value << ',' << r.threshold << ','
               << (r.pass ? "true" : "false") << '\n';
        return os.str();
    }

    [[nodiscard]] std::string to_table() const {
        std::ostringstream os;
        os << std::left << std::setw(30) << "check" << std::setw(40) << "params" << std::setw(14) << "value"
           << std::setw(14) << "threshold" << std::setw(9) << "pass" << "method\n";
        os << std::setprecision(6);
        for (const auto& r : rows)
            os << std::left << std::setw(30) << r.check << std::setw(40) << r.params << std::setw(14) << r.value
               << std::setw(14) << r.threshold << std::setw(9)
               << (r.verdict ? (r.pass ? "finite" : "infinite") : (r.pass ? "yes" : "NO")) << r.method << '\n';
        for (const auto& n : notes) os << "note: " << n << '\n';
        return os.str();
    }
};

/// Monte Carlo estimate of E|eta(X_(1)(X)) - eta(X_(2)(X))|^(2q) for X drawn as probe_samples.
[[nodiscard]] inline double nn_discrepancy_moment(const NNIndex& index, const EtaFunction& eta,
                                                  const PointSet& probe_samples, double q) {
    if (index.size() < 2) throw std::invalid_argument("nn_discrepancy_moment: need at least two data points");
    if (!(q >= 1.0) || !std::isfinite(q)) throw std::invalid_argument("nn_discrepancy_moment: q must be finite, >= 1");
    if (probe_samples.empty()) throw std::invalid_argument("nn_discrepancy_moment: no probe samples");
    const auto values = eta_at_data(index.points(), eta);
    std::vector<double> terms(probe_samples.size());
    for (std::size_t i = 0; i < probe_samples.size(); ++i) {
        const auto nb = index.query_knn(probe_samples[i], 2);
        terms[i] = std::pow(std::abs(values[nb[0].index] - values[nb[1].index]), 2.0 * q);
    }
    return mean(terms);
}

struct VarianceBound {
    double empirical_variance = 0.0;
    double bound_value = 0.0;
    double ratio_moment = 0.0;       ///< int (f0/f1)^q0 dmu1
    double discrepancy_moment = 0.0; ///< seed-averaged E|eta(X_(1)) - eta(X_(2))|^(2 q1)
    std::vector<double> q1_values;   ///< per seed, in sorted seed order
    bool infinite_ratio_moment = false;
    bool satisfied = false;
};

/// Sample variance of Q1 across seeds against 2 (int (f0/f1)^q0 dmu1)^(1/q0) (E|eta(X_(1)) - eta(X_(2))|^(2 q1))^(1/q1).
/// Seeds are processed in sorted order so the result does not depend on their listing.
[[nodiscard]] inline VarianceBound variance_bound_estimate(const DistributionPair& pair, const EtaFunction& eta,
                                                           const HolderPair& holder, std::size_t n, std::size_t m,
                                                           std::vector<std::uint64_t> seeds, std::size_t probes = 100000,
                                                           unsigned threads = 1) {
    if (seeds.size() < 2) throw std::invalid_argument("variance_bound_estimate: need at least two seeds");
    if (!std::isfinite(holder.q1()))
        throw std::invalid_argument("variance_bound_estimate: q0 = 1 leaves the discrepancy term undefined");
    std::sort(seeds.begin(), seeds.end());
    VarianceBound out;

    const RenyiResult renyi = renyi_divergence(pair, holder.q0());
    out.infinite_ratio_moment = !renyi.finite();
    out.ratio_moment = renyi.finite() ? renyi.integral : std::numeric_limits<double>::infinity();

    std::vector<double> moments;
    for (std::uint64_t s : seeds) {
        const Q1Run run = run_q1(pair, eta, n, m, s, threads);
        out.q1_values.push_back(run.estimate.value);
        const NNIndex index(run.data, derive_seed(s, streams::ties));
        const PointSet probe = sample_points(pair.mu1, probes, derive_seed(s, 4), threads);
        moments.push_back(nn_discrepancy_moment(index, eta, probe, holder.q1()));
    }
    out.empirical_variance = sample_variance(out.q1_values);
    out.discrepancy_moment = mean(moments);
    out.bound_value = out.infinite_ratio_moment
                          ? std::numeric_limits<double>::infinity()
                          : 2.0 * std::pow(out.ratio_moment, 1.0 / holder.q0()) *
                                std::pow(out.discrepancy_moment, 1.0 / holder.q1());
    out.satisfied = out.empirical_variance <= out.bound_value;
    return out;
}

struct MomentCheck {
    std::vector<std::size_t> sizes;
    std::vector<double> estimates;
    bool likely_infinite = false;
};

/// Estimates E|eta(X)|^power under `law` on nested samples of doubling size. The
/// moment is called likely infinite when the estimate grows more than 3x on two
/// consecutive doublings (a heuristic, not a proof).
[[nodiscard]] inline MomentCheck moment_growth_check(const DistributionSpec& law, const EtaFunction& eta, double power,
                                                     std::uint64_t seed, std::size_t base = 10000,
                                                     int doublings = 5) {
    MomentCheck mc;
    const std::size_t total = base << doublings;
    const PointSet x = sample_points(law, total, seed);
    double sum = 0.0;
    std::size_t next = base;
    int streak = 0;
    for (std::size_t i = 0; i < total; ++i) {
        sum += std::pow(std::abs(eta(x[i])), power);
        if (i + 1 == next) {
            const double est = sum / static_cast<double>(next);
            if (!mc.estimates.empty()) {
                streak = (est > 3.0 * mc.estimates.back()) ? streak + 1 : 0;
                if (streak >= 2) mc.likely_infinite = true;
            }
            if (!std::isfinite(est)) mc.likely_infinite = true;
            mc.sizes.push_back(next);
            mc.estimates.push_back(est);
            next *= 2;
        }
    }
    return mc;
}

struct AssumptionRow {
    double q0;
    double q1;
    RenyiResult renyi;
    std::optional<MomentCheck> moment;  ///< absent when q1 is infinite
    bool moment_finite;
    bool feasible;
};

struct AssumptionReport {
    std::vector<AssumptionRow> rows;
    std::optional<double> max_feasible_q0;

    [[nodiscard]] DiagnosticsReport to_report() const {
        DiagnosticsReport rep;
        for (const auto& r : rows) {
            std::ostringstream p;
            p << std::setprecision(6) << "q0=" << r.q0;
            rep.add_verdict("renyi_divergence", p.str(), r.renyi.value, r.renyi.finite(),
                            std::string("quadrature:") + std::string(to_string(r.renyi.status)));
            if (r.moment) {
                p << " q1=" << r.q1;
                rep.add_verdict("eta_moment_2q1", p.str(), r.moment->estimates.back(), r.moment_finite,
                                "monte_carlo_doubling");
            }
        }
        if (!max_feasible_q0) rep.notes.push_back("no q0 in the grid satisfies both assumptions");
        return rep;
    }
};

/// Per q0: is D_q0(mu0 || mu1) finite, and does eta appear to have a finite 2 q1 moment under mu1.
[[nodiscard]] inline AssumptionReport assumption_check(const DistributionPair& pair, const EtaFunction& eta,
                                                       std::span<const double> q0_grid, std::uint64_t seed = 0,
                                                       std::size_t base_samples = 10000) {
    AssumptionReport rep;
    for (double q0 : q0_grid) {
        const HolderPair h = HolderPair::from_q0(q0);
        AssumptionRow row{q0, h.q1(), renyi_divergence(pair, q0), std::nullopt, true, false};
        if (std::isfinite(h.q1())) {
            row.moment = moment_growth_check(pair.mu1, eta, 2.0 * h.q1(), derive_seed(seed, 31), base_samples);
            row.moment_finite = !row.moment->likely_infinite;
        }
        row.feasible = row.renyi.finite() && row.moment_finite;
        if (row.feasible) rep.max_feasible_q0 = std::max(rep.max_feasible_q0.value_or(q0), q0);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

struct LimitLevel {
    std::size_t n;
    std::vector<ProfileBin> bins;
    double max_relative_deviation = 0.0;  ///< interior bins: |mean n*w - mean ratio| / mean ratio
    double max_second_moment_ratio = 0.0; ///< interior bins: mean (n*w)^2 / mean ratio^2
    std::size_t zero_ratio_records = 0;   ///< data points where f0/f1 = 0
    double zero_ratio_mean_n_weight = 0.0;
};

struct LimitCheck {
    std::vector<LimitLevel> levels;
    bool deviation_nonincreasing = true;
    DiagnosticsReport report;
};

/// Per-seed draw of data and Voronoi weights; the draw for (seed, n) is
/// independent of every other n.
[[nodiscard]] inline std::vector<CellRecord> pooled_profile(const DistributionPair& pair, std::size_t n, std::size_t m,
                                                            std::span<const std::uint64_t> seeds,
                                                            unsigned threads = 1) {
    std::vector<CellRecord> pooled;
    for (std::uint64_t s : seeds) {
        const std::uint64_t cell = derive_seed(s, n);
        const PointSet data = sample_points(pair.mu1, n, derive_seed(cell, streams::data), threads);
        const PointSet mc = sample_points(pair.mu0, m, derive_seed(cell, streams::mu0_samples), threads);
        const NNIndex index(data, derive_seed(cell, streams::ties));
        const auto records = cell_measure_profile(voronoi_weights(index, mc, threads), data, pair);
        pooled.insert(pooled.end(), records.begin(), records.end());
    }
    return pooled;
}

/// Seed-averaged n * mu0(S_j) against f0/f1 in equal-mu1-probability bins, for each n.
[[nodiscard]] inline LimitCheck voronoi_limit_check(const DistributionPair& pair, std::span<const std::size_t> n_grid,
                                                    std::size_t m, std::size_t bins,
                                                    std::span<const std::uint64_t> seeds, unsigned threads = 1) {
    if (pair.mu1.dim() != 1) throw std::invalid_argument("voronoi_limit_check: 1-D pairs only");
    if (n_grid.empty() || seeds.empty()) throw std::invalid_argument("voronoi_limit_check: empty n grid or seeds");
    const auto edges = equal_probability_edges(pair.mu1, bins);
    LimitCheck out;
    for (std::size_t n : n_grid) {
        const auto pooled = pooled_profile(pair, n, m, seeds, threads);
        LimitLevel lvl{n, bin_profile(pooled, edges)};
        std::vector<double> zero_nw;
        for (const auto& r : pooled)
            if (r.ratio_kind == RatioKind::finite && r.density_ratio == 0.0) zero_nw.push_back(r.n_weight);
        lvl.zero_ratio_records = zero_nw.size();
        if (!zero_nw.empty()) lvl.zero_ratio_mean_n_weight = mean(zero_nw);
        for (const auto& b : lvl.bins) {
            if (!b.interior) continue;
            if (b.count == 0) {
                out.report.notes.push_back("n=" + std::to_string(n) + ": bin [" + std::to_string(b.lo) + ", " +
                                           std::to_string(b.hi) + "] has no data points; skipped");
                continue;
            }
            if (b.mean_ratio <= 0.0) continue;
            lvl.max_relative_deviation =
                std::max(lvl.max_relative_deviation, std::abs(b.mean_n_weight - b.mean_ratio) / b.mean_ratio);
            lvl.max_second_moment_ratio = std::max(lvl.max_second_moment_ratio, b.mean_n2_weight2 / b.mean_ratio_sq);
        }
        out.levels.push_back(std::move(lvl));
    }
    for (std::size_t i = 1; i < out.levels.size(); ++i)
        if (out.levels[i].max_relative_deviation > out.levels[i - 1].max_relative_deviation)
            out.deviation_nonincreasing = false;
    for (const auto& lvl : out.levels) {
        const std::string p = "n=" + std::to_string(lvl.n) + " seeds=" + std::to_string(seeds.size());
        out.report.add("voronoi_limit_deviation", p, lvl.max_relative_deviation,
                       std::numeric_limits<double>::quiet_NaN(), true, "binned_monte_carlo");
        out.report.add("voronoi_second_moment_ratio", p, lvl.max_second_moment_ratio, 2.5,
                       lvl.max_second_moment_ratio <= 2.5, "binned_monte_carlo");
    }
    out.report.add("voronoi_limit_trend", "n_grid", out.deviation_nonincreasing ? 1.0 : 0.0, 1.0,
                   out.deviation_nonincreasing, "monotone_trend");
    return out;
}

}  // namespace nnw
