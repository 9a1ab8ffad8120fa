#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnw/core.hpp"
#include "nnw/distributions.hpp"
#include "nnw/nn_index.hpp"

namespace nnw {

/// Integrand evaluated at data points.
struct EtaFunction {
    std::string name;
    std::function<double(std::span<const double>)> eval;
    /// Moment exponent q1 the caller expects to be finite, if known.
    std::optional<double> q1_hint;

    double operator()(std::span<const double> x) const { return eval(x); }
    double operator()(double x) const { return eval(std::span<const double>(&x, 1)); }
};

class NonFiniteEta : public std::domain_error {
public:
    NonFiniteEta(std::size_t index, double value)
        : std::domain_error("eta is not finite (" + std::to_string(value) + ") at data point " +
                            std::to_string(index)),
          index_(index) {}

    [[nodiscard]] std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Monte Carlo estimate of the mu0-measure of each data point's Voronoi cell.
struct VoronoiWeights {
    std::vector<std::uint64_t> counts;  ///< mu0-samples whose nearest datum is j
    std::vector<double> weights;        ///< counts / m
    std::uint64_t m = 0;

    [[nodiscard]] std::size_t size() const noexcept { return counts.size(); }

    /// sum_j weights[j], evaluated the same way q1_estimate evaluates sums; exactly 1.
    [[nodiscard]] double total() const {
        std::vector<double> c(counts.begin(), counts.end());
        std::vector<double> ones(c.size(), 1.0);
        return accurate_weighted_mean(c, ones, static_cast<double>(m));
    }
};

[[nodiscard]] inline VoronoiWeights weights_from_assignment(std::span<const std::size_t> nearest, std::size_t n) {
    if (nearest.empty()) throw std::invalid_argument("voronoi_weights: need at least one sample");
    VoronoiWeights w;
    w.m = nearest.size();
    w.counts.assign(n, 0);
    for (std::size_t j : nearest) ++w.counts.at(j);
    w.weights.resize(n);
    const double m = static_cast<double>(w.m);
    for (std::size_t j = 0; j < n; ++j) w.weights[j] = static_cast<double>(w.counts[j]) / m;
    return w;
}

[[nodiscard]] inline VoronoiWeights voronoi_weights(const NNIndex& index, const PointSet& mu0_samples,
                                                    unsigned threads = 1) {
    if (mu0_samples.empty()) throw std::invalid_argument("voronoi_weights: need at least one mu0 sample");
    if (mu0_samples.dim() != index.dim())
        throw std::invalid_argument("voronoi_weights: sample dimension " + std::to_string(mu0_samples.dim()) +
                                    " != data dimension " + std::to_string(index.dim()));
    const auto nearest = assign_nearest(index, mu0_samples, threads);
    return weights_from_assignment(nearest, index.size());
}

struct Q1Estimate {
    double value = 0.0;
    std::size_t n = 0;
    std::uint64_t m = 0;
    std::uint64_t seed = 0;
};

/// Evaluates eta at every datum; throws NonFiniteEta with the offending index.
[[nodiscard]] inline std::vector<double> eta_at_data(const PointSet& data, const EtaFunction& eta) {
    std::vector<double> out(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
        out[j] = eta(data[j]);
        if (!std::isfinite(out[j])) throw NonFiniteEta(j, out[j]);
    }
    return out;
}

/// Q1(eta) = sum_j weights[j] * eta(X_j).
[[nodiscard]] inline Q1Estimate q1_estimate(const VoronoiWeights& weights, const PointSet& data,
                                            const EtaFunction& eta, std::uint64_t seed = 0) {
    if (weights.size() != data.size())
        throw std::invalid_argument("q1_estimate: weights cover " + std::to_string(weights.size()) +
                                    " points but data has " + std::to_string(data.size()));
    const auto values = eta_at_data(data, eta);
    const std::vector<double> counts(weights.counts.begin(), weights.counts.end());
    return {accurate_weighted_mean(counts, values, static_cast<double>(weights.m)), data.size(), weights.m, seed};
}

/// One draw of the data, the mu0 Monte Carlo cloud, and the resulting estimate.
struct Q1Run {
    Q1Estimate estimate;
    double mu0_direct = 0.0;  ///< plain Monte Carlo mean of eta over the mu0 draws
    PointSet data;
    VoronoiWeights weights;
};

namespace streams {
inline constexpr std::uint64_t data = 1;
inline constexpr std::uint64_t mu0_samples = 2;
inline constexpr std::uint64_t ties = 3;
}  // namespace streams

[[nodiscard]] inline Q1Run run_q1(const DistributionPair& pair, const EtaFunction& eta, std::size_t n, std::size_t m,
                                  std::uint64_t seed, unsigned threads = 1) {
    if (n == 0) throw std::invalid_argument("run_q1: n must be >= 1");
    if (m == 0) throw std::invalid_argument("run_q1: m must be >= 1");
    Q1Run run;
    run.data = sample_points(pair.mu1, n, derive_seed(seed, streams::data), threads);
    const PointSet mc = sample_points(pair.mu0, m, derive_seed(seed, streams::mu0_samples), threads);
    const NNIndex index(run.data, derive_seed(seed, streams::ties));
    run.weights = voronoi_weights(index, mc, threads);
    run.estimate = q1_estimate(run.weights, run.data, eta, seed);
    std::vector<double> direct(mc.size());
    for (std::size_t i = 0; i < mc.size(); ++i) direct[i] = eta(mc[i]);
    run.mu0_direct = mean(direct);
    return run;
}

/// Per-datum record for figure export and the density-ratio limit checks.
struct CellRecord {
    double x;
    double weight;
    double n_weight;
    double density_ratio;
    RatioKind ratio_kind;
};

/// Records (X_j, n * weights[j], f0/f1 at X_j), sorted by X_j. 1-D only.
[[nodiscard]] inline std::vector<CellRecord> cell_measure_profile(const VoronoiWeights& weights, const PointSet& data,
                                                                  const DistributionPair& pair) {
    if (data.dim() != 1) throw std::invalid_argument("cell_measure_profile: data must be 1-D");
    if (weights.size() != data.size()) throw std::invalid_argument("cell_measure_profile: size mismatch");
    const double n = static_cast<double>(data.size());
    std::vector<CellRecord> out;
    out.reserve(data.size());
    for (std::size_t j = 0; j < data.size(); ++j) {
        const double x = data[j][0];
        const RatioValue r = density_ratio_at(pair, x);
        out.push_back({x, weights.weights[j], n * weights.weights[j], r.value, r.kind});
    }
    std::sort(out.begin(), out.end(), [](const CellRecord& a, const CellRecord& b) { return a.x < b.x; });
    return out;
}

/// Bin edges holding equal mu1 probability, from empirical quantiles of a fixed
/// reference draw; the outer edges are -inf and +inf.
[[nodiscard]] inline std::vector<double> equal_probability_edges(const DistributionSpec& mu1, std::size_t bins,
                                                                 std::uint64_t seed = 0x5eedb175ULL,
                                                                 std::size_t draws = 200000) {
    if (mu1.dim() != 1) throw std::invalid_argument("equal_probability_edges: 1-D only");
    if (bins < 1) throw std::invalid_argument("equal_probability_edges: bins must be >= 1");
    const PointSet ref = sample_points(mu1, draws, seed);
    std::vector<double> v = ref.raw();
    std::sort(v.begin(), v.end());
    std::vector<double> edges(bins + 1);
    edges.front() = -std::numeric_limits<double>::infinity();
    edges.back() = std::numeric_limits<double>::infinity();
    for (std::size_t b = 1; b < bins; ++b) edges[b] = v[(b * draws) / bins];
    return edges;
}

struct ProfileBin {
    double lo;
    double hi;
    bool interior;
    std::size_t count = 0;
    double mean_n_weight = 0.0;
    double mean_n2_weight2 = 0.0;
    double mean_ratio = 0.0;
    double mean_ratio_sq = 0.0;
};

/// Pools records into bins; ratio means are averaged over the same records, so a
/// bin's mean n*weight and mean ratio share a target regardless of bin width.
/// Records with an infinite ratio are left out.
[[nodiscard]] inline std::vector<ProfileBin> bin_profile(std::span<const CellRecord> records,
                                                         std::span<const double> edges) {
    if (edges.size() < 2) throw std::invalid_argument("bin_profile: need at least one bin");
    const std::size_t bins = edges.size() - 1;
    std::vector<ProfileBin> out;
    out.reserve(bins);
    for (std::size_t b = 0; b < bins; ++b) out.push_back({edges[b], edges[b + 1], b != 0 && b + 1 != bins});
    for (const CellRecord& r : records) {
        if (r.ratio_kind == RatioKind::infinite) continue;
        auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, r.x);
        ProfileBin& bin = out[static_cast<std::size_t>(it - (edges.begin() + 1))];
        ++bin.count;
        bin.mean_n_weight += r.n_weight;
        bin.mean_n2_weight2 += r.n_weight * r.n_weight;
        bin.mean_ratio += r.density_ratio;
        bin.mean_ratio_sq += r.density_ratio * r.density_ratio;
    }
    for (ProfileBin& bin : out) {
        if (bin.count == 0) continue;
        const double c = static_cast<double>(bin.count);
        bin.mean_n_weight /= c;
        bin.mean_n2_weight2 /= c;
        bin.mean_ratio /= c;
        bin.mean_ratio_sq /= c;
    }
    return out;
}

}  // namespace nnw
