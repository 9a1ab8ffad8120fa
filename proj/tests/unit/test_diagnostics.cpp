#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nnw/diagnostics.hpp"
#include "nnw/registry.hpp"

using nnw::DistributionPair;
using nnw::DistributionSpec;
using nnw::HolderPair;
using nnw::PointSet;

namespace {

nnw::EtaFunction constant(double c) {
    return {"const", [c](std::span<const double>) { return c; }, std::nullopt};
}
nnw::EtaFunction identity() {
    return {"identity", [](std::span<const double> x) { return x[0]; }, std::nullopt};
}
DistributionPair uniform_pair() {
    const auto u = DistributionSpec::uniform(0.0, 1.0);
    return DistributionPair::make(u, u);
}
std::vector<std::uint64_t> seeds(std::size_t count, std::uint64_t base) {
    std::vector<std::uint64_t> s(count);
    for (std::size_t i = 0; i < count; ++i) s[i] = nnw::derive_seed(base, i);
    return s;
}

}  // namespace

TEST(HolderPair, Conjugates) {
    const auto h = HolderPair::from_q0(2.0);
    EXPECT_EQ(h.q1(), 2.0);
    EXPECT_DOUBLE_EQ(HolderPair::from_q0(1.5).q1(), 3.0);
    EXPECT_TRUE(std::isinf(HolderPair::from_q0(1.0).q1()));
    for (double q0 : {1.01, 1.3, 1.909, 4.0, 100.0}) {
        const auto p = HolderPair::from_q0(q0);
        EXPECT_NEAR(1.0 / p.q0() + 1.0 / p.q1(), 1.0, 1e-12);
    }
    EXPECT_NO_THROW(HolderPair(4.0, 4.0 / 3.0));
    EXPECT_THROW(HolderPair(2.0, 3.0), std::invalid_argument);
    EXPECT_THROW(HolderPair(0.5, 2.0), std::invalid_argument);
    EXPECT_THROW(HolderPair::from_q0(0.9), std::invalid_argument);
    EXPECT_THROW(HolderPair::from_q0(INFINITY), std::invalid_argument);
}

TEST(DiagnosticsReport, CsvAndVerdicts) {
    nnw::DiagnosticsReport rep;
    rep.add("a", "n=1", 0.5, 1.0, true, "m");
    rep.add_verdict("b", "q0=2", INFINITY, false, "quadrature");
    EXPECT_TRUE(rep.all_passed());
    const auto csv = rep.to_csv();
    EXPECT_EQ(csv.rfind("check,params,value,threshold,pass\n", 0), 0u);
    EXPECT_NE(csv.find("a,\"n=1\",0.5,1,true\n"), std::string::npos);
    const auto table = rep.to_table();
    EXPECT_NE(table.find("infinite"), std::string::npos);
    rep.add("c", "", 2.0, 1.0, false, "m");
    EXPECT_FALSE(rep.all_passed());
    EXPECT_NE(rep.to_table().find("NO"), std::string::npos);
}

TEST(Discrepancy, ConstantEtaIsZero) {
    const nnw::NNIndex idx(nnw::sample_points(DistributionSpec::uniform(0, 1), 500, 1), 2);
    EXPECT_EQ(nnw::nn_discrepancy_moment(idx, constant(3.0), nnw::sample_points(DistributionSpec::uniform(0, 1), 1000, 3), 2.0),
              0.0);
}

TEST(Discrepancy, DuplicatedDataIsZero) {
    auto v = nnw::sample_points(DistributionSpec::uniform(0, 1), 300, 1).raw();
    const auto copy = v;
    v.insert(v.end(), copy.begin(), copy.end());
    const nnw::NNIndex idx(PointSet::from_values(v), 5);
    EXPECT_EQ(nnw::nn_discrepancy_moment(idx, identity(), nnw::sample_points(DistributionSpec::uniform(0, 1), 2000, 3), 1.5),
              0.0);
}

TEST(Discrepancy, HandValue) {
    // probe 0.1: neighbors 0 then 1 -> |0 - 1|^(2q); probe 0.9: same pair
    const nnw::NNIndex idx(PointSet::from_values({0.0, 1.0, 5.0}), 1);
    EXPECT_DOUBLE_EQ(nnw::nn_discrepancy_moment(idx, identity(), PointSet::from_values({0.1, 0.9}), 1.0), 1.0);
    const nnw::NNIndex idx2(PointSet::from_values({0.0, 2.0, 5.0}), 1);
    EXPECT_DOUBLE_EQ(nnw::nn_discrepancy_moment(idx2, identity(), PointSet::from_values({0.1, 4.0}), 2.0),
                     0.5 * (16.0 + 81.0));
}

TEST(Discrepancy, InputsValidated) {
    const nnw::NNIndex one(PointSet::from_values({0.0}), 1);
    EXPECT_THROW((void)nnw::nn_discrepancy_moment(one, identity(), PointSet::from_values({0.1}), 1.0),
                 std::invalid_argument);
    const nnw::NNIndex two(PointSet::from_values({0.0, 1.0}), 1);
    EXPECT_THROW((void)nnw::nn_discrepancy_moment(two, identity(), PointSet::from_values({0.1}), INFINITY),
                 std::invalid_argument);
    EXPECT_THROW((void)nnw::nn_discrepancy_moment(two, identity(), PointSet::from_values({0.1}), 0.5),
                 std::invalid_argument);
}

TEST(Discrepancy, ShrinksWithSampleSize) {
    const auto u = DistributionSpec::uniform(0, 1);
    auto avg = [&](std::size_t n) {
        double acc = 0.0;
        for (std::uint64_t s = 0; s < 10; ++s) {
            const nnw::NNIndex idx(nnw::sample_points(u, n, nnw::derive_seed(s, 1)), s);
            acc += nnw::nn_discrepancy_moment(idx, identity(), nnw::sample_points(u, 20000, nnw::derive_seed(s, 2)), 1.0);
        }
        return acc / 10.0;
    };
    EXPECT_LT(avg(10000), avg(100));
}

TEST(VarianceBound, IdenticalPairConstantEtaHasZeroVariance) {
    const auto vb = nnw::variance_bound_estimate(uniform_pair(), constant(2.0), HolderPair::from_q0(2.0), 100, 1000,
                                                 seeds(5, 1), 1000);
    EXPECT_EQ(vb.empirical_variance, 0.0);
    EXPECT_EQ(vb.discrepancy_moment, 0.0);
    EXPECT_TRUE(vb.satisfied);
    EXPECT_NEAR(vb.ratio_moment, 1.0, 1e-10);
}

TEST(VarianceBound, BetaExampleHolds) {
    const auto ex = nnw::builtin_example("beta");
    const auto vb = nnw::variance_bound_estimate(ex.pair, ex.eta, HolderPair::from_q0(2.0), 1000, 100000, seeds(30, 2),
                                                 100000, 4);
    EXPECT_NEAR(vb.ratio_moment, 1.8, 1e-7);
    EXPECT_FALSE(vb.infinite_ratio_moment);
    EXPECT_EQ(vb.q1_values.size(), 30u);
    EXPECT_GT(vb.empirical_variance, 0.0);
    EXPECT_TRUE(vb.satisfied) << vb.empirical_variance << " vs " << vb.bound_value;
}

TEST(VarianceBound, InfiniteRenyiGivesInfiniteBound) {
    const auto ex = nnw::builtin_example("gaussian");
    const auto vb = nnw::variance_bound_estimate(ex.pair, ex.eta, HolderPair::from_q0(2.0), 50, 1000, seeds(3, 3), 1000);
    EXPECT_TRUE(vb.infinite_ratio_moment);
    EXPECT_TRUE(std::isinf(vb.bound_value));
    EXPECT_TRUE(vb.satisfied);
}

TEST(VarianceBound, InvariantToSeedOrder) {
    const auto ex = nnw::builtin_example("beta");
    auto s = seeds(6, 4);
    const auto a = nnw::variance_bound_estimate(ex.pair, ex.eta, HolderPair::from_q0(2.0), 50, 2000, s, 2000);
    std::reverse(s.begin(), s.end());
    std::rotate(s.begin(), s.begin() + 2, s.end());
    const auto b = nnw::variance_bound_estimate(ex.pair, ex.eta, HolderPair::from_q0(2.0), 50, 2000, s, 2000);
    EXPECT_EQ(a.empirical_variance, b.empirical_variance);
    EXPECT_EQ(a.bound_value, b.bound_value);
    EXPECT_EQ(a.q1_values, b.q1_values);
}

TEST(VarianceBound, InputsValidated) {
    const auto ex = nnw::builtin_example("beta");
    EXPECT_THROW((void)nnw::variance_bound_estimate(ex.pair, ex.eta, HolderPair::from_q0(2.0), 10, 10, {1}),
                 std::invalid_argument);
    EXPECT_THROW((void)nnw::variance_bound_estimate(ex.pair, ex.eta, HolderPair::from_q0(1.0), 10, 10, {1, 2}),
                 std::invalid_argument);
}

TEST(VarianceBound, VarianceShrinksWithSampleSize) {
    const auto ex = nnw::builtin_example("beta");
    auto var = [&](std::size_t n) {
        std::vector<double> q;
        for (auto s : seeds(15, 5)) q.push_back(nnw::run_q1(ex.pair, ex.eta, n, 200000, s, 4).estimate.value);
        return nnw::sample_variance(q);
    };
    EXPECT_LT(var(10000), var(100));
}

TEST(MomentCheck, HeavyTailFlagged) {
    const nnw::EtaFunction inv{"inv", [](std::span<const double> x) { return 1.0 / x[0]; }, std::nullopt};
    const auto mc = nnw::moment_growth_check(DistributionSpec::uniform(0, 1), inv, 4.0, 1);
    EXPECT_TRUE(mc.likely_infinite);
    EXPECT_EQ(mc.sizes.size(), 6u);
    EXPECT_EQ(mc.sizes.front(), 10000u);
    EXPECT_EQ(mc.sizes.back(), 320000u);
}

TEST(MomentCheck, BoundedFunctionNotFlagged) {
    const auto mc = nnw::moment_growth_check(DistributionSpec::uniform(0, 1), identity(), 4.0, 1);
    EXPECT_FALSE(mc.likely_infinite);
    EXPECT_NEAR(mc.estimates.back(), 0.2, 0.005);
}

TEST(Assumptions, BetaFiniteAtOrderTwo) {
    const auto ex = nnw::builtin_example("beta");
    const std::vector<double> grid{2.0};
    const auto rep = nnw::assumption_check(ex.pair, ex.eta, grid, 1);
    ASSERT_EQ(rep.rows.size(), 1u);
    EXPECT_TRUE(rep.rows[0].renyi.finite());
    EXPECT_TRUE(rep.rows[0].moment_finite);
    EXPECT_TRUE(rep.rows[0].feasible);
    EXPECT_EQ(rep.max_feasible_q0, 2.0);
}

TEST(Assumptions, GaussianFeasibleBelowThreshold) {
    const auto ex = nnw::builtin_example("gaussian");
    const std::vector<double> grid{1.5, 1.8, 1.9, 2.0, 3.0};
    const auto rep = nnw::assumption_check(ex.pair, ex.eta, grid, 1);
    ASSERT_TRUE(rep.max_feasible_q0);
    EXPECT_LT(*rep.max_feasible_q0, 2.1 / 1.1);
    EXPECT_EQ(*rep.max_feasible_q0, 1.9);
    EXPECT_FALSE(rep.rows[3].renyi.finite());
    EXPECT_FALSE(rep.rows[3].feasible);
    const auto report = rep.to_report();
    EXPECT_TRUE(report.all_passed());
    EXPECT_FALSE(report.rows.empty());
}

TEST(Assumptions, IdenticalPairAllFinite) {
    const std::vector<double> grid{1.0, 1.5, 2.0, 4.0};
    const auto rep = nnw::assumption_check(uniform_pair(), identity(), grid, 1);
    for (const auto& r : rep.rows) EXPECT_TRUE(r.feasible) << r.q0;
    EXPECT_FALSE(rep.rows[0].moment);
    EXPECT_EQ(rep.max_feasible_q0, 4.0);
}

TEST(LimitCheck, IdenticalPairNearOne) {
    const std::vector<std::size_t> grid{1000};
    const auto lc = nnw::voronoi_limit_check(uniform_pair(), grid, 100000, 5, seeds(10, 6), 4);
    ASSERT_EQ(lc.levels.size(), 1u);
    EXPECT_LT(lc.levels[0].max_relative_deviation, 0.05);
}

TEST(LimitCheck, BetaDeviationShrinks) {
    const auto ex = nnw::builtin_example("beta");
    const std::vector<std::size_t> grid{100, 10000};
    const auto lc = nnw::voronoi_limit_check(ex.pair, grid, 200000, 10, seeds(10, 7), 4);
    EXPECT_LT(lc.levels[1].max_relative_deviation, lc.levels[0].max_relative_deviation);
    EXPECT_TRUE(lc.deviation_nonincreasing);
    EXPECT_EQ(lc.report.rows.back().check, "voronoi_limit_trend");
}

TEST(LimitCheck, CantorRemovedIntervalsKeepWeight) {
    const auto ex = nnw::builtin_example("fat_cantor");
    const std::vector<std::size_t> grid{100};
    const auto lc = nnw::voronoi_limit_check(ex.pair, grid, 100000, 10, seeds(5, 8));
    EXPECT_GT(lc.levels[0].zero_ratio_records, 0u);
    EXPECT_GT(lc.levels[0].zero_ratio_mean_n_weight, 0.0);
}

TEST(LimitCheck, InputsValidated) {
    const std::vector<std::size_t> empty;
    const std::vector<std::size_t> grid{10};
    EXPECT_THROW((void)nnw::voronoi_limit_check(uniform_pair(), empty, 100, 5, seeds(2, 1)), std::invalid_argument);
    EXPECT_THROW((void)nnw::voronoi_limit_check(uniform_pair(), grid, 100, 5, {}), std::invalid_argument);
}

TEST(PooledProfile, ReproducibleAndPerSizeIndependent) {
    const auto ex = nnw::builtin_example("beta");
    const auto s = seeds(3, 9);
    const auto a = nnw::pooled_profile(ex.pair, 200, 5000, s, 1);
    const auto b = nnw::pooled_profile(ex.pair, 200, 5000, s, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].weight, b[i].weight);
    EXPECT_EQ(a.size(), 600u);
}
