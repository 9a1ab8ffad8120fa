#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "nnw/missing_data.hpp"

using nnw::MARTable;
using nnw::PointSet;
using nnw::Query;

namespace {

const double kMissing = std::numeric_limits<double>::quiet_NaN();

Query mean_y() {
    return {"mean(y)", {}, [](std::span<const double>, std::span<const double> y) { return y[0]; }};
}

Query constant(double c) {
    return {"const", {}, [c](std::span<const double>, std::span<const double>) { return c; }};
}

// non-missing (0, 10), (1, 20); missing at 0.1, 0.2, 0.9
MARTable three_point() {
    return MARTable::from_values(PointSet::from_values({0.0, 1.0, 0.1, 0.2, 0.9}),
                                 PointSet::from_values({10.0, 20.0, kMissing, kMissing, kMissing}));
}

nnw::TableSchema schema_xy() { return {{"x"}, {"y"}, std::nullopt}; }

nnw::MARTable read(const std::string& csv, const nnw::TableSchema& schema) {
    std::istringstream in(csv);
    return nnw::ingest_table(in, schema);
}

}  // namespace

TEST(Ingest, CountsMissingResponses) {
    const auto t = read("x,y\n1,2\n2,\n3,4\n4,5\n", schema_xy());
    EXPECT_EQ(t.rows(), 4u);
    EXPECT_EQ(t.n_nonmissing(), 3u);
    EXPECT_EQ(t.n_missing(), 1u);
    EXPECT_FALSE(t.observed[1]);
}

TEST(Ingest, AllResponsesPresentRefusesEstimation) {
    const auto t = read("x,y\n1,2\n2,3\n", schema_xy());
    EXPECT_EQ(t.n_missing(), 0u);
    try {
        (void)nnw::nn_weighted_functional(t, mean_y(), 1);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("no missing population"), std::string::npos);
    }
}

TEST(Ingest, VoyageShapedSchemaWithPartialCovariate) {
    const std::string csv =
        "voyage_id,year,disembarked,embarked\n"
        "1,1750,300,350\n"
        "2,1760,,400\n"
        "3,1770,250,\n"
        "4,1780,,\n";
    const auto t = read(csv, {{"disembarked", "year"}, {"embarked"}, std::string("voyage_id")});
    EXPECT_EQ(t.rows(), 4u);
    EXPECT_EQ(t.n_missing(), 2u);
    EXPECT_FALSE(t.covariates_complete());
    EXPECT_EQ(t.ids, (std::vector<std::string>{"1", "2", "3", "4"}));
    const auto pre = nnw::preprocess(t);
    EXPECT_TRUE(pre.table.covariates_complete());
    EXPECT_EQ(pre.table.covariate_names,
              (std::vector<std::string>{"disembarked", "year", "disembarked_missing"}));
    EXPECT_NO_THROW((void)nnw::nn_weighted_functional(pre.table, mean_y(), 1));
}

TEST(Ingest, QuotedFieldsBomAndCrlf) {
    const auto t = read("\xEF\xBB\xBF\"x\",name,y\r\n1,\"a, b\",2\r\n\r\n3,\"c \"\"q\"\"\",\r\n", schema_xy());
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.n_missing(), 1u);
    EXPECT_DOUBLE_EQ(*t.covariates[1][0], 3.0);
}

TEST(Ingest, ErrorsNameRowAndColumn) {
    try {
        (void)read("x,y\n1,2\n2,abc\n", schema_xy());
        FAIL();
    } catch (const nnw::TableError& e) {
        EXPECT_EQ(e.row(), 2u);
        EXPECT_EQ(e.column(), "y");
    }
    try {
        (void)read("x,z\n1,2\n", schema_xy());
        FAIL();
    } catch (const nnw::TableError& e) {
        EXPECT_EQ(e.row(), 0u);
        EXPECT_EQ(e.column(), "y");
    }
    EXPECT_THROW((void)read("x,y\n", schema_xy()), nnw::TableError);
    EXPECT_THROW((void)read("", schema_xy()), nnw::TableError);
    EXPECT_THROW((void)read("x,y\n1,2,3\n", schema_xy()), nnw::TableError);
    EXPECT_THROW((void)read("x,y\n1,inf\n", schema_xy()), nnw::TableError);
    EXPECT_THROW((void)read("x,y\n1,\"2\n", schema_xy()), std::invalid_argument);
    EXPECT_THROW((void)read("x,y\n1,2\n", {{}, {"y"}, std::nullopt}), std::invalid_argument);
    EXPECT_THROW((void)nnw::ingest_table_file("/nonexistent/file.csv", schema_xy()), std::invalid_argument);
}

TEST(Preprocess, MedianImputeAndIndicator) {
    const auto t = read("x,y\n1,1\n2,1\n,1\n4,\n", schema_xy());
    nnw::PreprocessOptions opt;
    opt.standardize = false;
    const auto pre = nnw::preprocess(t, opt);
    ASSERT_EQ(pre.table.covariate_names.size(), 2u);
    EXPECT_EQ(pre.columns[0].imputed_value, 2.0);
    std::vector<double> x;
    std::vector<double> ind;
    for (const auto& row : pre.table.covariates) {
        x.push_back(*row[0]);
        ind.push_back(*row[1]);
    }
    EXPECT_EQ(x, (std::vector<double>{1, 2, 2, 4}));
    EXPECT_EQ(ind, (std::vector<double>{0, 0, 1, 0}));
}

TEST(Preprocess, EvenMedianAveragesMiddlePair) {
    EXPECT_DOUBLE_EQ(nnw::sample_median({4.0, 1.0, 3.0, 2.0}), 2.5);
    EXPECT_DOUBLE_EQ(nnw::sample_median({5.0}), 5.0);
    EXPECT_THROW((void)nnw::sample_median({}), std::invalid_argument);
}

TEST(Preprocess, CompleteColumnsAreZScoredWithoutIndicators) {
    const auto t = read("x,w,y\n1,10,1\n2,30,\n3,20,1\n6,40,1\n", {{"x", "w"}, {"y"}, std::nullopt});
    const auto pre = nnw::preprocess(t);
    ASSERT_EQ(pre.table.covariate_names.size(), 2u);
    EXPECT_TRUE(pre.warnings.empty());
    for (std::size_t c = 0; c < 2; ++c) {
        std::vector<double> col;
        for (const auto& row : pre.table.covariates) col.push_back(*row[c]);
        EXPECT_NEAR(nnw::mean(col), 0.0, 1e-15);
        EXPECT_NEAR(nnw::sample_variance(col), 1.0, 1e-14);
    }
    EXPECT_DOUBLE_EQ(pre.columns[0].mean, 3.0);
    EXPECT_DOUBLE_EQ(pre.columns[0].sd, std::sqrt(14.0 / 3.0));
    EXPECT_NEAR(*pre.table.covariates[3][0], 3.0 / std::sqrt(14.0 / 3.0), 1e-15);
}

TEST(Preprocess, IndicatorIsStandardizedToo) {
    const auto pre = nnw::preprocess(read("x,y\n1,1\n,1\n3,\n5,1\n", schema_xy()));
    ASSERT_EQ(pre.columns.size(), 2u);
    EXPECT_TRUE(pre.columns[1].standardized);
    std::vector<double> col;
    for (const auto& row : pre.table.covariates) col.push_back(*row[1]);
    EXPECT_NEAR(nnw::sample_variance(col), 1.0, 1e-14);
}

TEST(Preprocess, ConstantColumnWarns) {
    const auto pre = nnw::preprocess(read("x,y\n5,1\n5,\n5,2\n", schema_xy()));
    ASSERT_EQ(pre.warnings.size(), 1u);
    EXPECT_NE(pre.warnings[0].find("zero variance"), std::string::npos);
    for (const auto& row : pre.table.covariates) EXPECT_EQ(*row[0], 5.0);
    EXPECT_FALSE(pre.columns[0].standardized);
}

TEST(Preprocess, AllMissingColumnRejected) {
    EXPECT_THROW((void)nnw::preprocess(read("x,y\n,1\n,\n", schema_xy())), std::invalid_argument);
}

TEST(NNFunctional, HandExample) {
    const auto est = nnw::nn_weighted_functional(three_point(), mean_y(), 1);
    ASSERT_TRUE(est.value);
    EXPECT_NEAR(*est.value, 40.0 / 3.0, 1e-14);
    EXPECT_EQ(est.n_nonmissing, 2u);
    EXPECT_EQ(est.n_missing, 3u);
    EXPECT_EQ(est.method, nnw::EstimateMethod::nn_weighted);
}

TEST(NNFunctional, AssignmentWeights) {
    const auto a = nnw::one_nn_assignment(three_point(), 1);
    EXPECT_EQ(a.counts, (std::vector<std::uint64_t>{2, 1}));
    EXPECT_EQ(a.weights(), (std::vector<double>{2.0 / 3.0, 1.0 / 3.0}));
}

TEST(NNFunctional, ConstantQueryIsExact) {
    const auto syn = nnw::synthetic_mar(nnw::MarModel{}, 3000, 4);
    for (double c : {1.0, -2.5, 0.1}) EXPECT_EQ(*nnw::nn_weighted_functional(syn.table, constant(c), 1).value, c);
}

TEST(NNFunctional, FilterOnHandExample) {
    Query q = mean_y();
    q.filter = [](std::span<const double> x, std::span<const double>) { return x[0] < 0.5; };
    EXPECT_DOUBLE_EQ(*nnw::nn_weighted_functional(three_point(), q, 1).value, 10.0);
    EXPECT_DOUBLE_EQ(*nnw::complete_case_functional(three_point(), q).value, 10.0);
}

TEST(NNFunctional, EmptyFilterIsSignalled) {
    Query q = mean_y();
    q.filter = [](std::span<const double> x, std::span<const double>) { return x[0] > 5.0; };
    const auto nn = nnw::nn_weighted_functional(three_point(), q, 1);
    EXPECT_EQ(nn.status, nnw::EstimateStatus::empty_filter);
    EXPECT_FALSE(nn.value);
    const auto cc = nnw::complete_case_functional(three_point(), q);
    EXPECT_EQ(cc.status, nnw::EstimateStatus::empty_filter);
    EXPECT_FALSE(cc.value);
}

TEST(NNFunctional, MissingCovariatesRejected) {
    const auto t = read("x,y\n1,2\n,\n3,\n", schema_xy());
    EXPECT_THROW((void)nnw::nn_weighted_functional(t, mean_y(), 1), std::invalid_argument);
}

TEST(NNFunctional, NonFiniteQueryRejected) {
    const Query logy{"log(y)", {}, [](std::span<const double>, std::span<const double> y) { return std::log(y[0]); }};
    const auto t = MARTable::from_values(PointSet::from_values({0.0, 1.0}), PointSet::from_values({0.0, kMissing}));
    EXPECT_THROW((void)nnw::nn_weighted_functional(t, logy, 1), std::domain_error);
}

TEST(NNFunctional, DualFormsAgreeOnRandomTables) {
    for (std::uint64_t s = 0; s < 30; ++s) {
        nnw::MarModel model;
        model.response_mean = [](double x) { return std::exp(3.0 * x); };
        const auto syn = nnw::synthetic_mar(model, 200 + 37 * s, s);
        const auto est = nnw::nn_weighted_functional(syn.table, mean_y(), s);
        const double tol = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(est.per_row_form);
        EXPECT_NEAR(est.per_row_form, est.weight_form, tol);
    }
}

TEST(NNFunctional, EqualsImputeThenAverage) {
    const auto syn = nnw::synthetic_mar(nnw::MarModel{}, 2000, 9);
    const auto& t = syn.table;
    const auto a = nnw::one_nn_assignment(t, 5);
    std::vector<double> imputed;
    for (std::size_t i = 0; i < a.missing_rows.size(); ++i)
        imputed.push_back(*t.responses[a.donor_rows[a.donor_of[i]]][0]);
    double expect = 0.0;
    for (double v : imputed) expect += v;
    expect /= static_cast<double>(imputed.size());
    EXPECT_NEAR(*nnw::nn_weighted_functional(t, mean_y(), 5).value, expect, 1e-13);
}

TEST(NNFunctional, FilterComposesWithTransform) {
    const auto syn = nnw::synthetic_mar(nnw::MarModel{}, 5000, 2);
    auto in = [](std::span<const double> x, std::span<const double>) { return x[0] < 0.4; };
    Query filtered = mean_y();
    filtered.filter = in;
    const Query indicator{"1{f}", {}, [&](std::span<const double> x, std::span<const double> y) { return in(x, y) ? 1.0 : 0.0; }};
    const Query product{"1{f} y", {}, [&](std::span<const double> x, std::span<const double> y) { return in(x, y) ? y[0] : 0.0; }};
    const double lhs = *nnw::nn_weighted_functional(syn.table, filtered, 3).value *
                       *nnw::nn_weighted_functional(syn.table, indicator, 3).value;
    EXPECT_NEAR(lhs, *nnw::nn_weighted_functional(syn.table, product, 3).value, 1e-13);
}

TEST(NNFunctional, IndependentOfThreadCount) {
    const auto syn = nnw::synthetic_mar(nnw::MarModel{}, 50000, 6);
    EXPECT_EQ(*nnw::nn_weighted_functional(syn.table, mean_y(), 2, 1).value,
              *nnw::nn_weighted_functional(syn.table, mean_y(), 2, 4).value);
}

TEST(CompleteCase, HandExample) {
    const auto est = nnw::complete_case_functional(three_point(), mean_y());
    EXPECT_DOUBLE_EQ(*est.value, 15.0);
    EXPECT_EQ(est.method, nnw::EstimateMethod::complete_case);
    EXPECT_EQ(est.n_passing, 2u);
}

TEST(SyntheticMar, TargetByQuadrature) {
    // int x (0.8 - 0.6x) dx / int (0.8 - 0.6x) dx = 0.2 / 0.5
    EXPECT_NEAR(nnw::mar_missing_mean_target(nnw::MarModel{}), 0.4, 1e-12);
    EXPECT_NEAR(nnw::mar_missing_mean_target(nnw::MarModel::mcar(0.3)), 0.5, 1e-12);
}

TEST(SyntheticMar, NNEstimateHitsTargetAndBeatsCompleteCase) {
    const nnw::MarModel model;
    const double target = nnw::mar_missing_mean_target(model);
    double acc = 0.0;
    int cc_worse = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto syn = nnw::synthetic_mar(model, 20000, s);
        const double nn = *nnw::nn_weighted_functional(syn.table, mean_y(), s).value;
        const double cc = *nnw::complete_case_functional(syn.table, mean_y()).value;
        acc += nn;
        if (std::abs(cc - target) > std::abs(nn - target)) ++cc_worse;
    }
    EXPECT_NEAR(acc / 10.0, target, 0.02);
    EXPECT_EQ(cc_worse, 10);
}

TEST(SyntheticMar, McarMethodsAgree) {
    const auto model = nnw::MarModel::mcar(0.5);
    std::vector<double> diff;
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto syn = nnw::synthetic_mar(model, 20000, 50 + s);
        diff.push_back(*nnw::nn_weighted_functional(syn.table, mean_y(), s).value -
                       *nnw::complete_case_functional(syn.table, mean_y()).value);
    }
    const double sd = std::sqrt(nnw::sample_variance(diff));
    EXPECT_LE(std::abs(nnw::mean(diff)), 2.0 * sd);
}

TEST(SyntheticMar, ErrorShrinksWithRows) {
    const nnw::MarModel model;
    const double target = nnw::mar_missing_mean_target(model);
    auto mae = [&](std::size_t rows) {
        double acc = 0.0;
        for (std::uint64_t s = 0; s < 10; ++s) {
            const auto syn = nnw::synthetic_mar(model, rows, 1000 + s);
            acc += std::abs(*nnw::nn_weighted_functional(syn.table, mean_y(), s).value - target);
        }
        return acc / 10.0;
    };
    EXPECT_LT(mae(10000), mae(1000));
}

TEST(SyntheticMar, HiddenResponsesMatchObservedCells) {
    const auto syn = nnw::synthetic_mar(nnw::MarModel{}, 1000, 3);
    ASSERT_EQ(syn.hidden_responses.size(), 1000u);
    for (std::size_t i = 0; i < 1000; ++i)
        if (syn.table.observed[i]) ASSERT_EQ(*syn.table.responses[i][0], syn.hidden_responses[i]);
    const double frac = static_cast<double>(syn.table.n_nonmissing()) / 1000.0;
    EXPECT_NEAR(frac, 0.5, 0.06);
}
