// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "nnw/experiments.hpp"

using namespace nnw;

namespace {

constexpr std::uint64_t kMaster = 1;
constexpr std::size_t kM = 1000000;

struct Outcome {
    bool pass = true;
    std::vector<std::string> lines;

    void expect(bool ok, const std::string& what) {
        pass = pass && ok;
        lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void note(const std::string& what) { lines.push_back("     " + what); }
};

int failures = 0;

void report(int id, const std::string& title, const Outcome& o, double secs) {
    std::printf("%s  criterion %d: %s  (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs);
    for (const auto& l : o.lines) std::printf("        %s\n", l.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

template <class F>
void criterion(int id, const std::string& title, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.expect(false, std::string("exception: ") + e.what());
    }
    report(id, title, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::string fmt(double v) { return sig6(v); }

// Table 1 sweeps shared by criteria 1-3. Beta gets 30 seeds for the variance trend.
struct Sweeps {
    Table1Result beta;
    Table1Result others;

    [[nodiscard]] const Table1Summary& at(const std::string& ex, std::size_t n) const {
        const auto* s = ex == "beta" ? beta.find(ex, n) : others.find(ex, n);
        if (!s) throw std::logic_error("missing sweep cell " + ex);
        return *s;
    }
};

Sweeps run_sweeps() {
    Sweeps s;
    Table1Params p;
    p.n_grid = {100, 1000, 10000};
    p.m = kM;
    p.examples = {builtin_example("beta")};
    p.seeds = replicate_seeds(kMaster, 30);
    s.beta = run_table1(p);
    p.examples = {builtin_example("gaussian"), builtin_example("fat_cantor")};
    p.seeds = replicate_seeds(kMaster, 10);
    s.others = run_table1(p);
    return s;
}

// Sort of every point by (d2, tie key, index).
std::vector<std::size_t> brute_order(const PointSet& pts, std::span<const double> q, std::uint64_t tie_seed) {
    const std::uint64_t qh = hash_point(q);
    std::vector<std::tuple<double, std::uint64_t, std::size_t>> rows;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < pts.dim(); ++c) d2 += (q[c] - pts[i][c]) * (q[c] - pts[i][c]);
        rows.emplace_back(d2, NNIndex::tie_key(tie_seed, qh, i), i);
    }
    std::sort(rows.begin(), rows.end());
    std::vector<std::size_t> out;
    for (const auto& r : rows) out.push_back(std::get<2>(r));
    return out;
}

// Closed-form Renyi integral for N(0, s0) against N(0, s1), variances; +inf when divergent.
double gaussian_renyi_integral(double q, double s0, double s1) {
    const double a = q / s0 + (1.0 - q) / s1;
    if (a <= 0.0) return std::numeric_limits<double>::infinity();
    return std::exp(-0.5 * q * std::log(s0) - 0.5 * (1.0 - q) * std::log(s1) - 0.5 * std::log(a));
}

}  // namespace

int main() {
    std::printf("nnw acceptance: master seed %llu, m = %zu\n", static_cast<unsigned long long>(kMaster), kM);
    std::fflush(stdout);

    Sweeps sweeps;
    bool swept = false;
    std::string sweep_error;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        sweeps = run_sweeps();
        swept = true;
    } catch (const std::exception& e) {
        sweep_error = e.what();
    }
    std::printf("table sweeps: %.1fs\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    criterion(1, "Q1 mean at n=1e4, m=1e6 within tolerance of the limit", [&](Outcome& o) {
        if (!swept) throw std::runtime_error(sweep_error);
        const std::tuple<const char*, double, double> rows[] = {
            {"beta", 1.5, 0.03}, {"gaussian", 2.1, 0.08}, {"fat_cantor", 2.0, 0.06}};
        for (const auto& [ex, limit, tol] : rows) {
            const auto& s = sweeps.at(ex, 10000);
            const double dev = std::abs(s.mean_q1 - limit);
            o.expect(s.replicates >= 10 && dev <= tol,
                     std::string(ex) + ": mean " + fmt(s.mean_q1) + " over " + std::to_string(s.replicates) +
                         " seeds, |mean - " + fmt(limit) + "| = " + fmt(dev) + " <= " + fmt(tol) +
                         "  (published single draw " + (s.reference ? fmt(*s.reference) : "-") + ")");
        }
    });

    criterion(2, "seed-averaged |Q1 - limit| decreases from n=1e2 to 1e3 to 1e4", [&](Outcome& o) {
        if (!swept) throw std::runtime_error(sweep_error);
        for (const char* ex : {"beta", "gaussian", "fat_cantor"}) {
            const double e2 = sweeps.at(ex, 100).mean_abs_error;
            const double e3 = sweeps.at(ex, 1000).mean_abs_error;
            const double e4 = sweeps.at(ex, 10000).mean_abs_error;
            o.expect(e4 < e3 && e3 < e2, std::string(ex) + ": " + fmt(e2) + " > " + fmt(e3) + " > " + fmt(e4) +
                                             " over " + std::to_string(sweeps.at(ex, 100).replicates) + " seeds");
        }
    });

    criterion(3, "Beta: variance of Q1 at n=1e4 below 25% of n=1e2 (30 seeds)", [&](Outcome& o) {
        if (!swept) throw std::runtime_error(sweep_error);
        const auto& lo = sweeps.at("beta", 100);
        const auto& hi = sweeps.at("beta", 10000);
        o.expect(hi.replicates == 30 && hi.variance_q1 < 0.25 * lo.variance_q1,
                 "var(n=1e4) = " + fmt(hi.variance_q1) + ", var(n=1e2) = " + fmt(lo.variance_q1) +
                     ", ratio " + fmt(hi.variance_q1 / lo.variance_q1));
    });

    criterion(4, "Beta, q0=2, n=1e3, 30 seeds: empirical variance <= assembled bound", [&](Outcome& o) {
        const Example ex = builtin_example("beta");
        const auto vb = variance_bound_estimate(ex.pair, ex.eta, HolderPair::from_q0(2.0), 1000, 100000,
                                                replicate_seeds(derive_seed(kMaster, 4), 30), 100000);
        o.expect(!vb.infinite_ratio_moment && std::abs(vb.ratio_moment - 1.8) < 1e-8,
                 "ratio moment int (f0/f1)^2 dmu1 = " + fmt(vb.ratio_moment) + " (closed form 1.8)");
        o.expect(vb.satisfied, "variance " + fmt(vb.empirical_variance) + " <= bound " + fmt(vb.bound_value) +
                                   "  (discrepancy moment " + fmt(vb.discrepancy_moment) + ")");
    });

    std::optional<LimitCheck> beta_limit;
    criterion(5, "Voronoi limit: uniform deviation < 5% at n=1e3; Beta deviation non-increasing", [&](Outcome& o) {
        constexpr std::size_t bins = 20;
        const std::size_t uniform_n[] = {1000};
        const Example uni = builtin_example("uniform");
        const auto u = voronoi_limit_check(uni.pair, uniform_n, 200000, bins,
                                           replicate_seeds(derive_seed(kMaster, 5), 100));
        o.expect(u.levels[0].max_relative_deviation < 0.05,
                 "uniform, n=1e3, 100 seeds, " + std::to_string(bins) + " bins: max interior |mean n*w - 1| = " +
                     fmt(u.levels[0].max_relative_deviation) + " < 0.05");

        const std::size_t grid[] = {100, 1000, 10000};
        const Example beta = builtin_example("beta");
        beta_limit = voronoi_limit_check(beta.pair, grid, 200000, bins, replicate_seeds(derive_seed(kMaster, 6), 100));
        std::string trend;
        for (const auto& lvl : beta_limit->levels)
            trend += (trend.empty() ? "" : " -> ") + fmt(lvl.max_relative_deviation);
        o.expect(beta_limit->deviation_nonincreasing,
                 "beta, 100 seeds, max interior deviation from 0.6 x^-0.5 along n = 1e2, 1e3, 1e4: " + trend);
    });

    criterion(6, "Beta, n=1e3, interior bins: mean (n*w)^2 <= 2.5 mean (f0/f1)^2", [&](Outcome& o) {
        if (!beta_limit) throw std::runtime_error("criterion 5 did not produce the Beta profile");
        const LimitLevel* lvl = nullptr;
        for (const auto& l : beta_limit->levels)
            if (l.n == 1000) lvl = &l;
        if (!lvl) throw std::logic_error("no n=1e3 level");
        std::size_t used = 0;
        for (const auto& b : lvl->bins) used += b.interior && b.count > 0;
        o.expect(used > 0 && lvl->max_second_moment_ratio <= 2.5,
                 "max over " + std::to_string(used) + " interior bins of mean (n*w)^2 / mean ratio^2 = " +
                     fmt(lvl->max_second_moment_ratio) + " <= 2.5");
    });

    criterion(7, "exactness: weights sum, constant eta, dual forms, index vs brute force", [&](Outcome& o) {
        std::size_t sum_bad = 0;
        std::size_t const_bad = 0;
        double dual_worst = 0.0;
        const double consts[] = {1.0, 0.3, -2.75, 1e6 / 3.0};
        std::size_t runs = 0;
        for (const char* name : {"beta", "gaussian", "fat_cantor", "uniform"}) {
            const Example ex = builtin_example(name);
            for (std::size_t n : {1u, 7u, 100u, 5000u}) {
                const std::uint64_t s = derive_seed(derive_seed(kMaster, 7), runs++);
                const Q1Run run = run_q1(ex.pair, ex.eta, n, 20011, s);
                std::uint64_t total = 0;
                for (auto c : run.weights.counts) total += c;
                sum_bad += total != run.weights.m || run.weights.total() != 1.0;
                for (double c : consts) {
                    const EtaFunction eta{"const", [c](std::span<const double>) { return c; }, std::nullopt};
                    const_bad += q1_estimate(run.weights, run.data, eta).value != c;
                }
                // per-sample form: mean of eta at the nearest datum of each mu0 draw
                const PointSet mc = sample_points(ex.pair.mu0, 20011, derive_seed(s, streams::mu0_samples));
                const NNIndex index(run.data, derive_seed(s, streams::ties));
                const auto nearest = assign_nearest(index, mc);
                const auto values = eta_at_data(run.data, ex.eta);
                std::vector<double> per_sample(nearest.size());
                double scale = 0.0;
                for (std::size_t i = 0; i < nearest.size(); ++i) {
                    per_sample[i] = values[nearest[i]];
                    scale += std::abs(per_sample[i]);
                }
                scale /= static_cast<double>(nearest.size());
                const double per = accurate_sum(per_sample) / static_cast<double>(nearest.size());
                dual_worst = std::max(dual_worst, std::abs(per - run.estimate.value) /
                                                      (scale * std::numeric_limits<double>::epsilon()));
            }
        }
        o.expect(sum_bad == 0, "sum of counts == m and sum of weights == 1.0 exactly in " + std::to_string(runs) +
                                   " runs (" + std::to_string(sum_bad) + " violations)");
        o.expect(const_bad == 0, "constant eta gives Q1 == c exactly for c in {1, 0.3, -2.75, 1e6/3} (" +
                                     std::to_string(const_bad) + " violations)");
        o.expect(dual_worst <= 8.0, "Q1 weight form vs per-sample form: worst gap " + fmt(dual_worst) +
                                        " ulp-scale units (<= 8)");

        // missing-data functional: per-missing-row sum vs count-weighted donor sum
        double mar_worst = 0.0;
        for (std::size_t r = 0; r < 10; ++r) {
            const auto sm = synthetic_mar(MarModel{}, 2000, derive_seed(derive_seed(kMaster, 8), r));
            const auto est = nn_weighted_functional(sm.table, build_query(QuerySpec{}, sm.table), r);
            mar_worst = std::max(mar_worst, std::abs(est.per_row_form - est.weight_form) /
                                                (std::abs(est.per_row_form) * std::numeric_limits<double>::epsilon()));
        }
        o.expect(mar_worst <= 8.0,
                 "missing-data functional per-row vs weight form: worst gap " + fmt(mar_worst) + " eps units");

        std::mt19937_64 rng(derive_seed(kMaster, 9));
        std::size_t mismatches = 0;
        std::size_t queries = 0;
        for (int inst = 0; inst < 1000; ++inst) {
            const std::size_t n = 1 + rng() % 40;
            const std::size_t p = 1 + rng() % 3;
            const bool grid = inst % 3 == 0;  // lattice points force exact ties
            std::vector<double> v(n * p);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (auto& x : v) x = grid ? 0.5 * static_cast<double>(rng() % 5) : u(rng);
            const PointSet pts(n, p, std::move(v));
            const std::uint64_t tie = rng();
            const NNIndex index(pts, tie);
            for (int k = 0; k < 5; ++k) {
                std::vector<double> q(p);
                for (auto& x : q) x = grid ? 0.25 * static_cast<double>(rng() % 9) : u(rng);
                const std::size_t kk = 1 + rng() % n;
                const auto got = index.query_knn(q, kk);
                const auto want = brute_order(pts, q, tie);
                bool same = got.size() == kk;
                for (std::size_t i = 0; same && i < kk; ++i) same = got[i].index == want[i];
                mismatches += !same;
                ++queries;
            }
        }
        o.expect(mismatches == 0, "k-d index vs brute force: " + std::to_string(queries) +
                                      " k-NN queries over 1000 instances, " + std::to_string(mismatches) +
                                      " mismatches");
    });

    criterion(8, "MAR, N=2e4, 10 seeds: nn_weighted within 0.02 of target; complete-case worse >= 8/10", [&](Outcome& o) {
        MarDemoParams p;
        p.rows = 20000;
        p.seeds = replicate_seeds(derive_seed(kMaster, 10), 10);
        const auto r = run_mar_demo(p);
        // target by hand: E[x (0.8 - 0.6 x)] / E[0.8 - 0.6 x] over U(0,1) = 0.2 / 0.5
        o.expect(r.target && std::abs(*r.target - 0.4) < 1e-10,
                 "quadrature target E[Y | M=0] = " + (r.target ? full(*r.target) : "none") + " (closed form 0.4)");
        o.expect(r.mean_nn_error() <= 0.02, "mean |nn_weighted - target| = " + fmt(r.mean_nn_error()) +
                                                " (mean estimate " + fmt(r.mean_nn_estimate()) + ") <= 0.02");
        o.expect(r.cc_worse_count() >= 8,
                 "complete-case farther from target in " + std::to_string(r.cc_worse_count()) + "/10 seeds");
    });

    criterion(9, "covariate shift: 1NN test error within 10%; constant selection >= 9/10", [&](Outcome& o) {
        ShiftDemoParams p;
        p.seeds = replicate_seeds(derive_seed(kMaster, 11), 10);
        const auto r = run_shift_demo(p);
        std::vector<double> hidden;
        for (const auto& row : r.rows) hidden.push_back(row.hidden_label_risk);
        const double truth = mean(hidden);
        const double rel = std::abs(r.mean_tilde_e() - truth) / truth;
        o.expect(rel <= 0.10, "gaussian_linear: mean 1NN test error " + fmt(r.mean_tilde_e()) +
                                  " vs hidden-label risk " + fmt(truth) + ", relative error " + fmt(rel) + " <= 0.10");
        o.note("oracle risk on fresh test draws " + fmt(r.mean_true_risk()));

        ShiftDemoParams s;
        s.scenario_name = "step";
        s.scenario = ShiftScenario::step();
        s.seeds = p.seeds;
        const auto sr = run_shift_demo(s);
        std::size_t shift_correct = 0;
        std::size_t empirical_correct = 0;
        for (const auto& row : sr.rows) {
            // under the test law every response is 1, so constant(1) is the shift-correct choice
            shift_correct += row.oracle_choice == 1 && row.selection.best == 1;
            empirical_correct += row.empirical_choice == 1;
        }
        o.expect(shift_correct >= 9, "step: 1NN risk selects constant(1) in " + std::to_string(shift_correct) +
                                         "/10 seeds (unweighted training risk: " +
                                         std::to_string(empirical_correct) + "/10)");
    });

    criterion(10, "out-of-reach results stated; assumption verdicts match closed forms", [&](Outcome& o) {
        o.note("The exact record totals of the historical voyages database (10,644,376 and 11,569,160)");
        o.note("are not reproduced: that dataset is not bundled. The missing-data pipeline is");
        o.note("validated on synthetic data by criteria 7 and 8 instead.");
        const double q0[] = {2.0};
        const Example beta = builtin_example("beta");
        const auto b = assumption_check(beta.pair, beta.eta, q0, kMaster);
        o.expect(b.rows[0].renyi.finite() && std::abs(b.rows[0].renyi.value - std::log(1.8)) < 1e-8,
                 "beta, q0=2: Renyi divergence " + fmt(b.rows[0].renyi.value) + ", finite (closed form ln 1.8 = " +
                     fmt(std::log(1.8)) + ")");
        const Example gauss = builtin_example("gaussian");
        const auto g = assumption_check(gauss.pair, gauss.eta, q0, kMaster);
        const bool closed_infinite = !std::isfinite(gaussian_renyi_integral(2.0, 2.1, 1.0));
        o.expect(closed_infinite && !g.rows[0].renyi.finite(),
                 std::string("gaussian, q0=2: verdict ") + (g.rows[0].renyi.finite() ? "finite" : "infinite") +
                     " (closed form: finite iff q < 2.1/1.1)");
        o.note(std::string("feasibility with the eta moment check: beta ") + (b.rows[0].feasible ? "yes" : "no") +
               ", gaussian " + (g.rows[0].feasible ? "yes" : "no"));
    });

    std::printf("%s: %d criterion failure(s)\n", failures ? "FAIL" : "PASS", failures);
    return failures ? 1 : 0;
}
