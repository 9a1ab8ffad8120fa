// nnw: runs the experiments described by a config file.
//
// Exit codes: 0 success, 1 invalid input or config, 2 a --check tolerance failed.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nnw/experiment_config.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invalid = 1;
constexpr int exit_check_failed = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    bool check = false;
};

std::string with_suffix(const std::string& path, const std::string& suffix) {
    const auto slash = path.find_last_of('/');
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

std::string header(const std::string& verb, const nnw::ExperimentConfig& ec) {
    std::ostringstream os;
    os << "# nnw " << verb << "\n# master_seed = " << ec.master_seed << "\n# resolved config:\n";
    std::istringstream in(ec.resolved);
    std::string line;
    while (std::getline(in, line)) os << "#   " << line << '\n';
    return os.str();
}

// Binary mode keeps LF line endings on every platform.
void write_file(const std::string& path, const std::string& head, const std::string& body) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << head << body;
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
    std::cerr << "wrote " << path << '\n';
}

void print_aligned(std::ostream& os, const std::string& csv) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    std::vector<std::size_t> width;
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (width.size() <= c) width.push_back(0);
            width[c] = std::max(width[c], r[c].size());
        }
    for (const auto& r : rows) {
        for (std::size_t c = 0; c < r.size(); ++c)
            os << r[c] << std::string(c + 1 < r.size() ? width[c] - r[c].size() + 2 : 0, ' ');
        os << '\n';
    }
}

void check_line(bool pass, const std::string& what) { std::cout << (pass ? "CHECK PASS  " : "CHECK FAIL  ") << what << '\n'; }

int run_table1(const nnw::ExperimentConfig& ec, const Options& opt) {
    const auto& p = std::get<nnw::Table1Params>(ec.params);
    const double est = nnw::table1_runtime_estimate(p) / std::max(1u, nnw::resolve_threads(p.threads));
    if (est > 600.0)
        std::cerr << "warning: m*n budget is large; estimated runtime about " << nnw::sig6(est / 60.0)
                  << " minutes\n";
    const auto res = nnw::run_table1(p, [](const nnw::Table1Cell& c) {
        std::cerr << "  " << c.example << " n=" << c.n << " replicate=" << c.replicate << " q1=" << nnw::sig6(c.q1)
                  << '\n';
    });
    std::ostringstream human;
    nnw::write_table1_summary(human, res, true);
    print_aligned(std::cout, human.str());
    if (ec.output) {
        std::ostringstream cells;
        std::ostringstream summary;
        nnw::write_table1_cells(cells, res);
        nnw::write_table1_summary(summary, res, false);
        write_file(*ec.output, header("table1", ec), summary.str());
        write_file(with_suffix(*ec.output, "_cells"), header("table1", ec), cells.str());
    }
    if (!opt.check) return exit_ok;
    bool ok = true;
    for (const auto& [name, tol] : ec.check.limit_tolerance) {
        const auto* s = res.find(name, ec.check.check_n);
        if (!s) {
            std::cerr << "error: tolerances.check_n = " << ec.check.check_n << " is not in n_grid\n";
            return exit_invalid;
        }
        const double err = std::abs(s->mean_q1 - s->limit);
        const bool pass = err <= tol;
        ok = ok && pass;
        check_line(pass, name + " n=" + std::to_string(s->n) + " |mean - limit| = " + nnw::sig6(err) +
                             " (tolerance " + nnw::sig6(tol) + ")");
    }
    return ok ? exit_ok : exit_check_failed;
}

int run_figure(const nnw::ExperimentConfig& ec, const Options& opt) {
    const auto& p = std::get<nnw::FigureParams>(ec.params);
    const auto fd = nnw::run_figure_data(p);
    std::ostringstream body;
    nnw::write_figure_records(body, fd.records);
    if (ec.output) {
        write_file(*ec.output, header("figure-data", ec), body.str());
        if (p.subinterval) {
            std::ostringstream sub;
            nnw::write_figure_records(sub, fd.subinterval_records);
            write_file(with_suffix(*ec.output, "_subinterval"), header("figure-data", ec), sub.str());
        }
    } else {
        std::cout << header("figure-data", ec) << body.str();
    }
    std::cerr << p.example.name << ": " << fd.records.size() << " cells, sum of weights = " << nnw::sig6(fd.weight_total)
              << '\n';
    if (!opt.check) return exit_ok;
    const bool pass = fd.weight_total == 1.0;
    check_line(pass, "sum of Voronoi weights equals 1");
    return pass ? exit_ok : exit_check_failed;
}

int run_mar(const nnw::ExperimentConfig& ec, const Options& opt) {
    const auto& p = std::get<nnw::MarDemoParams>(ec.params);
    const auto res = nnw::run_mar_demo(p);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    const std::string q = p.query.describe();
    std::ostringstream human;
    nnw::write_mar_rows(human, res, q, true);
    print_aligned(std::cout, human.str());
    if (res.target) {
        std::cout << "target E[g | missing] = " << nnw::sig6(*res.target)
                  << "  mean nn_weighted = " << nnw::sig6(res.mean_nn_estimate())
                  << "  mean |nn_weighted - target| = " << nnw::sig6(res.mean_nn_error())
                  << "  complete_case farther in " << res.cc_worse_count() << "/" << res.rows.size()
                  << " replicates\n";
    }
    for (const auto& row : res.rows)
        for (const auto* e : {&row.nn, &row.cc})
            if (e->status == nnw::EstimateStatus::empty_filter)
                std::cout << nnw::to_string(e->method) << ": no rows pass the filter; estimate undefined\n";
    if (ec.output) {
        std::ostringstream body;
        nnw::write_mar_rows(body, res, q, false);
        write_file(*ec.output, header("mar-demo", ec), body.str());
    }
    if (!opt.check) return exit_ok;
    if (!res.target) {
        std::cerr << "error: --check needs synthetic data (no known target for a file source)\n";
        return exit_invalid;
    }
    const bool a = res.mean_nn_error() <= ec.check.target_error;
    const bool b = res.cc_worse_count() >= ec.check.min_cc_worse;
    check_line(a, "mean |nn_weighted - target| = " + nnw::sig6(res.mean_nn_error()) + " (tolerance " +
                      nnw::sig6(ec.check.target_error) + ")");
    check_line(b, "complete_case farther than nn_weighted in " + std::to_string(res.cc_worse_count()) + "/" +
                      std::to_string(res.rows.size()) + " (need " + std::to_string(ec.check.min_cc_worse) + ")");
    return a && b ? exit_ok : exit_check_failed;
}

int run_shift(const nnw::ExperimentConfig& ec, const Options& opt) {
    const auto& p = std::get<nnw::ShiftDemoParams>(ec.params);
    const auto res = nnw::run_shift_demo(p);
    std::ostringstream human;
    human << "replicate,one_nn_test_error,validation_mean,oracle_test_risk,selected,empirical_choice,oracle_best\n";
    for (const auto& r : res.rows)
        human << r.replicate << ',' << nnw::sig6(r.tilde_e) << ',' << nnw::sig6(r.validation_mean_loss) << ','
              << nnw::sig6(r.true_risk) << ',' << res.hypothesis_labels[r.selection.best] << ','
              << res.hypothesis_labels[r.empirical_choice] << ',' << res.hypothesis_labels[r.oracle_choice] << '\n';
    print_aligned(std::cout, human.str());
    std::cout << "scenario " << p.scenario_name << ": mean one_nn_test_error = " << nnw::sig6(res.mean_tilde_e())
              << "  mean oracle test risk = " << nnw::sig6(res.mean_true_risk())
              << "  relative error = " << nnw::sig6(res.relative_error()) << "  selection matches oracle in "
              << res.correct_selections() << "/" << res.rows.size() << '\n';
    if (ec.output) {
        std::ostringstream body;
        nnw::write_shift_rows(body, res, false);
        write_file(*ec.output, header("shift-demo", ec), body.str());
    }
    if (!opt.check) return exit_ok;
    const bool a = res.relative_error() <= ec.check.relative_error;
    const bool b = res.correct_selections() >= ec.check.min_correct;
    check_line(a, "relative error of one_nn_test_error = " + nnw::sig6(res.relative_error()) + " (tolerance " +
                      nnw::sig6(ec.check.relative_error) + ")");
    check_line(b, "selection matches oracle in " + std::to_string(res.correct_selections()) + "/" +
                      std::to_string(res.rows.size()) + " (need " + std::to_string(ec.check.min_correct) + ")");
    return a && b ? exit_ok : exit_check_failed;
}

int run_diag(const nnw::ExperimentConfig& ec, const Options& opt) {
    const auto& p = std::get<nnw::DiagnosticsParams>(ec.params);
    const auto rep = nnw::run_diagnostics(p);
    std::cout << rep.to_table();
    if (ec.output) write_file(*ec.output, header("diagnostics", ec), rep.to_csv());
    if (!opt.check) return exit_ok;
    check_line(rep.all_passed(), "all diagnostics within tolerance");
    return rep.all_passed() ? exit_ok : exit_check_failed;
}

int dispatch(const std::string& verb, const Options& opt) {
    static const std::map<std::string, std::string> kinds = {{"table1", "table1"},
                                                             {"figure-data", "figure_data"},
                                                             {"mar-demo", "mar_demo"},
                                                             {"shift-demo", "shift_demo"},
                                                             {"diagnostics", "diagnostics"}};
    nnw::ExperimentConfig ec;
    try {
        nnw::Config cfg = opt.config.empty() ? nnw::Config{} : nnw::Config::parse_file(opt.config);
        ec = nnw::load_experiment(std::move(cfg), kinds.at(verb), {opt.seed, opt.threads, opt.out});
    } catch (const nnw::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return exit_invalid;
    }
    try {
        if (verb == "table1") return run_table1(ec, opt);
        if (verb == "figure-data") return run_figure(ec, opt);
        if (verb == "mar-demo") return run_mar(ec, opt);
        if (verb == "shift-demo") return run_shift(ec, opt);
        return run_diag(ec, opt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_invalid;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nnw: 1NN measure experiments"};
    app.require_subcommand(1);
    Options opt;
    const std::vector<std::pair<std::string, std::string>> verbs = {
        {"table1", "1NN measure estimates across sample sizes for the built-in examples"},
        {"figure-data", "per-datum Voronoi cell measures and density ratios"},
        {"mar-demo", "1NN weighted vs complete-case estimates on missing-at-random data"},
        {"shift-demo", "test-error estimation and hypothesis selection under covariate shift"},
        {"diagnostics", "assumption checks, variance bound and density-ratio limit checks"}};
    for (const auto& [name, help] : verbs) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config, "config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "master seed (overrides the config)");
        sub->add_option("--out", opt.out, "output path (overrides the config)");
        sub->add_option("--threads", opt.threads, "worker threads, 0 = all cores (overrides the config)");
        sub->add_flag("--check", opt.check, "compare results with the config tolerances; exit 2 on failure");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_invalid;
    }
    for (const auto* sub : app.get_subcommands()) return dispatch(sub->get_name(), opt);
    return exit_invalid;
}
