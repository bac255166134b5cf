// Command-line front end for the distribution library: evaluate and sample
// distributions, run the regression-identity and differential-equation
// residual checks on the default grids, Monte Carlo-verify the conditional
// expectations, and fit family parameters to a target quantile function.
//
// Exit codes: 0 success (and all checks passed), 1 a verification check
// failed or a computation did not converge, 2 usage or parameter error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qfam/report_io.hpp"

namespace {

struct RunConfig {
    std::string command;
    std::string dist = "t";
    std::string what = "pdf";
    int theorem = 1;
    std::string equation = "quantile-ode";
    std::string kind = "sample-mean";
    std::string format = "json";
    std::string out_path;
    double nu = 3.0;
    double mu = 0.0;
    double sigma = 1.0;
    double lambda = 0.5;
    double c = 1.0;
    double d = 0.0;
    double a = 0.0;
    double b = 1.0;
    double at = 0.0;
    double tol = 1e-6;
    double step = 1e-5;
    double z_threshold = 3.0;
    double min_pass_fraction = 0.95;
    double init_lambda = 0.5;
    double init_c = 1.0;
    double init_d = 0.0;
    int n = 3;
    int k = 2;
    int points = 41;
    int bins = 20;
    int r = 1;
    long long count = 10000;
    long long replications = 200000;
    unsigned long long seed = 20250825ULL;
    bool dump_config = false;
    bool dist_given = false;
    bool nu_given = false;
    bool lambda_given = false;
    bool c_given = false;
};

std::string config_to_json(const RunConfig& cfg) {
    using qfam::format_double;
    std::string s = "{";
    auto str = [&s](const char* k, const std::string& v) {
        s += std::string("\"") + k + "\":\"" + v + "\",";
    };
    auto num = [&s](const char* k, double v) {
        s += std::string("\"") + k + "\":" + format_double(v) + ",";
    };
    str("command", cfg.command);
    str("dist", cfg.dist);
    str("what", cfg.what);
    num("theorem", cfg.theorem);
    str("equation", cfg.equation);
    str("kind", cfg.kind);
    str("format", cfg.format);
    str("out", cfg.out_path);
    num("nu", cfg.nu);
    num("mu", cfg.mu);
    num("sigma", cfg.sigma);
    num("lambda", cfg.lambda);
    num("c", cfg.c);
    num("d", cfg.d);
    num("a", cfg.a);
    num("b", cfg.b);
    num("at", cfg.at);
    num("tol", cfg.tol);
    num("step", cfg.step);
    num("z_threshold", cfg.z_threshold);
    num("min_pass_fraction", cfg.min_pass_fraction);
    num("init_lambda", cfg.init_lambda);
    num("init_c", cfg.init_c);
    num("init_d", cfg.init_d);
    num("n", cfg.n);
    num("k", cfg.k);
    num("points", cfg.points);
    num("bins", cfg.bins);
    num("r", cfg.r);
    num("count", static_cast<double>(cfg.count));
    num("replications", static_cast<double>(cfg.replications));
    s += "\"seed\":" + std::to_string(cfg.seed) + "}";
    return s;
}

qfam::DistributionModel make_distribution(const RunConfig& cfg) {
    if (cfg.dist == "t") {
        if (!cfg.nu_given) throw std::domain_error("--nu is required for --dist t");
        return qfam::student_t({cfg.nu, cfg.mu, cfg.sigma});
    }
    if (cfg.dist == "z") {
        if (!cfg.nu_given) throw std::domain_error("--nu is required for --dist z");
        return qfam::z_distribution(cfg.nu);
    }
    if (cfg.dist == "qfamily") {
        if (!cfg.lambda_given || !cfg.c_given) {
            throw std::domain_error("--lambda and --c are required for --dist qfamily");
        }
        return qfam::q_family({cfg.lambda, cfg.c, cfg.d});
    }
    if (cfg.dist == "normal") return qfam::normal(cfg.mu, cfg.sigma);
    if (cfg.dist == "uniform") return qfam::uniform(cfg.a, cfg.b);
    if (cfg.dist == "exponential") return qfam::shifted_exponential();
    throw std::domain_error("unknown distribution '" + cfg.dist + "'");
}

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out_path.empty()) {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + cfg.out_path + "'");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string render(const RunConfig& cfg, const qfam::ResidualReport& report) {
    return cfg.format == "csv" ? qfam::to_csv(report) : qfam::to_json(report);
}

int finish_residual(const RunConfig& cfg, const qfam::ResidualReport& report,
                    const char* label) {
    emit(cfg, render(cfg, report));
    std::fprintf(stderr, "%s: max |delta| = %s (tol %s) -> %s\n", label,
                 qfam::format_double(report.max_abs_delta).c_str(),
                 qfam::format_double(report.tol).c_str(), report.passed ? "PASS" : "FAIL");
    return report.passed ? 0 : 1;
}

int run_eval(const RunConfig& cfg) {
    const qfam::DistributionModel dist = make_distribution(cfg);
    double value = 0.0;
    if (cfg.what == "pdf") {
        value = dist.pdf(cfg.at);
    } else if (cfg.what == "cdf") {
        value = dist.cdf(cfg.at);
    } else if (cfg.what == "quantile") {
        value = dist.quantile(cfg.at);
    } else {
        throw std::domain_error("--what must be pdf, cdf, or quantile");
    }
    emit(cfg, qfam::format_double(value) + "\n");
    return 0;
}

int run_sample(const RunConfig& cfg) {
    if (cfg.count < 1) throw std::domain_error("--count must be at least 1");
    const qfam::DistributionModel dist = make_distribution(cfg);
    const std::vector<double> values =
        qfam::sample(dist, static_cast<std::size_t>(cfg.count), cfg.seed);
    emit(cfg, cfg.format == "csv" ? qfam::values_to_csv(values)
                                  : qfam::values_to_json(values));
    return 0;
}

int run_residual_grid(const RunConfig& cfg) {
    const qfam::DistributionModel dist = make_distribution(cfg);
    const std::vector<double> grid = qfam::quantile_grid(dist, cfg.points);
    if (cfg.theorem == 1) {
        const qfam::OrderStatContext ctx{cfg.n, cfg.k, 1};
        return finish_residual(
            cfg, qfam::weighted_spacing_report(dist, cfg.lambda, ctx, grid, cfg.tol),
            "residual-grid[first-moment]");
    }
    if (cfg.theorem != 2) {
        throw std::domain_error("--theorem must be 1 (first moment) or 2 (second moment)");
    }
    if (!cfg.nu_given) {
        throw std::domain_error("--nu is required for the second-moment identity");
    }
    const qfam::OrderStatContext ctx{cfg.n, cfg.k, 2};
    const qfam::SecondMomentReport report =
        qfam::second_moment_report(dist, cfg.nu, ctx, grid, cfg.tol);
    std::fprintf(stderr, "residual-grid[second-moment]: max |delta|/(1+x^2) = %s\n",
                 qfam::format_double(report.max_abs_delta_normalized).c_str());
    return finish_residual(cfg, report.report, "residual-grid[second-moment]");
}

int run_ode_check(const RunConfig& cfg) {
    if (cfg.equation == "quantile-ode") {
        const qfam::DistributionModel dist = make_distribution(cfg);
        const std::vector<double> grid = qfam::quantile_grid(dist, cfg.points);
        return finish_residual(
            cfg, qfam::quantile_ode_report(dist, cfg.lambda, cfg.c, grid, cfg.tol),
            "ode-check[quantile-ode]");
    }
    if (!cfg.nu_given) {
        throw std::domain_error("--nu is required for --check " + cfg.equation);
    }
    if (cfg.equation == "moment-eq") {
        const qfam::DistributionModel dist =
            cfg.dist_given ? make_distribution(cfg) : qfam::z_distribution(cfg.nu);
        const std::vector<double> grid = qfam::quantile_grid(dist, cfg.points);
        return finish_residual(cfg,
                               qfam::moment_equation_report(dist, cfg.nu, grid, cfg.tol),
                               "ode-check[moment-eq]");
    }
    if (cfg.equation == "log-slope") {
        const std::vector<double> grid =
            qfam::quantile_grid(qfam::z_distribution(cfg.nu), cfg.points);
        return finish_residual(cfg, qfam::log_slope_report(cfg.nu, grid, cfg.tol, cfg.step),
                               "ode-check[log-slope]");
    }
    throw std::domain_error("--check must be quantile-ode, moment-eq, or log-slope");
}

int run_mc_verify(const RunConfig& cfg) {
    const qfam::DistributionModel dist = make_distribution(cfg);
    qfam::StatisticKind kind;
    if (cfg.kind == "sample-mean") {
        kind = qfam::StatisticKind::sample_mean();
    } else if (cfg.kind == "below-dev") {
        kind = qfam::StatisticKind::below_avg_deviation(cfg.r);
    } else if (cfg.kind == "above-dev") {
        kind = qfam::StatisticKind::above_avg_deviation(cfg.r);
    } else if (cfg.kind == "weighted") {
        kind = qfam::StatisticKind::weighted_spacing(cfg.lambda);
    } else {
        throw std::domain_error("--kind must be sample-mean, below-dev, above-dev, or weighted");
    }
    const qfam::RegressionEstimate est = qfam::simulate_regression(
        dist, cfg.n, cfg.k, kind, cfg.replications, cfg.seed, cfg.bins);
    const qfam::ComparisonSummary summary =
        qfam::compare_report(est, cfg.z_threshold, cfg.min_pass_fraction);
    emit(cfg, cfg.format == "csv" ? qfam::to_csv(est) : qfam::to_json(est));
    std::fprintf(stderr,
                 "mc-verify: %d of %d interior bins within |z| <= %s (need fraction %s) -> %s\n",
                 summary.passing_bins, summary.interior_bins,
                 qfam::format_double(cfg.z_threshold).c_str(),
                 qfam::format_double(cfg.min_pass_fraction).c_str(),
                 summary.passed ? "PASS" : "FAIL");
    return summary.passed ? 0 : 1;
}

int run_fit_lambda(const RunConfig& cfg) {
    const qfam::DistributionModel target = make_distribution(cfg);
    if (cfg.points < 5) throw std::domain_error("--points must be at least 5 for fitting");
    std::vector<double> grid(cfg.points);
    for (int i = 0; i < cfg.points; ++i) {
        grid[i] = 1e-4 + (1.0 - 2e-4) * i / (cfg.points - 1);
    }
    const qfam::QFamilyParams fitted = qfam::fit_qfamily(
        target, grid, {cfg.init_lambda, cfg.init_c, cfg.init_d});
    double objective = 0.0;
    for (double u : grid) {
        const double diff = qfam::qfam_quantile(fitted, u) - target.quantile(u);
        objective += diff * diff;
    }
    using qfam::format_double;
    if (cfg.format == "csv") {
        emit(cfg, "lambda,c,d,objective\n" + format_double(fitted.lambda) + "," +
                      format_double(fitted.c) + "," + format_double(fitted.d) + "," +
                      format_double(objective) + "\n");
    } else {
        emit(cfg, "{\"lambda\":" + format_double(fitted.lambda) +
                      ",\"c\":" + format_double(fitted.c) +
                      ",\"d\":" + format_double(fitted.d) +
                      ",\"objective\":" + format_double(objective) + "}\n");
    }
    std::fprintf(stderr, "fit-lambda: lambda = %s, c = %s, d = %s, objective = %s\n",
                 format_double(fitted.lambda).c_str(), format_double(fitted.c).c_str(),
                 format_double(fitted.d).c_str(), format_double(objective).c_str());
    return 0;
}

bool option_given(const CLI::App* sub, const std::string& name) {
    const CLI::Option* opt = sub->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"Student-t / quantile-family distribution toolkit"};
    app.require_subcommand(1);

    auto add_common = [&cfg](CLI::App* sub) {
        sub->add_option("--format", cfg.format, "Output format")
            ->check(CLI::IsMember({"json", "csv"}));
        sub->add_option("--out", cfg.out_path, "Write the report to this file");
        sub->add_flag("--dump-config", cfg.dump_config,
                      "Print the full run configuration to stderr");
    };
    auto add_dist = [&cfg](CLI::App* sub) {
        sub->add_option("--dist", cfg.dist, "Distribution family")
            ->check(CLI::IsMember({"t", "z", "qfamily", "normal", "uniform", "exponential"}));
        sub->add_option("--nu", cfg.nu, "Degrees of freedom (t, z)");
        sub->add_option("--mu", cfg.mu, "Location (t, normal)");
        sub->add_option("--sigma", cfg.sigma, "Scale (t, normal)");
        sub->add_option("--lambda", cfg.lambda, "Family asymmetry / identity weight");
        sub->add_option("--c", cfg.c, "Family scale");
        sub->add_option("--d", cfg.d, "Family location");
        sub->add_option("--a", cfg.a, "Uniform lower endpoint");
        sub->add_option("--b", cfg.b, "Uniform upper endpoint");
    };

    CLI::App* eval = app.add_subcommand("eval", "Evaluate pdf, cdf, or quantile at a point");
    add_dist(eval);
    add_common(eval);
    eval->add_option("--what", cfg.what, "Function to evaluate")
        ->check(CLI::IsMember({"pdf", "cdf", "quantile"}));
    eval->add_option("--at", cfg.at, "Evaluation point (x, or u for quantile)")->required();

    CLI::App* samp = app.add_subcommand("sample", "Draw inverse-transform samples");
    add_dist(samp);
    add_common(samp);
    samp->add_option("--count", cfg.count, "Number of draws");
    samp->add_option("--seed", cfg.seed, "Random generator seed");

    CLI::App* grid = app.add_subcommand(
        "residual-grid", "Evaluate a regression-identity residual on the default grid");
    add_dist(grid);
    add_common(grid);
    grid->add_option("--theorem", cfg.theorem,
                     "Identity to check: 1 = first moment, 2 = second moment")
        ->check(CLI::IsMember({1, 2}));
    grid->add_option("--n", cfg.n, "Sample size of the identity");
    grid->add_option("--k", cfg.k, "Conditioning rank");
    grid->add_option("--points", cfg.points, "Grid size");
    grid->add_option("--tol", cfg.tol, "Pass tolerance on max |delta|");

    CLI::App* ode = app.add_subcommand(
        "ode-check", "Check a differential/integrated equation satisfied by the density");
    add_dist(ode);
    add_common(ode);
    ode->add_option("--check", cfg.equation, "Equation to check")
        ->check(CLI::IsMember({"quantile-ode", "moment-eq", "log-slope"}));
    ode->add_option("--points", cfg.points, "Grid size");
    ode->add_option("--tol", cfg.tol, "Pass tolerance on max |delta|");
    ode->add_option("--step", cfg.step, "Finite-difference step for log-slope");

    CLI::App* mc = app.add_subcommand(
        "mc-verify", "Monte Carlo check of a conditional-expectation identity");
    add_dist(mc);
    add_common(mc);
    mc->add_option("--n", cfg.n, "Sample size per replication");
    mc->add_option("--k", cfg.k, "Conditioning rank");
    mc->add_option("--kind", cfg.kind, "Statistic to regress")
        ->check(CLI::IsMember({"sample-mean", "below-dev", "above-dev", "weighted"}));
    mc->add_option("--r", cfg.r, "Deviation moment order (below-dev/above-dev)");
    mc->add_option("--replications", cfg.replications, "Number of simulated samples");
    mc->add_option("--seed", cfg.seed, "Random generator seed");
    mc->add_option("--bins", cfg.bins, "Number of equal-count bins");
    mc->add_option("--z-threshold", cfg.z_threshold, "Per-bin |z| limit");
    mc->add_option("--min-pass-fraction", cfg.min_pass_fraction,
                   "Required fraction of passing interior bins");

    CLI::App* fit = app.add_subcommand(
        "fit-lambda", "Least-squares fit of family parameters to a target quantile");
    add_dist(fit);
    add_common(fit);
    fit->add_option("--points", cfg.points, "Quantile grid size");
    fit->add_option("--init-lambda", cfg.init_lambda, "Initial lambda");
    fit->add_option("--init-c", cfg.init_c, "Initial c");
    fit->add_option("--init-d", cfg.init_d, "Initial d");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    cfg.dist_given = option_given(sub, "--dist");
    cfg.nu_given = option_given(sub, "--nu");
    cfg.lambda_given = option_given(sub, "--lambda");
    cfg.c_given = option_given(sub, "--c");
    if (cfg.dump_config) {
        std::fprintf(stderr, "%s\n", config_to_json(cfg).c_str());
    }

    try {
        if (cfg.command == "eval") return run_eval(cfg);
        if (cfg.command == "sample") return run_sample(cfg);
        if (cfg.command == "residual-grid") return run_residual_grid(cfg);
        if (cfg.command == "ode-check") return run_ode_check(cfg);
        if (cfg.command == "mc-verify") return run_mc_verify(cfg);
        if (cfg.command == "fit-lambda") return run_fit_lambda(cfg);
        std::fprintf(stderr, "error: unknown command '%s'\n", cfg.command.c_str());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
