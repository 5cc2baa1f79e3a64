// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: fit, efficiency, simulate, are, sweep,
// feasible-region. Exit codes: 0 success, 2 validation error, 3 convergence
// failure, 1 anything else. Errors go to stderr as JSON.

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "scalereg/asymptotics.hpp"
#include "scalereg/data_pipeline.hpp"
#include "scalereg/errors.hpp"
#include "scalereg/estimators.hpp"
#include "scalereg/simulation.hpp"
#include "scalereg/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scalereg;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;

struct ConvergenceFailure : Error {
    using Error::Error;
};

// ISO-8601 UTC; SOURCE_DATE_EPOCH (the reproducible-builds convention)
// overrides the clock so seeded runs can be byte-identical.
std::string timestamp() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json envelope(const std::string& command) {
    return {{"artifact", "scalereg"},
            {"version", kVersion},
            {"command", command},
            {"timestamp", timestamp()}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open for writing: " + path.string());
    out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw DomainError("empty numeric list: '" + text + "'");
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (const double v : parse_double_list(text)) out.push_back(static_cast<int>(v));
    return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

json fit_report_entry(const FitResult& fit, const std::vector<std::string>& names) {
    json entry;
    entry["beta_hat"] = std::vector<double>(fit.beta_hat.begin(), fit.beta_hat.end());
    entry["predictors"] = names;
    if (fit.s_hat) entry["s_hat"] = *fit.s_hat;
    if (fit.residual_sd) entry["residual_sd"] = *fit.residual_sd;
    if (!std::isnan(fit.loglik)) entry["loglik"] = fit.loglik;
    entry["converged"] = fit.converged;
    entry["iterations"] = fit.iterations;
    entry["gradient_norm"] = fit.gradient_norm;
    if (fit.asymptotic_cov.size() > 0) {
        std::vector<double> se;
        for (Eigen::Index j = 0; j < fit.asymptotic_cov.rows(); ++j)
            se.push_back(std::sqrt(fit.asymptotic_cov(j, j)));
        entry["asymptotic_se"] = se;  // MLE: beta then s; OLSE: beta only
    }
    return entry;
}

struct PipelineArgs {
    std::string csv;
    int family = 1;
    double gamma = 2.0;
    std::string response;
    std::string predictors;
    std::string excluded;
    std::optional<double> transform_exponent;
    std::uint64_t seed = 0;
    // train/test evaluation (section of the real-data workflow); 0 = off
    std::size_t train_size = 0;
    std::size_t replications = 500;
    // resampling standard errors; 0 = off
    std::size_t resample_subsets = 0;
    std::size_t resample_size = 100;

    TabularSource source() const {
        TabularSource src;
        src.path = csv;
        src.response = response;
        src.predictors = parse_name_list(predictors);
        src.excluded = parse_name_list(excluded);
        src.transform_exponent = transform_exponent;
        return src;
    }
};

void add_pipeline_options(CLI::App* cmd, PipelineArgs& args) {
    cmd->add_option("--csv", args.csv, "input CSV file")->required();
    cmd->add_option("--family", args.family, "noise family (1, 2 or 3)")->required();
    cmd->add_option("--gamma", args.gamma, "shape parameter")->required();
    cmd->add_option("--response", args.response, "response column")->required();
    cmd->add_option("--columns,--predictors", args.predictors,
                    "comma separated predictor columns")
        ->required();
    cmd->add_option("--exclude", args.excluded, "columns that must exist but are unused");
    cmd->add_option_function<double>(
        "--transform-exponent",
        [&args](double v) { args.transform_exponent = v; },
        "power transform for the response (e.g. 0.333... for the cube root)");
    cmd->add_option("--seed", args.seed, "RNG seed for splits and resampling");
    cmd->add_option("--train-size", args.train_size,
                    "run a random train/test evaluation with this train size");
    cmd->add_option("--replications", args.replications,
                    "replications for the train/test evaluation")
        ->capture_default_str();
    cmd->add_option("--resample-subsets", args.resample_subsets,
                    "add resampling standard deviations over this many subsets");
    cmd->add_option("--resample-size", args.resample_size, "resampling subset size")
        ->capture_default_str();
}

int cmd_fit(const PipelineArgs& args, const fs::path& out_dir) {
    const NoiseFamily fam = NoiseFamily::make(args.family, args.gamma);
    if (fam.family == 1 && fam.gamma <= 1.0)
        std::cerr << "warning: family 1 with gamma <= 1 is not twice differentiable at 0; "
                     "asymptotic-normality assumptions do not cover this fit\n";

    const LoadedData loaded = load_and_center(args.source());
    FitResult ols, mle;
    try {
        ols = ols_fit(loaded.dataset);
        mle = mle_fit(loaded.dataset, fam);
    } catch (const SingularDesignError& e) {
        std::string message = e.what();
        const auto constants = constant_predictor_columns(loaded);
        for (std::size_t i = 0; i < constants.size(); ++i)
            message += (i == 0 ? "; constant predictor column(s): " : ", ") + constants[i];
        throw SingularDesignError(message);
    }

    json report = envelope("fit");
    report["input"] = {{"csv", args.csv},
                       {"family", args.family},
                       {"gamma", args.gamma},
                       {"response", args.response},
                       {"predictors", loaded.predictor_names},
                       {"rows_used", loaded.centering.rows_used},
                       {"rows_dropped", loaded.centering.rows_dropped}};
    if (args.transform_exponent) report["input"]["transform_exponent"] = *args.transform_exponent;
    report["centering"] = {
        {"response_mean", loaded.centering.response_mean},
        {"predictor_means",
         std::vector<double>(loaded.centering.predictor_means.begin(),
                             loaded.centering.predictor_means.end())}};
    report["ols"] = fit_report_entry(ols, loaded.predictor_names);
    report["mle"] = fit_report_entry(mle, loaded.predictor_names);
    {
        const Eigen::VectorXd resid = loaded.dataset.response - loaded.dataset.design * mle.beta_hat;
        std::vector<double> sorted(resid.begin(), resid.end());
        std::sort(sorted.begin(), sorted.end());
        const std::size_t n = sorted.size();
        report["mle"]["residual_median"] =
            n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }
    if (args.resample_subsets > 0) {
        const Eigen::VectorXd sd = resample_stddev(loaded.dataset, fam, args.resample_subsets,
                                                   args.resample_size, args.seed);
        report["mle"]["resampling_sd"] = std::vector<double>(sd.begin(), sd.end());
        report["mle"]["resampling"] = {{"subsets", args.resample_subsets},
                                       {"subset_size", args.resample_size},
                                       {"seed", args.seed}};
    }
    if (args.train_size > 0) {
        Rng rng(args.seed, 0x77);
        const TrainTestResult tt = train_test_evaluate(loaded.dataset, fam, args.train_size,
                                                       args.replications, rng);
        json entry = {{"train_size", args.train_size},
                      {"replications", tt.replications},
                      {"mean_mse_ols", tt.mean_mse_ols},
                      {"mean_mse_mle", tt.mean_mse_mle},
                      {"seed", args.seed}};
        if (tt.eta_hat)
            entry["eta_hat"] = *tt.eta_hat;
        else
            entry["eta_hat"] = "undefined";
        report["train_test"] = entry;
    }
    write_json(out_dir / "fit_report.json", report);

    const FitResult& for_residuals = mle.converged ? mle : ols;
    export_residuals(loaded.dataset, for_residuals, (out_dir / "residuals.csv").string());

    if (!mle.converged)
        throw ConvergenceFailure("MLE did not converge (gradient norm " +
                                 std::to_string(mle.gradient_norm) + ")");
    std::cout << "wrote " << (out_dir / "fit_report.json").string() << " and "
              << (out_dir / "residuals.csv").string() << "\n";
    return 0;
}

int cmd_efficiency(int family, const std::vector<double>& grid, const fs::path& out_dir) {
    const EtaCurve curve = eta_curve(family, grid);
    for (const EtaPoint& p : curve.points) {
        if (!p.eta_closed || !p.eta_quadrature) continue;
        if (std::abs(*p.eta_closed - *p.eta_quadrature) > 1e-6)
            throw Error("efficiency oracle mismatch at gamma = " + std::to_string(p.gamma) +
                        ": closed " + std::to_string(*p.eta_closed) + " vs quadrature " +
                        std::to_string(*p.eta_quadrature));
    }
    std::ofstream out(out_dir / "eta_curve.csv");
    if (!out) throw Error("cannot open eta_curve.csv for writing");
    write_eta_curve_csv(curve, out);
    if (curve.argmin_gamma)
        std::cout << "family " << family << ": eta minimized on the grid at gamma = "
                  << *curve.argmin_gamma << "\n";
    return 0;
}

ExperimentConfig config_from_cli(const std::string& config_path, const json& overrides) {
    json merged = json::object();
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw Error("cannot open config: " + config_path);
        in >> merged;
    }
    for (const auto& [key, value] : overrides.items()) merged[key] = value;
    return ExperimentConfig::from_json(merged);
}

int cmd_simulate(const ExperimentConfig& config, const fs::path& out_dir) {
    const BatchResult batch = run_batch(config);

    {
        std::ofstream out(out_dir / "replications.csv");
        if (!out) throw Error("cannot open replications.csv for writing");
        write_replications_csv(batch, out);
    }
    json summary = envelope("simulate");
    summary["summary"] = batch.summary_json();
    write_json(out_dir / "summary.json", summary);

    std::vector<FigureRow> rows;
    append_batch_figure_rows(rows, batch);
    std::ofstream fig(out_dir / "figure_data.csv");
    write_figure_csv(rows, fig);

    std::cout << "ols mean squared distance: " << batch.ols.mean_sq_dist << "\n"
              << "mle mean squared distance: " << batch.mle.mean_sq_dist << "\n";
    return 0;
}

int cmd_are(const ExperimentConfig& config, std::size_t batches, const fs::path& out_dir) {
    const AreReport report = estimate_are(config, batches);
    json j = envelope("are");
    j["config"] = config.to_json();
    j["batches_requested"] = report.batches_requested;
    j["batches_used"] = report.batches_used;
    j["eta_theoretical_closed"] = report.efficiency.eta_closed;
    j["eta_theoretical_quadrature"] = report.efficiency.eta_quadrature;
    if (report.efficiency.eta_empirical) {
        j["eta_empirical_mean"] = *report.efficiency.eta_empirical;
        j["eta_empirical_ci"] = {report.ci_lo, report.ci_hi};
    }
    j["batch_estimates"] = report.batch_estimates;
    j["warnings"] = report.warnings;
    write_json(out_dir / "are_report.json", j);

    std::vector<FigureRow> rows;
    for (const double v : report.batch_estimates)
        rows.push_back({"mle_vs_ols", config.family, config.gamma, config.d, config.n,
                        "eta_hat", v});
    rows.push_back({"theory", config.family, config.gamma, config.d, config.n, "eta",
                    report.efficiency.eta_closed});
    std::ofstream fig(out_dir / "figure_data.csv");
    write_figure_csv(rows, fig);

    if (report.efficiency.eta_empirical)
        std::cout << "eta: theoretical " << report.efficiency.eta_closed << ", empirical "
                  << *report.efficiency.eta_empirical << " [" << report.ci_lo << ", "
                  << report.ci_hi << "]\n";
    return 0;
}

int cmd_sweep(const ExperimentConfig& config, const std::vector<int>& d_list,
              const fs::path& out_dir) {
    const std::vector<SweepRow> rows = dimension_sweep(config, d_list);
    std::ofstream out(out_dir / "sweep.csv");
    if (!out) throw Error("cannot open sweep.csv for writing");
    out << "d,mean_sq_dist_ols,mean_sq_dist_mle\n";
    std::vector<FigureRow> fig_rows;
    for (const SweepRow& r : rows) {
        out << r.d << "," << r.mean_sq_dist_ols << "," << r.mean_sq_dist_mle << "\n";
        fig_rows.push_back({"ols", config.family, config.gamma, r.d, config.n,
                            "mean_sq_dist", r.mean_sq_dist_ols});
        fig_rows.push_back({"mle", config.family, config.gamma, r.d, config.n,
                            "mean_sq_dist", r.mean_sq_dist_mle});
    }
    std::ofstream fig(out_dir / "figure_data.csv");
    write_figure_csv(fig_rows, fig);
    return 0;
}

int cmd_feasible_region(const PipelineArgs& args, const fs::path& out_dir) {
    const NoiseFamily fam = NoiseFamily::make(args.family, args.gamma);
    const LoadedData loaded = load_and_center(args.source());
    const FeasibleRegion region = feasible_region(loaded.dataset, fam);
    const FitResult mle = mle_fit(loaded.dataset, fam);

    json j = envelope("feasible-region");
    j["input"] = {{"csv", args.csv}, {"family", args.family}, {"gamma", args.gamma}};
    j["alpha"] = region.alpha;
    j["r0"] = region.r0;
    j["sigma0"] = region.sigma0;
    j["sigma1"] = region.sigma1;
    j["s_box"] = {region.s_lo(), region.s_hi()};
    j["tail_bound"] = {{"c", region.tail_c}, {"C", region.tail_C}};
    j["mle"] = {{"beta_norm", mle.beta_hat.norm()},
                {"s_hat", *mle.s_hat},
                {"converged", mle.converged},
                {"inside_region", region.contains(mle.beta_hat, *mle.s_hat)}};
    write_json(out_dir / "feasible_region.json", j);
    std::cout << "r0 = " << region.r0 << ", s box = [" << region.s_lo() << ", "
              << region.s_hi() << "]\n";
    return 0;
}

json error_json(const std::string& type, const std::string& message, int code) {
    return {{"error", type}, {"message", message}, {"exit_code", code}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scalereg: joint MLE of regression vector and noise scale for "
                 "scale-family errors, with efficiency analysis"};
    app.require_subcommand(1);
    app.fallthrough();  // app-level options are accepted after the subcommand

    std::string out_dir_flag = ".";
    app.add_option("--out", out_dir_flag, "output directory")->capture_default_str();

    // fit -------------------------------------------------------------
    PipelineArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "fit OLSE and MLE to a CSV dataset");
    add_pipeline_options(fit, fit_args);

    // efficiency --------------------------------------------------------
    CLI::App* eff = app.add_subcommand("efficiency", "tabulate eta over a gamma grid");
    int eff_family = 1;
    std::string eff_grid = "0.75,1,2,3,5,7";
    eff->add_option("--family", eff_family, "noise family")->required();
    eff->add_option("--gamma-grid", eff_grid, "comma separated gamma values")
        ->capture_default_str();

    // simulate / are / sweep ---------------------------------------------
    std::string config_path;
    json overrides = json::object();
    const auto add_config_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option_function<std::size_t>(
            "--n", [&](std::size_t v) { overrides["n"] = v; }, "sample size");
        cmd->add_option_function<int>(
            "--d", [&](int v) { overrides["d"] = v; }, "dimension");
        cmd->add_option_function<int>(
            "--family", [&](int v) { overrides["family"] = v; }, "noise family");
        cmd->add_option_function<double>(
            "--gamma", [&](double v) { overrides["gamma"] = v; }, "shape parameter");
        cmd->add_option_function<std::size_t>(
            "--M,--replications", [&](std::size_t v) { overrides["replications"] = v; },
            "replications per batch");
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { overrides["seed"] = v; }, "RNG seed");
        cmd->add_option_function<int>(
            "--threads", [&](int v) { overrides["threads"] = v; }, "worker threads");
    };
    CLI::App* sim = app.add_subcommand("simulate", "run one Monte-Carlo batch");
    add_config_options(sim);
    CLI::App* are = app.add_subcommand("are", "estimate the asymptotic relative efficiency");
    add_config_options(are);
    std::size_t are_batches = 10;
    are->add_option("--batches", are_batches, "number of batches")->capture_default_str();
    CLI::App* sweep = app.add_subcommand("sweep", "mean squared distance versus dimension");
    add_config_options(sweep);
    std::string sweep_dlist = "3,5,8,10,15";
    sweep->add_option("--d-list", sweep_dlist, "comma separated dimensions")
        ->capture_default_str();

    // feasible-region ----------------------------------------------------
    PipelineArgs region_args;
    CLI::App* region = app.add_subcommand(
        "feasible-region", "existence-theorem box for the MLE on a CSV dataset");
    add_pipeline_options(region, region_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << error_json("cli", e.what(), kExitValidation).dump() << "\n";
        return kExitValidation;
    }

    try {
        const fs::path out_dir(out_dir_flag);
        fs::create_directories(out_dir);
        if (fit->parsed()) return cmd_fit(fit_args, out_dir);
        if (eff->parsed()) return cmd_efficiency(eff_family, parse_double_list(eff_grid), out_dir);
        if (sim->parsed()) return cmd_simulate(config_from_cli(config_path, overrides), out_dir);
        if (are->parsed())
            return cmd_are(config_from_cli(config_path, overrides), are_batches, out_dir);
        if (sweep->parsed())
            return cmd_sweep(config_from_cli(config_path, overrides),
                             parse_int_list(sweep_dlist), out_dir);
        if (region->parsed()) return cmd_feasible_region(region_args, out_dir);
        std::cerr << error_json("cli", "no subcommand", kExitValidation).dump() << "\n";
        return kExitValidation;
    } catch (const ConvergenceFailure& e) {
        std::cerr << error_json("convergence", e.what(), kExitConvergence).dump() << "\n";
        return kExitConvergence;
    } catch (const ParseError& e) {
        std::cerr << error_json("parse", e.what(), kExitValidation).dump() << "\n";
        return kExitValidation;
    } catch (const DomainError& e) {
        std::cerr << error_json("domain", e.what(), kExitValidation).dump() << "\n";
        return kExitValidation;
    } catch (const SingularDesignError& e) {
        std::cerr << error_json("singular_design", e.what(), kExitValidation).dump() << "\n";
        return kExitValidation;
    } catch (const DegenerateDataError& e) {
        std::cerr << error_json("degenerate_data", e.what(), kExitValidation).dump() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << error_json("internal", e.what(), 1).dump() << "\n";
        return 1;
    }
}
