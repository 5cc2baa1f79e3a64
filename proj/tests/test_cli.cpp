// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

// End-to-end checks of the CLI contract: exit codes, output files, and
// seeded reproducibility. Each test drives the real binary in a scratch
// directory.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include <doctest.h>
#include <json.hpp>

#include "scalereg/csv.hpp"
#include "scalereg/data_pipeline.hpp"
#include "scalereg/simulation.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("scalereg_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& dir, std::string* err_out = nullptr) {
    const fs::path err_file = dir / "stderr.txt";
    const std::string cmd = std::string("SOURCE_DATE_EPOCH=0 ") + SCALEREG_CLI_PATH + " " +
                            args + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    if (err_out) {
        std::ifstream in(err_file);
        std::stringstream ss;
        ss << in.rdbuf();
        *err_out = ss.str();
    }
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fixture(const char* name) { return fs::path(SCALEREG_FIXTURE_DIR) / name; }

void write_synthetic_csv(const fs::path& p, std::uint64_t seed, std::size_t n, int d,
                         int family, double gamma) {
    auto td = scalereg::test::make_test_data(seed, n, d, family, gamma);
    std::ofstream out(p);
    scalereg::write_dataset_csv(td.data, out);
}

}  // namespace

TEST_CASE("cli: fit produces a report and residuals, Gaussian collapse holds") {
    TempDir dir;
    const fs::path csv = dir.path / "data.csv";
    write_synthetic_csv(csv, 91, 400, 2, 1, 2.0);

    std::string err;
    const int code = run_cli("--out " + dir.path.string() + " fit --csv " + csv.string() +
                                 " --family 1 --gamma 2 --response y --predictors x0,x1",
                             dir.path, &err);
    REQUIRE(code == 0);

    const json report = json::parse(slurp(dir.path / "fit_report.json"));
    CHECK(report["artifact"] == "scalereg");
    CHECK(report["mle"]["converged"] == true);
    const auto beta_mle = report["mle"]["beta_hat"].get<std::vector<double>>();
    const auto beta_ols = report["ols"]["beta_hat"].get<std::vector<double>>();
    for (std::size_t j = 0; j < beta_mle.size(); ++j)
        CHECK(beta_mle[j] == doctest::Approx(beta_ols[j]).epsilon(1e-6));

    const auto residuals = scalereg::read_csv((dir.path / "residuals.csv").string());
    CHECK(residuals.rows.size() == 400);
}

TEST_CASE("cli: missing column exits 2 and names the column") {
    TempDir dir;
    const fs::path csv = dir.path / "data.csv";
    write_synthetic_csv(csv, 92, 100, 2, 1, 2.0);
    std::string err;
    const int code = run_cli("--out " + dir.path.string() + " fit --csv " + csv.string() +
                                 " --family 1 --gamma 2 --response y --predictors x0,nope",
                             dir.path, &err);
    CHECK(code == 2);
    CHECK(err.find("nope") != std::string::npos);
    CHECK(json::parse(err)["exit_code"] == 2);
}

TEST_CASE("cli: efficiency table contains the pinned family-2 value") {
    TempDir dir;
    const int code = run_cli("--out " + dir.path.string() +
                                 " efficiency --family 2 --gamma-grid 2.5,3,5",
                             dir.path);
    REQUIRE(code == 0);
    const auto table = scalereg::read_csv((dir.path / "eta_curve.csv").string());
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[1][0] == 3.0);
    CHECK(table.rows[1][1] == doctest::Approx(1.0 / 12.0).epsilon(1e-9));
    CHECK(std::abs(table.rows[1][1] - table.rows[1][2]) <= 1e-6);
}

TEST_CASE("cli: efficiency grid containing the Gaussian point yields (2, 1, 1)") {
    TempDir dir;
    const int code = run_cli("--out " + dir.path.string() +
                                 " efficiency --family 1 --gamma-grid 1,2,3",
                             dir.path);
    REQUIRE(code == 0);
    const auto table = scalereg::read_csv((dir.path / "eta_curve.csv").string());
    CHECK(table.rows[1][0] == 2.0);
    CHECK(table.rows[1][1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(table.rows[1][2] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("cli: out-of-domain efficiency rows are nan but exit 0") {
    TempDir dir;
    const int code = run_cli("--out " + dir.path.string() +
                                 " efficiency --family 3 --gamma-grid 1.5,3",
                             dir.path);
    REQUIRE(code == 0);
    const std::string text = slurp(dir.path / "eta_curve.csv");
    CHECK(text.find("nan") != std::string::npos);
}

TEST_CASE("cli: simulate is byte-reproducible under a fixed seed") {
    TempDir dir1, dir2;
    const std::string config = " simulate --n 200 --d 2 --family 1 --gamma 3 --M 10 --seed 7";
    REQUIRE(run_cli("--out " + dir1.path.string() + config, dir1.path) == 0);
    REQUIRE(run_cli("--out " + dir2.path.string() + config, dir2.path) == 0);
    CHECK(slurp(dir1.path / "summary.json") == slurp(dir2.path / "summary.json"));
    CHECK(slurp(dir1.path / "replications.csv") == slurp(dir2.path / "replications.csv"));
    CHECK(slurp(dir1.path / "figure_data.csv") == slurp(dir2.path / "figure_data.csv"));

    const json summary = json::parse(slurp(dir1.path / "summary.json"));
    CHECK(summary["summary"]["config"]["seed"] == 7);
    CHECK(summary["summary"]["drawn_params"].contains("beta0"));
}

TEST_CASE("cli: zero replications is a validation error") {
    TempDir dir;
    std::string err;
    const int code = run_cli("--out " + dir.path.string() +
                                 " simulate --n 100 --d 2 --M 0 --seed 1",
                             dir.path, &err);
    CHECK(code == 2);
}

TEST_CASE("cli: config file with flag overrides") {
    TempDir dir;
    const fs::path config = dir.path / "config.json";
    {
        std::ofstream out(config);
        out << R"({"n": 150, "d": 2, "family": 1, "gamma": 2.0, "replications": 8, "seed": 3})";
    }
    REQUIRE(run_cli("--out " + dir.path.string() + " simulate --config " + config.string() +
                        " --gamma 3 --threads 2",
                    dir.path) == 0);
    const json summary = json::parse(slurp(dir.path / "summary.json"));
    CHECK(summary["summary"]["config"]["gamma"] == 3.0);  // flag wins
    CHECK(summary["summary"]["config"]["n"] == 150);
    CHECK(summary["summary"]["config"]["threads"] == 2);
}

TEST_CASE("cli: are report carries theory, estimate and interval") {
    TempDir dir;
    REQUIRE(run_cli("--out " + dir.path.string() +
                        " are --n 150 --d 2 --family 1 --gamma 2 --M 12 --seed 5 --batches 3",
                    dir.path) == 0);
    const json report = json::parse(slurp(dir.path / "are_report.json"));
    CHECK(report["eta_theoretical_closed"] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report["batch_estimates"].size() == 3);
    CHECK(report.contains("eta_empirical_mean"));
    CHECK(report.contains("eta_empirical_ci"));
}

TEST_CASE("cli: sweep writes one row per dimension") {
    TempDir dir;
    REQUIRE(run_cli("--out " + dir.path.string() +
                        " sweep --n 120 --family 1 --gamma 2 --M 6 --seed 2 --d-list 2,3",
                    dir.path) == 0);
    const auto table = scalereg::read_csv((dir.path / "sweep.csv").string());
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0][0] == 2.0);
    CHECK(table.rows[1][0] == 3.0);
}

TEST_CASE("cli: feasible region on the frozen fixture is finite and positive") {
    TempDir dir;
    REQUIRE(run_cli("--out " + dir.path.string() + " feasible-region --csv " +
                        fixture("synthetic_fam1_g3.csv").string() +
                        " --family 1 --gamma 3 --response y --predictors x0,x1",
                    dir.path) == 0);
    const json report = json::parse(slurp(dir.path / "feasible_region.json"));
    CHECK(report["r0"].get<double>() > 0.0);
    CHECK(report["sigma0"].get<double>() > 0.0);
    CHECK(report["sigma1"].get<double>() > 0.0);
    CHECK(report["mle"]["inside_region"] == true);
}

TEST_CASE("cli: fit with train/test evaluation and resampling standard errors") {
    TempDir dir;
    const fs::path csv = dir.path / "data.csv";
    write_synthetic_csv(csv, 93, 300, 2, 1, 3.0);
    REQUIRE(run_cli("--out " + dir.path.string() + " fit --csv " + csv.string() +
                        " --family 1 --gamma 3 --response y --predictors x0,x1" +
                        " --seed 4 --train-size 150 --replications 40" +
                        " --resample-subsets 12 --resample-size 80",
                    dir.path) == 0);
    const json report = json::parse(slurp(dir.path / "fit_report.json"));
    CHECK(report["train_test"]["replications"] == 40);
    CHECK(report["train_test"].contains("eta_hat"));
    CHECK(report["train_test"]["mean_mse_ols"].get<double>() > 0.0);
    const auto sd = report["mle"]["resampling_sd"].get<std::vector<double>>();
    REQUIRE(sd.size() == 3);  // two coefficients plus the scale
    for (const double v : sd) CHECK(v > 0.0);
}

TEST_CASE("cli: fit on the frozen fixture recovers the generating beta") {
    TempDir dir;
    REQUIRE(run_cli("--out " + dir.path.string() + " fit --csv " +
                        fixture("synthetic_fam1_g3.csv").string() +
                        " --family 1 --gamma 3 --response y --predictors x0,x1",
                    dir.path) == 0);
    const json report = json::parse(slurp(dir.path / "fit_report.json"));
    const json meta = json::parse(slurp(fixture("synthetic_fam1_g3.meta.json")));
    const auto beta = report["mle"]["beta_hat"].get<std::vector<double>>();
    const auto se = report["mle"]["asymptotic_se"].get<std::vector<double>>();
    const auto beta0 = meta["beta0"].get<std::vector<double>>();
    REQUIRE(beta.size() == beta0.size());
    for (std::size_t j = 0; j < beta.size(); ++j)
        CHECK(std::abs(beta[j] - beta0[j]) <= 3.0 * se[j]);
}
