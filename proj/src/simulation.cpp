// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include "scalereg/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "scalereg/errors.hpp"

namespace scalereg {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t s = seed ^ (0xd1342543de82ef95ULL * (salt + 0x51ULL));
    return splitmix64(s);
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double h = p * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
}

// Two-sided 97.5% Student-t quantile, coarse table (exact to three digits
// up to 30 dof, the regime the batch counts live in).
double t_quantile_975(std::size_t dof) {
    static constexpr double kTable[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    };
    if (dof == 0) return std::numeric_limits<double>::quiet_NaN();
    if (dof <= 30) return kTable[dof - 1];
    if (dof <= 40) return 2.021;
    if (dof <= 60) return 2.000;
    if (dof <= 120) return 1.980;
    return 1.960;
}

EstimatorSummary summarize(std::vector<double> distances) {
    EstimatorSummary s;
    if (distances.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        return {nan, nan, nan, nan, nan};
    }
    s.mean_dist = std::accumulate(distances.begin(), distances.end(), 0.0) /
                  static_cast<double>(distances.size());
    s.mean_sq_dist = std::transform_reduce(distances.begin(), distances.end(), 0.0,
                                           std::plus<>(), [](double x) { return x * x; }) /
                     static_cast<double>(distances.size());
    std::sort(distances.begin(), distances.end());
    s.median_dist = quantile_sorted(distances, 0.5);
    s.q25_dist = quantile_sorted(distances, 0.25);
    s.q75_dist = quantile_sorted(distances, 0.75);
    return s;
}

nlohmann::json summary_of(const EstimatorSummary& s) {
    return {{"mean_dist", s.mean_dist},
            {"median_dist", s.median_dist},
            {"q25_dist", s.q25_dist},
            {"q75_dist", s.q75_dist},
            {"mean_sq_dist", s.mean_sq_dist}};
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n == 0) throw DomainError("ExperimentConfig: n must be positive");
    if (d < 1) throw DomainError("ExperimentConfig: d must be >= 1");
    if (n < static_cast<std::size_t>(d) + 1)
        throw DomainError("ExperimentConfig: need n >= d + 1");
    if (replications == 0) throw DomainError("ExperimentConfig: M must be positive");
    noise();  // validates (family, gamma)
    for (const auto& range : {beta_range, mu_x_range, sigma_x_range, s0_range})
        if (!(range[0] <= range[1]))
            throw DomainError("ExperimentConfig: parameter range has lo > hi");
    if (!(s0_range[0] > 0.0))
        throw DomainError("ExperimentConfig: s0 range must be positive");
    if (sigma_x_floor < 0.0)
        throw DomainError("ExperimentConfig: sigma_x_floor must be >= 0");
    if (threads < 0) throw DomainError("ExperimentConfig: threads must be >= 0");
}

nlohmann::json ExperimentConfig::to_json() const {
    return {{"n", n},
            {"d", d},
            {"family", family},
            {"gamma", gamma},
            {"replications", replications},
            {"seed", seed},
            {"beta_range", beta_range},
            {"mu_x_range", mu_x_range},
            {"sigma_x_range", sigma_x_range},
            {"s0_range", s0_range},
            {"sigma_x_floor", sigma_x_floor},
            {"threads", threads}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    static const char* kKnown[] = {"n",          "d",           "family",
                                   "gamma",      "replications", "seed",
                                   "beta_range", "mu_x_range",  "sigma_x_range",
                                   "s0_range",   "sigma_x_floor", "threads"};
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* name : kKnown) known = known || key == name;
        if (!known)
            throw DomainError("ExperimentConfig: unknown key '" + key + "'");
    }
    ExperimentConfig c;
    c.n = j.value("n", c.n);
    c.d = j.value("d", c.d);
    c.family = j.value("family", c.family);
    c.gamma = j.value("gamma", c.gamma);
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    c.beta_range = j.value("beta_range", c.beta_range);
    c.mu_x_range = j.value("mu_x_range", c.mu_x_range);
    c.sigma_x_range = j.value("sigma_x_range", c.sigma_x_range);
    c.s0_range = j.value("s0_range", c.s0_range);
    c.sigma_x_floor = j.value("sigma_x_floor", c.sigma_x_floor);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
}

nlohmann::json DrawnParams::to_json() const {
    return {{"beta0", std::vector<double>(beta0.begin(), beta0.end())},
            {"mu_x", std::vector<double>(mu_x.begin(), mu_x.end())},
            {"sigma_x", std::vector<double>(sigma_x.begin(), sigma_x.end())},
            {"s0", s0}};
}

DrawnParams draw_parameters(const ExperimentConfig& config, Rng& rng) {
    DrawnParams p;
    p.beta0.resize(config.d);
    p.mu_x.resize(config.d);
    p.sigma_x.resize(config.d);
    for (int j = 0; j < config.d; ++j)
        p.beta0(j) = rng.uniform(config.beta_range[0], config.beta_range[1]);
    for (int j = 0; j < config.d; ++j)
        p.mu_x(j) = rng.uniform(config.mu_x_range[0], config.mu_x_range[1]);
    for (int j = 0; j < config.d; ++j)
        p.sigma_x(j) = std::max(config.sigma_x_floor,
                                rng.uniform(config.sigma_x_range[0], config.sigma_x_range[1]));
    p.s0 = rng.uniform(config.s0_range[0], config.s0_range[1]);
    return p;
}

Dataset generate_dataset(const ExperimentConfig& config, const DrawnParams& params,
                         Rng& rng) {
    const auto n = static_cast<Eigen::Index>(config.n);
    const int d = config.d;
    Eigen::MatrixXd design(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j)
            design(i, j) = params.mu_x(j) + params.sigma_x(j) * rng.normal();

    const ScaledNoise noise = ScaledNoise::make(config.noise(), params.s0);
    Eigen::VectorXd response = design * params.beta0;
    for (Eigen::Index i = 0; i < n; ++i) response(i) += noise.sample_one(rng);
    return Dataset::make(std::move(design), std::move(response));
}

BatchResult run_batch(const ExperimentConfig& config) {
    config.validate();
    const std::size_t m = config.replications;

    BatchResult batch;
    batch.config = config;
    Rng param_rng(config.seed, 0);
    batch.params = draw_parameters(config, param_rng);
    batch.records.resize(m);

    const NoiseFamily fam = config.noise();
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= m) return;
            ReplicationRecord& rec = batch.records[i];
            rec.rep_index = i;
            // Stream 1+i: stream 0 is reserved for the parameter draw.
            Rng rng(config.seed, 1 + i);
            try {
                const Dataset data = generate_dataset(config, batch.params, rng);
                const FitResult ols = ols_fit(data);
                const FitResult mle = mle_fit(data, fam);
                rec.beta_ols = ols.beta_hat;
                rec.beta_mle = mle.beta_hat;
                rec.s_mle = *mle.s_hat;
                rec.dist_ols = (ols.beta_hat - batch.params.beta0).norm();
                rec.dist_mle = (mle.beta_hat - batch.params.beta0).norm();
                rec.converged = mle.converged;
            } catch (const std::exception& e) {
                rec.failed = true;
                rec.error = e.what();
            }
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned requested = config.threads > 0 ? static_cast<unsigned>(config.threads) : hw;
    const unsigned workers =
        std::max(1u, std::min<unsigned>(requested, static_cast<unsigned>(m)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<double> dist_ols, dist_mle;
    std::size_t converged_count = 0;
    for (const ReplicationRecord& rec : batch.records) {
        if (rec.failed) {
            ++batch.failures;
            continue;
        }
        dist_ols.push_back(rec.dist_ols);
        dist_mle.push_back(rec.dist_mle);
        if (rec.converged) ++converged_count;
    }
    if (batch.failures * 5 > m)
        throw Error("run_batch: more than 20% of replications failed (" +
                    std::to_string(batch.failures) + "/" + std::to_string(m) + ")");

    batch.ols = summarize(std::move(dist_ols));
    batch.mle = summarize(std::move(dist_mle));
    batch.convergence_rate = static_cast<double>(converged_count) / static_cast<double>(m);
    return batch;
}

nlohmann::json BatchResult::summary_json() const {
    return {{"config", config.to_json()},
            {"drawn_params", params.to_json()},
            {"ols", summary_of(ols)},
            {"mle", summary_of(mle)},
            {"convergence_rate", convergence_rate},
            {"failures", failures}};
}

AreReport estimate_are(const ExperimentConfig& config, std::size_t batches) {
    config.validate();
    if (batches == 0) throw DomainError("estimate_are: need at least one batch");
    if (config.replications < static_cast<std::size_t>(config.d) + 2)
        throw DomainError("estimate_are: need M >= d + 2 for nonsingular covariances");

    AreReport report;
    report.batches_requested = batches;
    const NoiseFamily fam = config.noise();
    report.efficiency.family = fam;
    report.efficiency.eta_closed = eta_closed_form(fam);
    report.efficiency.eta_quadrature = eta_quadrature_oracle(fam);
    report.efficiency.replications = config.replications;

    for (std::size_t b = 0; b < batches; ++b) {
        ExperimentConfig cfg = config;
        cfg.seed = derive_seed(config.seed, b);
        const BatchResult batch = run_batch(cfg);

        std::size_t ok = 0;
        for (const auto& rec : batch.records)
            if (!rec.failed) ++ok;
        if (ok < static_cast<std::size_t>(config.d) + 2) {
            report.warnings.push_back("batch " + std::to_string(b) +
                                      " skipped: too few successful replications");
            continue;
        }
        Eigen::MatrixXd est_ols(ok, config.d), est_mle(ok, config.d);
        Eigen::Index row = 0;
        for (const auto& rec : batch.records) {
            if (rec.failed) continue;
            est_ols.row(row) = rec.beta_ols.transpose();
            est_mle.row(row) = rec.beta_mle.transpose();
            ++row;
        }
        const auto sample_cov = [](const Eigen::MatrixXd& est) {
            const Eigen::MatrixXd centered = est.rowwise() - est.colwise().mean();
            return Eigen::MatrixXd(centered.transpose() * centered /
                                   static_cast<double>(est.rows() - 1));
        };
        const double det_mle = sample_cov(est_mle).determinant();
        const double det_ols = sample_cov(est_ols).determinant();
        if (!(det_mle > 0.0) || !(det_ols > 0.0)) {
            report.warnings.push_back("batch " + std::to_string(b) +
                                      " skipped: singular sample covariance");
            continue;
        }
        report.batch_estimates.push_back(
            std::pow(det_mle / det_ols, 1.0 / static_cast<double>(config.d)));
    }

    report.batches_used = report.batch_estimates.size();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (report.batches_used == 0) {
        report.ci_lo = report.ci_hi = nan;
        return report;
    }
    const double mean =
        std::accumulate(report.batch_estimates.begin(), report.batch_estimates.end(), 0.0) /
        static_cast<double>(report.batches_used);
    report.efficiency.eta_empirical = mean;
    if (report.batches_used >= 2) {
        double ss = 0.0;
        for (const double v : report.batch_estimates) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / static_cast<double>(report.batches_used - 1));
        const double half = t_quantile_975(report.batches_used - 1) * sd /
                            std::sqrt(static_cast<double>(report.batches_used));
        report.ci_lo = mean - half;
        report.ci_hi = mean + half;
    } else {
        report.ci_lo = report.ci_hi = nan;
    }
    return report;
}

std::vector<SweepRow> dimension_sweep(const ExperimentConfig& base,
                                      const std::vector<int>& d_list) {
    std::vector<SweepRow> rows;
    rows.reserve(d_list.size());
    for (const int d : d_list) {
        ExperimentConfig cfg = base;
        cfg.d = d;
        cfg.seed = derive_seed(base.seed, 0x0d000000ULL + static_cast<std::uint64_t>(d));
        const BatchResult batch = run_batch(cfg);
        rows.push_back({d, batch.ols.mean_sq_dist, batch.mle.mean_sq_dist});
    }
    return rows;
}

Eigen::VectorXd resample_stddev(const Dataset& data, const NoiseFamily& fam,
                                std::size_t subsets, std::size_t subset_size,
                                std::uint64_t seed, bool with_replacement) {
    const auto n = static_cast<std::size_t>(data.n());
    const auto d = static_cast<std::size_t>(data.dim());
    if (subsets == 0) throw DomainError("resample_stddev: need at least one subset");
    if (subset_size <= d + 1)
        throw DomainError("resample_stddev: subset size must exceed d + 1");
    if (!with_replacement && subset_size > n)
        throw DomainError("resample_stddev: subset size exceeds the sample size");

    Eigen::MatrixXd estimates(subsets, d + 1);
    std::vector<std::size_t> indices(n);
    for (std::size_t k = 0; k < subsets; ++k) {
        Rng rng(seed, 1 + k);
        bool fitted = false;
        for (int attempt = 0; attempt < 100 && !fitted; ++attempt) {
            if (with_replacement) {
                if (indices.size() != subset_size) indices.resize(subset_size);
                for (std::size_t i = 0; i < subset_size; ++i) indices[i] = rng.below(n);
            } else {
                indices.resize(n);
                std::iota(indices.begin(), indices.end(), 0);
                // Partial Fisher-Yates: the first subset_size entries are a
                // uniform draw without replacement.
                for (std::size_t i = 0; i < subset_size; ++i)
                    std::swap(indices[i], indices[i + rng.below(n - i)]);
            }
            Eigen::MatrixXd x(subset_size, d);
            Eigen::VectorXd y(subset_size);
            for (std::size_t i = 0; i < subset_size; ++i) {
                x.row(i) = data.design.row(static_cast<Eigen::Index>(indices[i]));
                y(i) = data.response(static_cast<Eigen::Index>(indices[i]));
            }
            try {
                const FitResult fit =
                    mle_fit(Dataset::make(std::move(x), std::move(y), data.centered), fam);
                estimates.row(k).head(d) = fit.beta_hat.transpose();
                estimates(k, d) = *fit.s_hat;
                fitted = true;
            } catch (const SingularDesignError&) {
                // rank-deficient subset: redraw
            }
        }
        if (!fitted)
            throw SingularDesignError(
                "resample_stddev: could not draw a full-rank subset in 100 attempts");
    }

    if (subsets == 1) return Eigen::VectorXd::Zero(d + 1);
    const Eigen::RowVectorXd mean = estimates.colwise().mean();
    Eigen::VectorXd sd(d + 1);
    for (std::size_t j = 0; j <= d; ++j) {
        const double ss = (estimates.col(j).array() - mean(j)).square().sum();
        sd(j) = std::sqrt(ss / static_cast<double>(subsets - 1));
    }
    return sd;
}

void write_replications_csv(const BatchResult& batch, std::ostream& os) {
    const int d = batch.config.d;
    os << "rep,failed,converged,dist_ols,dist_mle,s_mle";
    for (int j = 0; j < d; ++j) os << ",beta_ols_" << j;
    for (int j = 0; j < d; ++j) os << ",beta_mle_" << j;
    os << "\n";
    char buf[64];
    const auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), ",%.17g", v);
        os << buf;
    };
    for (const ReplicationRecord& rec : batch.records) {
        os << rec.rep_index << "," << (rec.failed ? 1 : 0) << ","
           << (rec.converged ? 1 : 0);
        if (rec.failed) {
            for (int j = 0; j < 3 + 2 * d; ++j) os << ",";
            os << "\n";
            continue;
        }
        put(rec.dist_ols);
        put(rec.dist_mle);
        put(rec.s_mle);
        for (int j = 0; j < d; ++j) put(rec.beta_ols(j));
        for (int j = 0; j < d; ++j) put(rec.beta_mle(j));
        os << "\n";
    }
}

void append_batch_figure_rows(std::vector<FigureRow>& rows, const BatchResult& batch) {
    const auto add = [&](const char* estimator, const char* metric, double value) {
        rows.push_back({estimator, batch.config.family, batch.config.gamma, batch.config.d,
                        batch.config.n, metric, value});
    };
    add("ols", "mean_dist", batch.ols.mean_dist);
    add("ols", "median_dist", batch.ols.median_dist);
    add("ols", "mean_sq_dist", batch.ols.mean_sq_dist);
    add("mle", "mean_dist", batch.mle.mean_dist);
    add("mle", "median_dist", batch.mle.median_dist);
    add("mle", "mean_sq_dist", batch.mle.mean_sq_dist);
}

void write_figure_csv(const std::vector<FigureRow>& rows, std::ostream& os) {
    os << "estimator,family,gamma,d,n,metric,value\n";
    char buf[64];
    for (const FigureRow& r : rows) {
        os << r.estimator << "," << r.family << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.gamma);
        os << buf << "," << r.d << "," << r.n << "," << r.metric << ",";
        std::snprintf(buf, sizeof(buf), "%.17g", r.value);
        os << buf << "\n";
    }
}

}  // namespace scalereg
