// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#include "scalereg/estimators.hpp"

#include <cmath>
#include <limits>

#include "scalereg/asymptotics.hpp"
#include "scalereg/errors.hpp"
#include "scalereg/kernels/likelihood.hpp"
#include "scalereg/rng.hpp"

namespace scalereg {

namespace {

// Likelihood evaluation workspace shared by the objective/gradient calls of
// one fit, so the optimizer does not allocate per iteration.
struct LikelihoodProblem {
    const Dataset& data;
    kernels::FamilyParams params;
    Eigen::VectorXd resid;
    Eigen::VectorXd psi;

    LikelihoodProblem(const Dataset& d, const NoiseFamily& fam)
        : data(d), params(fam.kernel_params()), resid(d.n()), psi(d.n()) {}

    // x = (beta, log s)
    double value(const Eigen::VectorXd& x) {
        const auto d = data.dim();
        const double log_s = x(d);
        const double s = std::exp(log_s);
        resid.noalias() = data.response - data.design * x.head(d);
        const double sum = kernels::neg_logf_sum(params, resid.data(),
                                                 static_cast<std::size_t>(resid.size()),
                                                 1.0 / s);
        return static_cast<double>(data.n()) * log_s + sum;
    }

    double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        const auto d = data.dim();
        const double log_s = x(d);
        const double s = std::exp(log_s);
        resid.noalias() = data.response - data.design * x.head(d);
        const auto sums = kernels::score_sums(params, resid.data(),
                                              static_cast<std::size_t>(resid.size()),
                                              1.0 / s, psi.data());
        grad.head(d).noalias() = data.design.transpose() * psi / s;
        grad(d) = static_cast<double>(data.n()) + sums.psi_dot_t;
        return static_cast<double>(data.n()) * log_s + sums.neg_logf;
    }
};

Eigen::MatrixXd gram_inverse(const Eigen::MatrixXd& design) {
    const Eigen::MatrixXd gram = design.transpose() * design;
    return gram.ldlt().solve(Eigen::MatrixXd::Identity(design.cols(), design.cols()));
}

struct BfgsOutcome {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd grad;
    int iterations = 0;
    bool converged = false;
};

BfgsOutcome run_bfgs(LikelihoodProblem& problem, const Eigen::VectorXd& x0,
                     const OptimizerSettings& options) {
    const auto m = x0.size();
    BfgsOutcome out;
    out.x = x0;
    out.grad.resize(m);
    out.f = problem.value_and_gradient(out.x, out.grad);
    if (options.objective_trace) options.objective_trace->push_back(out.f);
    Eigen::MatrixXd hinv =
        Eigen::MatrixXd::Identity(m, m) * (1.0 / (1.0 + std::abs(out.f)));

    const auto converged_at = [&options](double fval, const Eigen::VectorXd& g) {
        return g.lpNorm<Eigen::Infinity>() <=
               options.gradient_tolerance * (1.0 + std::abs(fval));
    };

    out.converged = converged_at(out.f, out.grad);
    bool first_update = true;
    Eigen::VectorXd grad_new(m);

    while (!out.converged && out.iterations < options.max_iterations) {
        Eigen::VectorXd p = -(hinv * out.grad);
        double slope = out.grad.dot(p);
        if (!(slope < 0.0) || !p.allFinite()) {
            hinv = Eigen::MatrixXd::Identity(m, m) * (1.0 / (1.0 + std::abs(out.f)));
            p = -(hinv * out.grad);
            slope = out.grad.dot(p);
            if (!(slope < 0.0)) break;
        }

        // Armijo backtracking; non-finite objectives (families 2-3 have -inf
        // likelihood directions) just shrink the step.
        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new;
        for (int h = 0; h <= options.max_step_halvings; ++h) {
            x_new = out.x + step * p;
            const double f_try = problem.value(x_new);
            if (std::isfinite(f_try) && f_try <= out.f + options.armijo_c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        const double f_new = problem.value_and_gradient(x_new, grad_new);
        const Eigen::VectorXd s = x_new - out.x;
        const Eigen::VectorXd yv = grad_new - out.grad;
        const double sy = s.dot(yv);
        if (sy > 0.0 && yv.allFinite()) {
            if (first_update) {
                hinv *= sy / yv.squaredNorm() * (1.0 + std::abs(out.f));
                first_update = false;
            }
            if (sy > 1e-12 * s.norm() * yv.norm()) {
                const double rho = 1.0 / sy;
                const Eigen::VectorXd hy = hinv * yv;
                hinv -= rho * (s * hy.transpose() + hy * s.transpose());
                hinv += (rho * rho * yv.dot(hy) + rho) * (s * s.transpose());
            }
        }

        out.x = x_new;
        out.f = f_new;
        out.grad = grad_new;
        if (options.objective_trace) options.objective_trace->push_back(out.f);
        ++out.iterations;
        out.converged = converged_at(out.f, out.grad);
    }
    return out;
}

// Families whose score blows up at zero residuals: the exact likelihood
// surface is pocked with near-singular spikes, and a quasi-Newton path from
// the OLSE routinely stalls in a poor local maximum. Optimizing with a
// coarse residual clamp first (which plateaus the spikes) and tightening it
// in stages walks the iterate into the right basin before the exact
// objective is polished.
bool needs_clamp_continuation(const NoiseFamily& fam) {
    if (fam.family == 1) return fam.gamma < 1.0;
    return fam.gamma > 1.0;
}

}  // namespace

FitResult ols_fit(const Dataset& data) {
    data.require_full_rank();
    const auto n = data.n();
    const auto d = data.dim();

    FitResult result;
    result.beta_hat = data.design.colPivHouseholderQr().solve(data.response);
    const Eigen::VectorXd resid = data.response - data.design * result.beta_hat;
    const double sigma2 = resid.squaredNorm() / static_cast<double>(n - d);
    result.residual_sd = std::sqrt(sigma2);
    result.loglik = std::numeric_limits<double>::quiet_NaN();
    result.converged = true;
    result.asymptotic_cov = sigma2 * gram_inverse(data.design);
    return result;
}

double negative_loglik(const Dataset& data, const NoiseFamily& fam,
                       const Eigen::VectorXd& beta, double log_s) {
    if (beta.size() != data.dim())
        throw DomainError("negative_loglik: beta has wrong dimension");
    LikelihoodProblem problem(data, fam);
    Eigen::VectorXd x(data.dim() + 1);
    x << beta, log_s;
    return problem.value(x);
}

Eigen::VectorXd negative_loglik_gradient(const Dataset& data, const NoiseFamily& fam,
                                         const Eigen::VectorXd& beta, double log_s) {
    if (beta.size() != data.dim())
        throw DomainError("negative_loglik_gradient: beta has wrong dimension");
    LikelihoodProblem problem(data, fam);
    Eigen::VectorXd x(data.dim() + 1);
    x << beta, log_s;
    Eigen::VectorXd grad(data.dim() + 1);
    problem.value_and_gradient(x, grad);
    return grad;
}

FitResult mle_fit(const Dataset& data, const NoiseFamily& fam,
                  const OptimizerSettings& options) {
    fam.validate();
    data.require_full_rank();
    const auto n = data.n();
    const auto d = data.dim();
    const auto m = d + 1;

    const FitResult ols = ols_fit(data);
    const Eigen::VectorXd ols_resid = data.response - data.design * ols.beta_hat;
    const double y_scale = std::max(1.0, data.response.cwiseAbs().maxCoeff());
    if (ols_resid.cwiseAbs().maxCoeff() <= 1e-14 * y_scale)
        throw DegenerateDataError(
            "mle_fit: residuals vanish (exact linear fit), the likelihood is unbounded");

    LikelihoodProblem problem(data, fam);
    const double exact_clamp = problem.params.min_abs_t;
    Eigen::VectorXd x0(m);
    x0 << ols.beta_hat, std::log(*ols.residual_sd);

    Eigen::VectorXd x = x0;
    int stage_iterations = 0;
    if (needs_clamp_continuation(fam)) {
        OptimizerSettings coarse = options;
        coarse.gradient_tolerance = std::max(1e-6, options.gradient_tolerance);
        coarse.objective_trace = nullptr;  // the trace reports the exact objective only
        for (const double clamp : {5e-2, 5e-4}) {
            if (clamp <= exact_clamp) continue;
            problem.params.min_abs_t = clamp;
            const BfgsOutcome stage = run_bfgs(problem, x, coarse);
            x = stage.x;
            stage_iterations += stage.iterations;
        }
        problem.params.min_abs_t = exact_clamp;
        // safeguard: never start the exact polish above the initialization
        if (!(problem.value(x) <= problem.value(x0))) x = x0;
    }

    const BfgsOutcome final_stage = run_bfgs(problem, x, options);

    FitResult result;
    result.beta_hat = final_stage.x.head(d);
    result.s_hat = std::exp(final_stage.x(d));
    result.loglik = -final_stage.f;
    result.converged = final_stage.converged;
    result.iterations = stage_iterations + final_stage.iterations;
    result.gradient_norm = final_stage.grad.lpNorm<Eigen::Infinity>();
    try {
        const Eigen::MatrixXd xxt =
            data.design.transpose() * data.design / static_cast<double>(n);
        const FisherBlocks blocks = fisher_blocks(fam, *result.s_hat, xxt);
        result.asymptotic_cov = mle_asymptotic_cov(blocks, static_cast<std::size_t>(n));
    } catch (const EfficiencyUndefinedError&) {
        // gamma outside the Fisher domain: estimates are fine, no covariance.
    } catch (const QuadratureError&) {
        // score integrals did not converge (gamma hugging the domain edge)
    }
    return result;
}

double default_tail_exponent(const NoiseFamily& fam) {
    return fam.family == 2 ? 1.0 : fam.gamma;
}

namespace {

struct TailBound {
    double c;  // exponential coefficient
    double C;  // prefactor
};

// Constants of the bound f(t) <= C exp(-c |t|^alpha) for the standardized
// density. The |t|^(gamma-1) factor of families 2 and 3 is absorbed by
// halving the exponential coefficient, which keeps the bound exact.
TailBound tail_bound(const NoiseFamily& fam, double alpha) {
    const auto k = fam.constants();
    const double g = fam.gamma;
    switch (fam.family) {
        case 1:
            if (alpha != g)
                throw DomainError("feasible_region: family 1 requires alpha = gamma");
            return {k.c, k.d};
        case 2:
            if (alpha != 1.0)
                throw DomainError("feasible_region: family 2 requires alpha = 1");
            if (g == 1.0) return {k.c, k.d};
            return {0.5 * k.c,
                    k.d * std::pow(2.0 * (g - 1.0) / (k.c * M_E), g - 1.0)};
        default:
            if (alpha != g)
                throw DomainError("feasible_region: family 3 requires alpha = gamma");
            if (g == 1.0) return {k.c, k.d};
            return {0.5 * k.c,
                    k.d * std::pow(2.0 * (g - 1.0) / (g * k.c * M_E), (g - 1.0) / g)};
    }
}

double sup_density(const NoiseFamily& fam) {
    const auto k = fam.constants();
    const double g = fam.gamma;
    if (fam.family == 1 || g == 1.0) return k.d;
    if (fam.family == 2) return k.d * std::pow((g - 1.0) / (k.c * M_E), g - 1.0);
    return k.d * std::pow((g - 1.0) / (g * k.c * M_E), (g - 1.0) / g);
}

// min over the unit sphere of (1/n) sum_i |u' x_i|^alpha. Exact eigenvalue
// computation for alpha = 2, multi-start projected gradient otherwise.
double sphere_min_power(const Eigen::MatrixXd& design, double alpha) {
    const auto n = design.rows();
    const auto d = design.cols();
    if (alpha == 2.0) {
        const Eigen::MatrixXd gram = design.transpose() * design / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
        return eig.eigenvalues().minCoeff();
    }

    const auto objective = [&](const Eigen::VectorXd& u) {
        return design * u;
    };
    const auto value_of = [&](const Eigen::VectorXd& proj) {
        return proj.array().abs().pow(alpha).mean();
    };

    Rng rng(0x5eedULL, 97);
    double best = std::numeric_limits<double>::infinity();
    const int restarts = 64;
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd u(d);
        for (Eigen::Index j = 0; j < d; ++j) u(j) = rng.normal();
        u.normalize();
        Eigen::VectorXd proj = objective(u);
        double val = value_of(proj);
        double step = 0.1;
        for (int it = 0; it < 300 && step > 1e-12; ++it) {
            // d/du mean|x_i'u|^alpha = (alpha/n) X' (sign .* |proj|^(alpha-1))
            Eigen::ArrayXd mag = proj.array().abs().max(1e-12);
            Eigen::VectorXd weights =
                (mag.pow(alpha - 1.0) * proj.array().sign()).matrix();
            Eigen::VectorXd grad =
                design.transpose() * weights * (alpha / static_cast<double>(n));
            grad -= grad.dot(u) * u;  // tangent projection
            Eigen::VectorXd cand = (u - step * grad).normalized();
            const Eigen::VectorXd cand_proj = objective(cand);
            const double cand_val = value_of(cand_proj);
            if (cand_val < val) {
                u = cand;
                proj = cand_proj;
                if (val - cand_val < 1e-14 * (1.0 + std::abs(val))) { val = cand_val; break; }
                val = cand_val;
                step *= 1.2;
            } else {
                step *= 0.5;
            }
        }
        best = std::min(best, val);
    }
    return best;
}

}  // namespace

FeasibleRegion feasible_region(const Dataset& data, const NoiseFamily& fam, double alpha,
                               const Eigen::VectorXd& reference_beta, double reference_s) {
    fam.validate();
    if (!(alpha > 0.0)) throw DomainError("feasible_region: alpha must be positive");
    data.require_full_rank();
    const auto n = data.n();

    const TailBound tail = tail_bound(fam, alpha);
    const double log_c_big = std::log(tail.C);

    // (1/n) * conditional log-likelihood at the reference point.
    const double ell_ref =
        -negative_loglik(data, fam, reference_beta, std::log(reference_s)) /
        static_cast<double>(n);

    FeasibleRegion region;
    region.alpha = alpha;
    region.tail_c = tail.c;
    region.tail_C = tail.C;
    region.sigma1 = std::exp(std::log(sup_density(fam)) - ell_ref);

    const double c_alpha = alpha >= 1.0 ? std::pow(2.0, alpha - 1.0) : 1.0;
    const double a_pow = data.response.array().abs().pow(alpha).mean();
    const double b_pow = sphere_min_power(data.design, alpha) / c_alpha;
    if (!(b_pow > 0.0))
        throw SingularDesignError("feasible_region: sphere criterion vanished");

    region.r0 = std::pow(
        ((1.0 + alpha * tail.c * a_pow) / alpha +
         std::pow(region.sigma1, alpha) * std::abs(log_c_big - ell_ref)) /
            (tail.c * b_pow),
        1.0 / alpha);

    const Eigen::VectorXd ref_resid = data.response - data.design * reference_beta;
    const double a_tilde = ref_resid.array().abs().pow(alpha).mean();
    if (!(a_tilde > 0.0))
        throw DegenerateDataError("feasible_region: reference residuals vanish");

    if (log_c_big <= ell_ref) {
        region.sigma0 = std::pow(0.5 * alpha * tail.c * a_tilde, 2.0 / alpha);
    } else {
        const double delta =
            4.0 / (alpha * alpha) + 4.0 * tail.c * a_tilde * (log_c_big - ell_ref);
        const double t_pos = (2.0 / alpha + std::sqrt(delta)) / (2.0 * tail.c * a_tilde);
        region.sigma0 = std::pow(t_pos, -2.0 / alpha);
    }
    return region;
}

FeasibleRegion feasible_region(const Dataset& data, const NoiseFamily& fam) {
    const FitResult ols = ols_fit(data);
    return feasible_region(data, fam, default_tail_exponent(fam), ols.beta_hat,
                           *ols.residual_sd);
}

}  // namespace scalereg
