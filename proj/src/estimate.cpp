#include "driftwatch/estimate.hpp"

#include "driftwatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace driftwatch {

namespace {

bool is_ou(const ModelSpec& model) { return model.family() == ModelFamily::OrnsteinUhlenbeck; }

void check_dims(const ObservationSeries& series, const ModelSpec& model) {
    if (series.dim() != model.state_dim()) {
        throw DimensionMismatch("series dimension " + std::to_string(series.dim()) +
                                " does not match model dimension " +
                                std::to_string(model.state_dim()));
    }
}

void require_length(const ObservationSeries& series, const ModelSpec& model, int params) {
    const std::size_t needed = std::max<std::size_t>(10, static_cast<std::size_t>(params) + 1);
    if (series.n() < needed) {
        throw DomainError("estimation needs at least " + std::to_string(needed) + " increments");
    }
    check_dims(series, model);
}

Eigen::LLT<Matrix> factor_diffusion(const ModelSpec& model, const Vector& x, const Vector& alpha,
                                    std::size_t index) {
    Eigen::LLT<Matrix> llt(model.diffusion_matrix(x, alpha));
    if (llt.info() != Eigen::Success) {
        throw NonPositiveDefiniteDiffusion(index, "Cholesky factorization failed");
    }
    return llt;
}

void warn_on_boundary(const std::vector<Interval>& box, const Vector& value, const char* label,
                      std::vector<std::string>& warnings) {
    for (std::size_t j = 0; j < box.size(); ++j) {
        if (box[j].on_boundary(value(static_cast<Eigen::Index>(j)))) {
            warnings.push_back(std::string(label) + "[" + std::to_string(j) +
                               "] on the boundary of the parameter box");
        }
    }
}

}  // namespace

double u1(const ObservationSeries& series, const ModelSpec& model, const Vector& alpha) {
    check_dims(series, model);
    const std::size_t n = series.n();
    const double h = series.step();
    if (is_ou(model)) {
        const double a = alpha(0);
        if (!(a * a > 0.0)) throw NonPositiveDefiniteDiffusion(1, "alpha = 0");
        double sq = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double dx = series.scalar(i) - series.scalar(i - 1);
            sq += dx * dx;
        }
        return -0.5 * sq / (h * a * a) - static_cast<double>(n) * std::log(std::abs(a));
    }
    double total = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const auto llt = factor_diffusion(model, series.at(i - 1), alpha, i);
        const Vector dx = series.increment(i);
        const double quad = llt.matrixL().solve(dx).squaredNorm();
        const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        total += quad / h + log_det;
    }
    return -0.5 * total;
}

double u2(const ObservationSeries& series, const ModelSpec& model, const Vector& beta,
          const Vector& alpha) {
    check_dims(series, model);
    const std::size_t n = series.n();
    const double h = series.step();
    if (is_ou(model)) {
        const double a = alpha(0);
        if (!(a * a > 0.0)) throw NonPositiveDefiniteDiffusion(1, "alpha = 0");
        double sq = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double prev = series.scalar(i - 1);
            const double r = series.scalar(i) - prev + h * beta(0) * (prev - beta(1));
            sq += r * r;
        }
        return -0.5 * sq / (h * a * a);
    }
    double total = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const Vector x = series.at(i - 1);
        const auto llt = factor_diffusion(model, x, alpha, i);
        const Vector r = series.increment(i) - h * model.drift(x, beta);
        total += llt.matrixL().solve(r).squaredNorm();
    }
    return -0.5 * total / h;
}

QmleResult fit_alpha(const ObservationSeries& series, const ModelSpec& model,
                     const EstimateOptions& options) {
    require_length(series, model, model.alpha_dim());
    const auto& box = model.box().alpha;
    QmleResult result;

    if (is_ou(model) && options.use_closed_form) {
        const std::size_t n = series.n();
        double sq = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double dx = series.scalar(i) - series.scalar(i - 1);
            sq += dx * dx;
        }
        Vector raw(1);
        raw(0) = std::sqrt(sq / (static_cast<double>(n) * series.step()));
        result.alpha_hat = model.box().project_alpha(raw);
        result.closed_form = true;
        result.trace.converged = true;
    } else {
        const auto objective = [&](const Vector& a) { return u1(series, model, a); };
        const OptimizeResult opt = maximize_in_box(objective, box, options.optimizer);
        result.alpha_hat = opt.argmax;
        result.trace = opt.trace;
    }
    result.u1_value = u1(series, model, result.alpha_hat);
    if (result.closed_form) {
        result.trace.final_gradient_norm = numeric_gradient_norm(
            [&](const Vector& a) { return u1(series, model, a); }, result.alpha_hat, box);
    }
    warn_on_boundary(box, result.alpha_hat, "alpha_hat", result.warnings);
    return result;
}

QmleResult fit_beta(const ObservationSeries& series, const ModelSpec& model, const Vector& alpha_hat,
                    const EstimateOptions& options) {
    require_length(series, model, model.beta_dim());
    if (alpha_hat.size() != model.alpha_dim()) throw DimensionMismatch("alpha_hat has wrong size");
    const auto& box = model.box().beta;
    QmleResult result;
    result.alpha_hat = alpha_hat;
    result.u1_value = u1(series, model, alpha_hat);

    Vector beta_hat;
    if (is_ou(model) && options.use_closed_form) {
        const std::size_t n = series.n();
        const double h = series.step();
        const double count = static_cast<double>(n);
        double mean_x = 0.0;
        double mean_dx = 0.0;
        double mean_sq = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            mean_x += series.scalar(i - 1);
            mean_dx += series.scalar(i) - series.scalar(i - 1);
            mean_sq += series.scalar(i - 1) * series.scalar(i - 1);
        }
        mean_x /= count;
        mean_dx /= count;
        mean_sq /= count;
        double sxx = 0.0;
        double sxy = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double cx = series.scalar(i - 1) - mean_x;
            sxx += cx * cx;
            sxy += cx * (series.scalar(i) - series.scalar(i - 1) - mean_dx);
        }
        if (!(sxx > 1e-12 * count * std::max(1.0, mean_sq))) {
            throw DegenerateRegression("regressor X_{i-1} is (numerically) constant");
        }
        const double slope = sxy / sxx;
        const double intercept = mean_dx - slope * mean_x;
        const double beta = box[0].clamp(-slope / h);
        // Conditional maximizer in gamma; equals intercept / (h beta) when beta is interior.
        const double gamma = beta == -slope / h ? intercept / (h * beta)
                                                : (mean_dx + h * beta * mean_x) / (h * beta);
        beta_hat = Vector(2);
        beta_hat << beta, box[1].clamp(gamma);
        result.closed_form = true;
        result.trace.converged = true;
        result.trace.final_gradient_norm = numeric_gradient_norm(
            [&](const Vector& b) { return u2(series, model, b, alpha_hat); }, beta_hat, box);
    } else {
        const auto objective = [&](const Vector& b) { return u2(series, model, b, alpha_hat); };
        const OptimizeResult opt = maximize_in_box(objective, box, options.optimizer);
        beta_hat = opt.argmax;
        result.trace = opt.trace;
    }
    result.u2_value = u2(series, model, beta_hat, alpha_hat);
    warn_on_boundary(box, beta_hat, "beta_hat", result.warnings);
    result.beta_hat = std::move(beta_hat);
    return result;
}

QmleResult fit_adaptive(const ObservationSeries& series, const ModelSpec& model,
                        const EstimateOptions& options) {
    const QmleResult alpha_fit = fit_alpha(series, model, options);
    QmleResult result = fit_beta(series, model, alpha_fit.alpha_hat, options);
    result.u1_value = alpha_fit.u1_value;
    result.warnings.insert(result.warnings.begin(), alpha_fit.warnings.begin(),
                           alpha_fit.warnings.end());
    if (!alpha_fit.closed_form) {
        result.trace.iterations += alpha_fit.trace.iterations;
        result.trace.evaluations += alpha_fit.trace.evaluations;
        result.trace.converged = result.trace.converged && alpha_fit.trace.converged;
    }
    result.closed_form = result.closed_form && alpha_fit.closed_form;
    return result;
}

OuLimits ou_misspecified_limits(const ChangeScenario& scenario, double alpha0) {
    if (scenario.pre.beta.size() != 2 || scenario.post.beta.size() != 2) {
        throw DimensionMismatch("OU scenario needs beta = (beta, gamma)");
    }
    const double b1 = scenario.pre.beta(0);
    const double g1 = scenario.pre.beta(1);
    const double b2 = scenario.post.beta(0);
    const double g2 = scenario.post.beta(1);
    if (!(b1 > 0.0) || !(b2 > 0.0)) throw DomainError("OU limits need positive beta on both sides");
    if (!(alpha0 > 0.0)) throw DomainError("OU limits need alpha0 > 0");
    if (!scenario.change_fraction) return {b1, g1};
    const double t = *scenario.change_fraction;
    const double dg = g1 - g2;
    const double denom = t / b1 + (1.0 - t) / b2 + (2.0 / (alpha0 * alpha0)) * t * (1.0 - t) * dg * dg;
    return {1.0 / denom, t * g1 + (1.0 - t) * g2};
}

}  // namespace driftwatch
