#pragma once

// Quasi-log likelihoods and adaptive QMLE: alpha first from U1, then beta from U2(. | alpha_hat).

#include "driftwatch/model.hpp"
#include "driftwatch/optimize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace driftwatch {

/// U1(alpha) = -1/2 sum_i [ tr(A^{-1}(X_{i-1}, alpha) dX_i dX_i^T / h) + log det A(X_{i-1}, alpha) ].
double u1(const ObservationSeries& series, const ModelSpec& model, const Vector& alpha);

/// U2(beta | alpha) = -1/2 sum_i tr(A^{-1}(X_{i-1}, alpha) r_i r_i^T) / h, r_i = dX_i - h b(X_{i-1}, beta).
double u2(const ObservationSeries& series, const ModelSpec& model, const Vector& beta,
          const Vector& alpha);

struct EstimateOptions {
    /// OU only: use the closed forms instead of the generic optimizer.
    bool use_closed_form = true;
    NelderMeadOptions optimizer;
};

struct QmleResult {
    Vector alpha_hat;
    std::optional<Vector> beta_hat;
    double u1_value = 0.0;
    std::optional<double> u2_value;
    OptimizerTrace trace;
    bool closed_form = false;
    std::vector<std::string> warnings;
};

QmleResult fit_alpha(const ObservationSeries& series, const ModelSpec& model,
                     const EstimateOptions& options = {});

/// Fits beta given alpha_hat; the returned result carries both estimates.
/// OU closed form regresses dX_i on (X_{i-1}, 1): beta = -slope / h, gamma = intercept / (h beta).
/// Throws DegenerateRegression when the regressors are collinear (constant path).
QmleResult fit_beta(const ObservationSeries& series, const ModelSpec& model, const Vector& alpha_hat,
                    const EstimateOptions& options = {});

/// fit_alpha followed by fit_beta.
QmleResult fit_adaptive(const ObservationSeries& series, const ModelSpec& model,
                        const EstimateOptions& options = {});

struct OuLimits {
    double beta_bar;
    double gamma_bar;
};

/// Probability limits of the full-sample OU QMLE (beta_hat, gamma_hat) when the
/// drift changes at t* with alpha fixed at alpha0:
///   gamma_bar = t* g1 + (1 - t*) g2
///   beta_bar  = 1 / (t*/b1 + (1 - t*)/b2 + (2/alpha0^2) t* (1 - t*) (g1 - g2)^2)
OuLimits ou_misspecified_limits(const ChangeScenario& scenario, double alpha0);

}  // namespace driftwatch
