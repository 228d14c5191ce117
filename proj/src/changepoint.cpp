#include "driftwatch/changepoint.hpp"

#include "driftwatch/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace driftwatch {

namespace {

bool is_ou(const ModelSpec& model) { return model.family() == ModelFamily::OrnsteinUhlenbeck; }

void check_dims(const ObservationSeries& series, const ModelSpec& model) {
    if (series.dim() != model.state_dim()) throw DimensionMismatch("series and model dimensions differ");
}

double ou_alpha(const Vector& alpha_hat) {
    const double a = alpha_hat(0);
    if (!(a * a > 0.0)) throw NonPositiveDefiniteDiffusion(1, "alpha_hat = 0");
    return a;
}

Eigen::LLT<Matrix> factor(const ModelSpec& model, const Vector& x, const Vector& alpha,
                          std::size_t index) {
    Eigen::LLT<Matrix> llt(model.diffusion_matrix(x, alpha));
    if (llt.info() != Eigen::Success) {
        throw NonPositiveDefiniteDiffusion(index, "Cholesky factorization failed");
    }
    return llt;
}

}  // namespace

std::string to_string(TestKind kind) {
    switch (kind) {
        case TestKind::Alpha: return "alpha";
        case TestKind::Beta1: return "beta1";
        case TestKind::Beta2: return "beta2";
    }
    return "unknown";
}

TestKind parse_test_kind(const std::string& name) {
    if (name == "alpha") return TestKind::Alpha;
    if (name == "beta1") return TestKind::Beta1;
    if (name == "beta2") return TestKind::Beta2;
    throw DomainError("unknown test '" + name + "'");
}

std::vector<double> eta_hat(const ObservationSeries& series, const ModelSpec& model,
                            const Vector& alpha_hat) {
    check_dims(series, model);
    const std::size_t n = series.n();
    const double h = series.step();
    std::vector<double> out(n);
    if (is_ou(model)) {
        const double a = ou_alpha(alpha_hat);
        const double denom = h * a * a;
        for (std::size_t i = 1; i <= n; ++i) {
            const double dx = series.scalar(i) - series.scalar(i - 1);
            out[i - 1] = dx * dx / denom;
        }
        return out;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        const auto llt = factor(model, series.at(i - 1), alpha_hat, i);
        out[i - 1] = llt.matrixL().solve(series.increment(i)).squaredNorm() / h;
    }
    return out;
}

std::vector<double> xi_hat(const ObservationSeries& series, const ModelSpec& model,
                           const Vector& alpha_hat, const Vector& beta_hat) {
    check_dims(series, model);
    const std::size_t n = series.n();
    const double h = series.step();
    std::vector<double> out(n);
    if (is_ou(model)) {
        const double a = ou_alpha(alpha_hat);
        const double beta = beta_hat(0);
        const double gamma = beta_hat(1);
        for (std::size_t i = 1; i <= n; ++i) {
            const double prev = series.scalar(i - 1);
            out[i - 1] = (series.scalar(i) - prev + h * beta * (prev - gamma)) / a;
        }
        return out;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        const Vector x = series.at(i - 1);
        factor(model, x, alpha_hat, i);
        const Matrix a = model.diffusion(x, alpha_hat);
        const Vector r = series.increment(i) - h * model.drift(x, beta_hat);
        out[i - 1] = a.partialPivLu().solve(r).sum();
    }
    return out;
}

Matrix zeta_hat(const ObservationSeries& series, const ModelSpec& model, const Vector& alpha_hat,
                const Vector& beta_hat) {
    check_dims(series, model);
    const std::size_t n = series.n();
    const double h = series.step();
    Matrix out(static_cast<Eigen::Index>(n), model.beta_dim());
    if (is_ou(model)) {
        const double a = ou_alpha(alpha_hat);
        const double beta = beta_hat(0);
        const double gamma = beta_hat(1);
        const double inv_var = 1.0 / (a * a);
        for (std::size_t i = 1; i <= n; ++i) {
            const double prev = series.scalar(i - 1);
            const double r = (series.scalar(i) - prev + h * beta * (prev - gamma)) * inv_var;
            const auto row = static_cast<Eigen::Index>(i - 1);
            out(row, 0) = -(prev - gamma) * r;
            out(row, 1) = beta * r;
        }
        return out;
    }
    for (std::size_t i = 1; i <= n; ++i) {
        const Vector x = series.at(i - 1);
        const auto llt = factor(model, x, alpha_hat, i);
        const Vector r = series.increment(i) - h * model.drift(x, beta_hat);
        const Matrix jac = model.drift_jacobian_beta(x, beta_hat);
        out.row(static_cast<Eigen::Index>(i - 1)) = (jac.transpose() * llt.solve(r)).transpose();
    }
    return out;
}

InfoMatrix make_info_matrix(const Matrix& matrix) {
    if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
        throw DimensionMismatch("information matrix must be square and non-empty");
    }
    InfoMatrix info;
    info.matrix = 0.5 * (matrix + matrix.transpose());
    const double q = static_cast<double>(matrix.rows());
    const double floor = 1e-10 * info.matrix.trace() / q;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(info.matrix);
    if (eig.info() != Eigen::Success) throw SingularInformation("eigendecomposition failed");
    info.min_eigenvalue = eig.eigenvalues().minCoeff();
    if (!(floor > 0.0) || !(info.min_eigenvalue > floor)) {
        throw SingularInformation("information matrix min eigenvalue " +
                                  std::to_string(info.min_eigenvalue) + " below floor");
    }
    const Vector inv_root = eig.eigenvalues().array().rsqrt();
    info.inv_sqrt = eig.eigenvectors() * inv_root.asDiagonal() * eig.eigenvectors().transpose();
    info.inv_sqrt = 0.5 * (info.inv_sqrt + info.inv_sqrt.transpose()).eval();
    return info;
}

InfoMatrix info_matrix(const ObservationSeries& series, const ModelSpec& model,
                       const Vector& alpha_hat, const Vector& beta_hat) {
    check_dims(series, model);
    const std::size_t n = series.n();
    const int q = model.beta_dim();
    if (n < static_cast<std::size_t>(q)) throw DomainError("information matrix needs n >= q");
    Matrix sum = Matrix::Zero(q, q);
    if (is_ou(model)) {
        const double a = ou_alpha(alpha_hat);
        const double beta = beta_hat(0);
        const double gamma = beta_hat(1);
        double s00 = 0.0;
        double s01 = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            const double c = series.scalar(i - 1) - gamma;
            s00 += c * c;
            s01 += -beta * c;
        }
        const double count = static_cast<double>(n);
        sum(0, 0) = s00;
        sum(0, 1) = s01;
        sum(1, 0) = s01;
        sum(1, 1) = count * beta * beta;
        return make_info_matrix(sum / (count * a * a));
    }
    for (std::size_t i = 1; i <= n; ++i) {
        const Vector x = series.at(i - 1);
        const auto llt = factor(model, x, alpha_hat, i);
        const Matrix jac = model.drift_jacobian_beta(x, beta_hat);
        sum += jac.transpose() * llt.solve(jac);
    }
    return make_info_matrix(sum / static_cast<double>(n));
}

CusumProfile cusum_statistic(std::span<const double> summands, double scale) {
    Matrix m(static_cast<Eigen::Index>(summands.size()), 1);
    for (std::size_t i = 0; i < summands.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = summands[i];
    return cusum_statistic(m, scale);
}

CusumProfile cusum_statistic(const Matrix& summands, double scale, const Matrix* transform) {
    if (summands.rows() == 0) throw EmptySeries("cusum of an empty summand sequence");
    CusumProfile profile;
    profile.scale = scale;
    if (transform != nullptr) {
        if (transform->cols() != summands.cols()) throw DimensionMismatch("transform shape");
        profile.summands = summands * transform->transpose();
    } else {
        profile.summands = summands;
    }
    const Eigen::Index n = profile.summands.rows();
    const Eigen::Index q = profile.summands.cols();
    profile.centered.resize(n, q);

    Vector total = Vector::Zero(q);
    for (Eigen::Index i = 0; i < n; ++i) total += profile.summands.row(i).transpose();

    Vector partial = Vector::Zero(q);
    double best = -1.0;
    for (Eigen::Index k = 1; k <= n; ++k) {
        partial += profile.summands.row(k - 1).transpose();
        const double frac = static_cast<double>(k) / static_cast<double>(n);
        double sq = 0.0;
        for (Eigen::Index j = 0; j < q; ++j) {
            const double c = partial(j) - frac * total(j);
            profile.centered(k - 1, j) = c;
            sq += c * c;
        }
        if (sq > best) {
            best = sq;
            profile.argmax_k = static_cast<std::size_t>(k);
        }
    }
    profile.statistic = scale * std::sqrt(best);
    return profile;
}

double alpha_scale(int d, std::size_t n) { return 1.0 / std::sqrt(2.0 * d * static_cast<double>(n)); }

double beta1_scale(int d, std::size_t n, double h) {
    return 1.0 / std::sqrt(static_cast<double>(d) * static_cast<double>(n) * h);
}

double beta2_scale(std::size_t n, double h) { return 1.0 / std::sqrt(static_cast<double>(n) * h); }

TestReport evaluate_test(TestKind kind, const ObservationSeries& series, const ModelSpec& model,
                         const QmleResult& fit, double level, const CriticalValueTable& critvals) {
    TestReport report;
    report.test = kind;
    report.level = level;
    report.alpha_hat = fit.alpha_hat;
    report.warnings = fit.warnings;
    const std::size_t n = series.n();
    const double h = series.step();
    const int d = model.state_dim();
    switch (kind) {
        case TestKind::Alpha: {
            report.profile = cusum_statistic(eta_hat(series, model, fit.alpha_hat), alpha_scale(d, n));
            report.critical_value = critvals.value(1, level);
            break;
        }
        case TestKind::Beta1: {
            if (!fit.beta_hat) throw DomainError("beta test needs a beta estimate");
            report.beta_hat = fit.beta_hat;
            report.profile = cusum_statistic(xi_hat(series, model, fit.alpha_hat, *fit.beta_hat),
                                             beta1_scale(d, n, h));
            report.critical_value = critvals.value(1, level);
            break;
        }
        case TestKind::Beta2: {
            if (!fit.beta_hat) throw DomainError("beta test needs a beta estimate");
            report.beta_hat = fit.beta_hat;
            const InfoMatrix info = info_matrix(series, model, fit.alpha_hat, *fit.beta_hat);
            const Matrix zeta = zeta_hat(series, model, fit.alpha_hat, *fit.beta_hat);
            report.profile = cusum_statistic(zeta, beta2_scale(n, h), &info.inv_sqrt);
            report.critical_value = critvals.value(model.beta_dim(), level);
            break;
        }
    }
    report.statistic = report.profile.statistic;
    report.argmax_k = report.profile.argmax_k;
    report.reject = report.statistic > report.critical_value;
    return report;
}

TestReport test_alpha(const ObservationSeries& series, const ModelSpec& model, double level,
                      const CriticalValueTable& critvals, const TestOptions& options) {
    const QmleResult fit = fit_alpha(series, model, options.estimate);
    return evaluate_test(TestKind::Alpha, series, model, fit, level, critvals);
}

TestReport test_beta(const ObservationSeries& series, const ModelSpec& model, int variant,
                     double level, const CriticalValueTable& critvals, const TestOptions& options) {
    if (variant != 1 && variant != 2) throw DomainError("beta test variant must be 1 or 2");
    const QmleResult fit = fit_adaptive(series, model, options.estimate);
    return evaluate_test(variant == 1 ? TestKind::Beta1 : TestKind::Beta2, series, model, fit, level,
                         critvals);
}

AdaptiveReport adaptive_test(const ObservationSeries& series, const ModelSpec& model, double level,
                             const CriticalValueTable& critvals, const AdaptiveOptions& options) {
    const QmleResult alpha_fit = fit_alpha(series, model, options.test.estimate);
    AdaptiveReport out{evaluate_test(TestKind::Alpha, series, model, alpha_fit, level, critvals),
                       std::nullopt, std::nullopt};
    if (out.alpha.reject) return out;
    QmleResult fit = fit_beta(series, model, alpha_fit.alpha_hat, options.test.estimate);
    fit.warnings.insert(fit.warnings.begin(), alpha_fit.warnings.begin(), alpha_fit.warnings.end());
    if (options.run_variant2) {
        out.beta2 = evaluate_test(TestKind::Beta2, series, model, fit, level, critvals);
    }
    if (options.run_variant1) {
        out.beta1 = evaluate_test(TestKind::Beta1, series, model, fit, level, critvals);
    }
    return out;
}

}  // namespace driftwatch
