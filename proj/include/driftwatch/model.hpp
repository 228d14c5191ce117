#pragma once

// Diffusion models dX = b(X, beta) dt + a(X, alpha) dW observed on a uniform grid.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace driftwatch {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Interval {
    double lo;
    double hi;

    bool contains(double v) const { return v >= lo && v <= hi; }
    double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
    bool on_boundary(double v) const { return v <= lo || v >= hi; }
};

/// Axis-aligned box Theta = Theta_A x Theta_B.
struct ParamBox {
    std::vector<Interval> alpha;
    std::vector<Interval> beta;

    bool contains_alpha(const Vector& a) const;
    bool contains_beta(const Vector& b) const;
    Vector project_alpha(const Vector& a) const;
    Vector project_beta(const Vector& b) const;
};

/// theta = (alpha, beta).
struct Theta {
    Vector alpha;
    Vector beta;

    friend bool operator==(const Theta& l, const Theta& r) {
        return l.alpha.size() == r.alpha.size() && l.beta.size() == r.beta.size() &&
               l.alpha == r.alpha && l.beta == r.beta;
    }
};

enum class ModelFamily { Custom, OrnsteinUhlenbeck };

class ModelSpec {
public:
    using DriftFn = std::function<Vector(const Vector& x, const Vector& beta)>;
    using JacobianFn = std::function<Matrix(const Vector& x, const Vector& beta)>;
    using DiffusionFn = std::function<Matrix(const Vector& x, const Vector& alpha)>;

    /// Pass an empty jacobian to fall back on central finite differences.
    ModelSpec(std::string name, int state_dim, int alpha_dim, int beta_dim, DriftFn drift,
              JacobianFn drift_jacobian_beta, DiffusionFn diffusion, ParamBox box,
              ModelFamily family = ModelFamily::Custom);

    const std::string& name() const { return name_; }
    int state_dim() const { return state_dim_; }
    int alpha_dim() const { return alpha_dim_; }
    int beta_dim() const { return beta_dim_; }
    const ParamBox& box() const { return box_; }
    ModelFamily family() const { return family_; }
    bool jacobian_is_numeric() const { return !jacobian_; }

    Vector drift(const Vector& x, const Vector& beta) const { return drift_(x, beta); }
    Matrix diffusion(const Vector& x, const Vector& alpha) const { return diffusion_(x, alpha); }
    /// A = a a^T.
    Matrix diffusion_matrix(const Vector& x, const Vector& alpha) const;
    /// d x q matrix of d b / d beta.
    Matrix drift_jacobian_beta(const Vector& x, const Vector& beta) const;
    /// Central differences with step 1e-6 * max(1, |beta_j|).
    Matrix numeric_drift_jacobian_beta(const Vector& x, const Vector& beta) const;

    bool contains(const Theta& theta) const;

private:
    std::string name_;
    int state_dim_;
    int alpha_dim_;
    int beta_dim_;
    DriftFn drift_;
    JacobianFn jacobian_;
    DiffusionFn diffusion_;
    ParamBox box_;
    ModelFamily family_;
};

/// Default OU box: alpha in [1e-4, 100], beta in [1e-4, 100], gamma in [-100, 100].
ParamBox default_ou_box();

/// dX = -beta (X - gamma) dt + alpha dW; alpha = (alpha), beta = (beta, gamma).
ModelSpec make_ou_model(ParamBox box = default_ou_box());

/// Builds the OU theta from its three scalars.
Theta ou_theta(double alpha, double beta, double gamma);

struct OuMoments {
    double mean;
    double variance;
};

/// Mean and variance of the OU invariant law N(gamma, alpha^2 / (2 beta)).
OuMoments ou_invariant_moments(double alpha, double beta, double gamma);

/// Equispaced observations X_{t_0}, ..., X_{t_n} with step h, stored row-major (n+1) x d.
class ObservationSeries {
public:
    ObservationSeries(Matrix values, double step);

    std::size_t n() const { return static_cast<std::size_t>(values_.rows()) - 1; }
    int dim() const { return static_cast<int>(values_.cols()); }
    double step() const { return step_; }
    double horizon() const { return step_ * static_cast<double>(n()); }
    const Matrix& values() const { return values_; }

    auto at(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }
    /// X_{t_i} - X_{t_{i-1}} for i >= 1.
    Vector increment(std::size_t i) const {
        return (values_.row(static_cast<Eigen::Index>(i)) -
                values_.row(static_cast<Eigen::Index>(i - 1)))
            .transpose();
    }
    /// Scalar view for d = 1 series.
    double scalar(std::size_t i) const { return values_(static_cast<Eigen::Index>(i), 0); }

    friend bool operator==(const ObservationSeries& l, const ObservationSeries& r) {
        return l.step_ == r.step_ && l.values_.rows() == r.values_.rows() &&
               l.values_.cols() == r.values_.cols() && l.values_ == r.values_;
    }

private:
    Matrix values_;
    double step_;
};

struct ChangeScenario {
    Theta pre;
    Theta post;
    std::optional<double> change_fraction;

    static ChangeScenario none(Theta theta) { return {theta, std::move(theta), std::nullopt}; }
    /// Throws DomainError on t* outside (0, 1) or parameters outside Theta.
    void validate(const ModelSpec& model) const;
};

struct ValidationProbe {
    Vector x;
    Theta theta;
};

struct ValidationReport {
    bool passed = false;
    double min_det_diffusion = 0.0;
    double max_jacobian_mismatch = 0.0;
    bool jacobian_numeric = false;
};

/// Spot-checks det A > 0 and the drift Jacobian against central differences.
/// Throws NonPositiveDefiniteDiffusion at the first probe with det A <= 0.
ValidationReport validate_model(const ModelSpec& model, std::span<const ValidationProbe> probes);

}  // namespace driftwatch
