#include "driftwatch/model.hpp"

#include "driftwatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace driftwatch {

namespace {

bool box_contains(const std::vector<Interval>& box, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != box.size()) return false;
    for (std::size_t j = 0; j < box.size(); ++j) {
        if (!box[j].contains(v(static_cast<Eigen::Index>(j)))) return false;
    }
    return true;
}

Vector box_project(const std::vector<Interval>& box, const Vector& v) {
    if (static_cast<std::size_t>(v.size()) != box.size()) {
        throw DimensionMismatch("parameter vector does not match box dimension");
    }
    Vector out = v;
    for (std::size_t j = 0; j < box.size(); ++j) {
        const auto idx = static_cast<Eigen::Index>(j);
        out(idx) = box[j].clamp(v(idx));
    }
    return out;
}

}  // namespace

bool ParamBox::contains_alpha(const Vector& a) const { return box_contains(alpha, a); }
bool ParamBox::contains_beta(const Vector& b) const { return box_contains(beta, b); }
Vector ParamBox::project_alpha(const Vector& a) const { return box_project(alpha, a); }
Vector ParamBox::project_beta(const Vector& b) const { return box_project(beta, b); }

ModelSpec::ModelSpec(std::string name, int state_dim, int alpha_dim, int beta_dim, DriftFn drift,
                     JacobianFn drift_jacobian_beta, DiffusionFn diffusion, ParamBox box,
                     ModelFamily family)
    : name_(std::move(name)),
      state_dim_(state_dim),
      alpha_dim_(alpha_dim),
      beta_dim_(beta_dim),
      drift_(std::move(drift)),
      jacobian_(std::move(drift_jacobian_beta)),
      diffusion_(std::move(diffusion)),
      box_(std::move(box)),
      family_(family) {
    if (state_dim_ < 1 || alpha_dim_ < 1 || beta_dim_ < 1) {
        throw DomainError("model dimensions must be positive");
    }
    if (!drift_ || !diffusion_) throw DomainError("model requires drift and diffusion functions");
    if (box_.alpha.size() != static_cast<std::size_t>(alpha_dim_) ||
        box_.beta.size() != static_cast<std::size_t>(beta_dim_)) {
        throw DimensionMismatch("parameter box does not match model dimensions");
    }
    for (const auto& iv : box_.alpha) {
        if (!(iv.lo <= iv.hi)) throw DomainError("empty alpha interval");
    }
    for (const auto& iv : box_.beta) {
        if (!(iv.lo <= iv.hi)) throw DomainError("empty beta interval");
    }
}

Matrix ModelSpec::diffusion_matrix(const Vector& x, const Vector& alpha) const {
    const Matrix a = diffusion_(x, alpha);
    return a * a.transpose();
}

Matrix ModelSpec::drift_jacobian_beta(const Vector& x, const Vector& beta) const {
    if (jacobian_) return jacobian_(x, beta);
    return numeric_drift_jacobian_beta(x, beta);
}

Matrix ModelSpec::numeric_drift_jacobian_beta(const Vector& x, const Vector& beta) const {
    Matrix jac(state_dim_, beta_dim_);
    Vector probe = beta;
    for (int j = 0; j < beta_dim_; ++j) {
        const double step = 1e-6 * std::max(1.0, std::abs(beta(j)));
        probe(j) = beta(j) + step;
        const Vector up = drift_(x, probe);
        probe(j) = beta(j) - step;
        const Vector down = drift_(x, probe);
        probe(j) = beta(j);
        jac.col(j) = (up - down) / (2.0 * step);
    }
    return jac;
}

bool ModelSpec::contains(const Theta& theta) const {
    return box_.contains_alpha(theta.alpha) && box_.contains_beta(theta.beta);
}

ParamBox default_ou_box() {
    return ParamBox{{{1e-4, 100.0}}, {{1e-4, 100.0}, {-100.0, 100.0}}};
}

ModelSpec make_ou_model(ParamBox box) {
    auto drift = [](const Vector& x, const Vector& beta) -> Vector {
        Vector out(1);
        out(0) = -beta(0) * (x(0) - beta(1));
        return out;
    };
    auto jacobian = [](const Vector& x, const Vector& beta) -> Matrix {
        Matrix out(1, 2);
        out(0, 0) = -(x(0) - beta(1));
        out(0, 1) = beta(0);
        return out;
    };
    auto diffusion = [](const Vector&, const Vector& alpha) -> Matrix {
        Matrix out(1, 1);
        out(0, 0) = alpha(0);
        return out;
    };
    return ModelSpec("ou", 1, 1, 2, drift, jacobian, diffusion, std::move(box),
                     ModelFamily::OrnsteinUhlenbeck);
}

Theta ou_theta(double alpha, double beta, double gamma) {
    Theta t{Vector(1), Vector(2)};
    t.alpha << alpha;
    t.beta << beta, gamma;
    return t;
}

OuMoments ou_invariant_moments(double alpha, double beta, double gamma) {
    if (!(alpha > 0.0) || !(beta > 0.0)) {
        throw DomainError("OU invariant law requires alpha > 0 and beta > 0");
    }
    return {gamma, alpha * alpha / (2.0 * beta)};
}

ObservationSeries::ObservationSeries(Matrix values, double step)
    : values_(std::move(values)), step_(step) {
    if (values_.rows() < 3) throw EmptySeries("observation series needs n >= 2 intervals");
    if (values_.cols() < 1) throw DimensionMismatch("observation series has no state columns");
    if (!(step_ > 0.0) || !std::isfinite(step_)) throw DomainError("sampling step must be positive");
    if (!values_.allFinite()) throw DomainError("observation series contains non-finite values");
}

void ChangeScenario::validate(const ModelSpec& model) const {
    if (change_fraction) {
        const double t = *change_fraction;
        if (!(t > 0.0 && t < 1.0)) throw DomainError("change fraction must lie in (0, 1)");
    }
    if (!model.contains(pre)) throw DomainError("pre-change parameters outside parameter box");
    if (!model.contains(post)) throw DomainError("post-change parameters outside parameter box");
}

ValidationReport validate_model(const ModelSpec& model, std::span<const ValidationProbe> probes) {
    if (probes.empty()) throw DomainError("validate_model needs at least one probe");
    ValidationReport report;
    report.jacobian_numeric = model.jacobian_is_numeric();
    report.min_det_diffusion = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < probes.size(); ++i) {
        const auto& probe = probes[i];
        const Matrix big_a = model.diffusion_matrix(probe.x, probe.theta.alpha);
        const double det = big_a.determinant();
        if (!(det > 0.0)) {
            throw NonPositiveDefiniteDiffusion(i, "det A = " + std::to_string(det));
        }
        if (!model.contains(probe.theta)) throw DomainError("probe parameters outside parameter box");
        report.min_det_diffusion = std::min(report.min_det_diffusion, det);

        const Matrix jac = model.drift_jacobian_beta(probe.x, probe.theta.beta);
        const Matrix fd = model.numeric_drift_jacobian_beta(probe.x, probe.theta.beta);
        for (Eigen::Index r = 0; r < jac.rows(); ++r) {
            for (Eigen::Index c = 0; c < jac.cols(); ++c) {
                const double diff = std::abs(jac(r, c) - fd(r, c)) / std::max(1.0, std::abs(jac(r, c)));
                report.max_jacobian_mismatch = std::max(report.max_jacobian_mismatch, diff);
            }
        }
    }
    report.passed = report.min_det_diffusion > 0.0 && report.max_jacobian_mismatch < 1e-5;
    return report;
}

}  // namespace driftwatch
