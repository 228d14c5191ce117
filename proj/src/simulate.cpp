#include "driftwatch/simulate.hpp"

#include "driftwatch/errors.hpp"
#include "driftwatch/rng.hpp"

#include <cmath>

namespace driftwatch {

namespace {

constexpr double kBlowupThreshold = 1e12;

// Scalar OU kernel; performs the same floating-point operations as the generic loop.
Matrix simulate_ou(const SimulationPlan& plan, std::size_t switch_step) {
    const std::size_t total = plan.n * static_cast<std::size_t>(plan.substeps);
    const double dt = plan.step / plan.substeps;
    const double sqrt_dt = std::sqrt(dt);
    Matrix out(static_cast<Eigen::Index>(plan.n + 1), 1);
    NormalStream normals(plan.seed);

    double x = plan.x0(0);
    out(0, 0) = x;
    for (std::size_t j = 0; j < total; ++j) {
        const Theta& theta = j < switch_step ? plan.scenario.pre : plan.scenario.post;
        const double alpha = theta.alpha(0);
        const double beta = theta.beta(0);
        const double gamma = theta.beta(1);
        const double z = normals.next();
        x = x + (-beta * (x - gamma)) * dt + alpha * (z * sqrt_dt);
        if (!(std::abs(x) <= kBlowupThreshold)) throw NumericalBlowup(j + 1);
        if ((j + 1) % static_cast<std::size_t>(plan.substeps) == 0) {
            out(static_cast<Eigen::Index>((j + 1) / static_cast<std::size_t>(plan.substeps)), 0) = x;
        }
    }
    return out;
}

Matrix simulate_generic(const SimulationPlan& plan, std::size_t switch_step) {
    const ModelSpec& model = *plan.model;
    const int d = model.state_dim();
    const std::size_t total = plan.n * static_cast<std::size_t>(plan.substeps);
    const double dt = plan.step / plan.substeps;
    const double sqrt_dt = std::sqrt(dt);
    Matrix out(static_cast<Eigen::Index>(plan.n + 1), d);
    NormalStream normals(plan.seed);

    Vector x = plan.x0;
    Vector z(d);
    out.row(0) = x.transpose();
    for (std::size_t j = 0; j < total; ++j) {
        const Theta& theta = j < switch_step ? plan.scenario.pre : plan.scenario.post;
        for (int l = 0; l < d; ++l) z(l) = normals.next() * sqrt_dt;
        const Vector drift = model.drift(x, theta.beta);
        const Matrix a = model.diffusion(x, theta.alpha);
        x = x + drift * dt + a * z;
        if (!(x.array().abs() <= kBlowupThreshold).all()) throw NumericalBlowup(j + 1);
        if ((j + 1) % static_cast<std::size_t>(plan.substeps) == 0) {
            out.row(static_cast<Eigen::Index>((j + 1) / static_cast<std::size_t>(plan.substeps))) =
                x.transpose();
        }
    }
    return out;
}

}  // namespace

double default_step(std::size_t n) {
    if (n == 0) throw DomainError("default_step needs n >= 1");
    return std::pow(static_cast<double>(n), -2.0 / 3.0);
}

void SimulationPlan::validate() const {
    if (model == nullptr) throw DomainError("simulation plan has no model");
    if (n < 2) throw DomainError("simulation needs n >= 2");
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("simulation step must be positive");
    if (substeps < 1) throw DomainError("substeps must be >= 1");
    if (x0.size() != model->state_dim()) throw DimensionMismatch("x0 does not match state dimension");
    if (!x0.allFinite()) throw DomainError("x0 must be finite");
    scenario.validate(*model);
}

std::size_t pre_change_increments(std::size_t n, const ChangeScenario& scenario) {
    if (!scenario.change_fraction) return n;
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * *scenario.change_fraction));
}

ObservationSeries simulate_path(const SimulationPlan& plan) {
    plan.validate();
    const std::size_t switch_step =
        pre_change_increments(plan.n, plan.scenario) * static_cast<std::size_t>(plan.substeps);
    Matrix values = plan.model->family() == ModelFamily::OrnsteinUhlenbeck
                        ? simulate_ou(plan, switch_step)
                        : simulate_generic(plan, switch_step);
    return ObservationSeries(std::move(values), plan.step);
}

}  // namespace driftwatch
