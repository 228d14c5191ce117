#pragma once

#include "driftwatch/model.hpp"

#include <initializer_list>
#include <vector>

namespace driftwatch::testing {

/// The OU model routed through the generic (Custom) code paths.
inline ModelSpec generic_ou_model(bool analytic_jacobian = true) {
    auto drift = [](const Vector& x, const Vector& beta) -> Vector {
        return Vector::Constant(1, -beta(0) * (x(0) - beta(1)));
    };
    ModelSpec::JacobianFn jac;
    if (analytic_jacobian) {
        jac = [](const Vector& x, const Vector& beta) -> Matrix {
            Matrix out(1, 2);
            out << -(x(0) - beta(1)), beta(0);
            return out;
        };
    }
    auto diffusion = [](const Vector&, const Vector& alpha) -> Matrix {
        return Matrix::Constant(1, 1, alpha(0));
    };
    return ModelSpec("ou-generic", 1, 1, 2, drift, jac, diffusion, default_ou_box());
}

/// d = 1 model with constant drift b(x, beta) = slope * beta + offset and constant diffusion a.
inline ModelSpec linear_drift_model(double slope, double offset, double a, Interval alpha_box = {0.0, 10.0}) {
    auto drift = [slope, offset](const Vector&, const Vector& beta) -> Vector {
        return Vector::Constant(1, slope * beta(0) + offset);
    };
    auto jac = [slope](const Vector&, const Vector&) -> Matrix { return Matrix::Constant(1, 1, slope); };
    auto diffusion = [a](const Vector&, const Vector& alpha) -> Matrix {
        return Matrix::Constant(1, 1, a * alpha(0));
    };
    return ModelSpec("linear", 1, 1, 1, drift, jac, diffusion,
                     ParamBox{{alpha_box}, {{-100.0, 100.0}}});
}

inline ObservationSeries scalar_series(std::initializer_list<double> xs, double h) {
    Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) m(i++, 0) = x;
    return ObservationSeries(m, h);
}

inline ObservationSeries scalar_series(const std::vector<double>& xs, double h) {
    Matrix m(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = xs[i];
    return ObservationSeries(m, h);
}

inline Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

}  // namespace driftwatch::testing
