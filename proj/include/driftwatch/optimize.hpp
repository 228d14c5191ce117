#pragma once

#include "driftwatch/model.hpp"

#include <functional>
#include <vector>

namespace driftwatch {

struct NelderMeadOptions {
    int restarts = 5;
    /// Evaluation budget per restart.
    int max_evaluations = 2000;
    /// Stop once the largest vertex distance from the best vertex falls below this.
    double simplex_tolerance = 1e-8;
    /// Initial simplex edge as a fraction of each box width.
    double initial_scale = 0.1;
};

struct OptimizerTrace {
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    double final_gradient_norm = 0.0;
};

struct OptimizeResult {
    Vector argmax;
    double value = 0.0;
    OptimizerTrace trace;
};

/// First `count` points of the Halton sequence scaled into `box`.
std::vector<Vector> halton_probes(const std::vector<Interval>& box, int count);

/// Maximizes `objective` over an axis-aligned box with Nelder-Mead. Vertices are
/// clamped into the box. Each restart starts from a Halton probe; a final polish
/// restarts from the best point. Throws OptimizerFailure if no restart converges.
OptimizeResult maximize_in_box(const std::function<double(const Vector&)>& objective,
                               const std::vector<Interval>& box,
                               const NelderMeadOptions& options = {});

/// Central-difference gradient norm, used for diagnostics only.
double numeric_gradient_norm(const std::function<double(const Vector&)>& objective,
                             const Vector& at, const std::vector<Interval>& box);

}  // namespace driftwatch
