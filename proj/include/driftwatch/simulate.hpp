#pragma once

#include "driftwatch/model.hpp"

#include <cstddef>
#include <cstdint>

namespace driftwatch {

/// h_n = n^{-2/3}, so that n h_n -> infinity and n h_n^2 -> 0.
double default_step(std::size_t n);

struct SimulationPlan {
    const ModelSpec* model = nullptr;
    std::size_t n = 0;
    double step = 0.0;
    Vector x0;
    ChangeScenario scenario;
    int substeps = 10;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Euler-Maruyama on a grid of step h/substeps, keeping every substeps-th point.
///
/// Parameters switch from scenario.pre to scenario.post once fine time reaches
/// floor(n t*) h, so observation increments 1..floor(n t*) are generated under
/// the pre-change parameters and the rest under the post-change ones.
/// Throws NumericalBlowup if any coordinate exceeds 1e12 in absolute value.
ObservationSeries simulate_path(const SimulationPlan& plan);

/// Number of leading increments generated with the pre-change parameters.
std::size_t pre_change_increments(std::size_t n, const ChangeScenario& scenario);

}  // namespace driftwatch
