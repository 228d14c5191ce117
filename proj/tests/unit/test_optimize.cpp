#include "driftwatch/errors.hpp"
#include "driftwatch/optimize.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace driftwatch;
using driftwatch::testing::vec;

TEST(NelderMead, ConcaveQuadratic) {
    const auto f = [](const Vector& v) { return -(v(0) - 0.3) * (v(0) - 0.3) - 2 * (v(1) + 1.2) * (v(1) + 1.2); };
    const auto r = maximize_in_box(f, {{-5, 5}, {-5, 5}});
    EXPECT_NEAR(r.argmax(0), 0.3, 1e-6);
    EXPECT_NEAR(r.argmax(1), -1.2, 1e-6);
    EXPECT_TRUE(r.trace.converged);
    EXPECT_LT(r.trace.final_gradient_norm, 1e-4);
}

TEST(NelderMead, Rosenbrock) {
    const auto f = [](const Vector& v) {
        return -(100 * std::pow(v(1) - v(0) * v(0), 2) + std::pow(1 - v(0), 2));
    };
    const auto r = maximize_in_box(f, {{-2, 2}, {-1, 3}});
    EXPECT_NEAR(r.argmax(0), 1.0, 1e-5);
    EXPECT_NEAR(r.argmax(1), 1.0, 1e-5);
}

TEST(NelderMead, OptimumOnBoundary) {
    const auto f = [](const Vector& v) { return v(0); };
    const auto r = maximize_in_box(f, {{0, 2}});
    EXPECT_NEAR(r.argmax(0), 2.0, 1e-8);
    EXPECT_LE(r.argmax(0), 2.0);
}

TEST(NelderMead, TinyBudgetFails) {
    NelderMeadOptions opts;
    opts.max_evaluations = 5;
    opts.restarts = 1;
    const auto f = [](const Vector& v) { return -std::pow(v(0) - 0.1, 2) - std::pow(v(1), 2); };
    EXPECT_THROW(maximize_in_box(f, {{-10, 10}, {-10, 10}}, opts), OptimizerFailure);
}

TEST(Halton, ProbesInsideBox) {
    const std::vector<Interval> box{{-1, 1}, {10, 20}};
    const auto probes = halton_probes(box, 64);
    ASSERT_EQ(probes.size(), 64u);
    for (const auto& p : probes) {
        EXPECT_GT(p(0), -1);
        EXPECT_LT(p(0), 1);
        EXPECT_GT(p(1), 10);
        EXPECT_LT(p(1), 20);
    }
    EXPECT_NE(probes[0](0), probes[1](0));
}

TEST(GradientNorm, Linear) {
    const auto f = [](const Vector& v) { return 3 * v(0) - 4 * v(1); };
    EXPECT_NEAR(numeric_gradient_norm(f, vec({0.0, 0.0}), {{-1, 1}, {-1, 1}}), 5.0, 1e-6);
}
