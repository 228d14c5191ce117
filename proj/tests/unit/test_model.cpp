#include "driftwatch/errors.hpp"
#include "driftwatch/model.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace driftwatch;
using driftwatch::testing::vec;

TEST(OuModel, ValidatesWithUnitDiffusion) {
    const ModelSpec ou = make_ou_model();
    std::vector<ValidationProbe> probes;
    for (double x : {-1.0, 0.0, 1.0}) probes.push_back({vec({x}), ou_theta(1, 1, 1)});
    const ValidationReport r = validate_model(ou, probes);
    EXPECT_TRUE(r.passed);
    EXPECT_DOUBLE_EQ(r.min_det_diffusion, 1.0);
    EXPECT_LT(r.max_jacobian_mismatch, 1e-5);
    EXPECT_FALSE(r.jacobian_numeric);
}

TEST(OuModel, ZeroDiffusionIsRejected) {
    const ModelSpec ou = make_ou_model();
    const std::vector<ValidationProbe> probes{{vec({0.0}), ou_theta(0, 1, 1)}};
    EXPECT_THROW(validate_model(ou, probes), NonPositiveDefiniteDiffusion);
}

TEST(OuModel, JacobianIsAnalytic) {
    const ModelSpec ou = make_ou_model();
    const Matrix j = ou.drift_jacobian_beta(vec({2.0}), vec({1.0, 1.0}));
    EXPECT_EQ(j(0, 0), -1.0);
    EXPECT_EQ(j(0, 1), 1.0);
    const Matrix fd = ou.numeric_drift_jacobian_beta(vec({2.0}), vec({1.0, 1.0}));
    EXPECT_NEAR(fd(0, 0), -1.0, 1e-8);
    EXPECT_NEAR(fd(0, 1), 1.0, 1e-8);

    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const double x = u(gen), b = std::abs(u(gen)) + 0.1, g = u(gen);
        const Matrix jac = ou.drift_jacobian_beta(vec({x}), vec({b, g}));
        EXPECT_EQ(jac(0, 0), -(x - g));
        EXPECT_EQ(jac(0, 1), b);
    }
}

TEST(OuModel, DiffusionMatrixIsOuterProduct) {
    auto diffusion = [](const Vector& x, const Vector& alpha) -> Matrix {
        Matrix a(2, 2);
        a << alpha(0), 0.5 * x(0), 0.0, alpha(1);
        return a;
    };
    auto drift = [](const Vector& x, const Vector& beta) -> Vector { return -beta(0) * x; };
    const ModelSpec m("two", 2, 2, 1, drift, {}, diffusion,
                      ParamBox{{{0.1, 5}, {0.1, 5}}, {{0.1, 5}}});
    const Vector x = vec({0.3, -1.2});
    const Vector alpha = vec({1.3, 0.7});
    const Matrix a = diffusion(x, alpha);
    EXPECT_TRUE(m.diffusion_matrix(x, alpha) == a * a.transpose());
    EXPECT_TRUE(m.jacobian_is_numeric());
    const std::vector<ValidationProbe> probes{{x, {alpha, vec({1.0})}}};
    const ValidationReport r = validate_model(m, probes);
    EXPECT_TRUE(r.passed);
    EXPECT_TRUE(r.jacobian_numeric);
}

TEST(OuModel, InvariantMoments) {
    auto m = ou_invariant_moments(1, 1, 1);
    EXPECT_DOUBLE_EQ(m.mean, 1.0);
    EXPECT_DOUBLE_EQ(m.variance, 0.5);
    m = ou_invariant_moments(2, 3, 0.5);
    EXPECT_DOUBLE_EQ(m.mean, 0.5);
    EXPECT_DOUBLE_EQ(m.variance, 2.0 / 3.0);
    m = ou_invariant_moments(1, 0.5, 0);
    EXPECT_DOUBLE_EQ(m.mean, 0.0);
    EXPECT_DOUBLE_EQ(m.variance, 1.0);
    EXPECT_THROW(ou_invariant_moments(1, 0, 0), DomainError);
    EXPECT_THROW(ou_invariant_moments(-1, 1, 0), DomainError);
}

TEST(OuModel, InvariantVarianceMonotoneOnGrid) {
    for (double a = 0.5; a <= 3.0; a += 0.5) {
        for (double b = 0.5; b < 5.0; b += 0.5) {
            EXPECT_GT(ou_invariant_moments(a, b, 0).variance, ou_invariant_moments(a, b + 0.5, 0).variance);
            EXPECT_LT(ou_invariant_moments(a, b, 0).variance, ou_invariant_moments(a + 0.5, b, 0).variance);
        }
    }
}

TEST(ChangeScenario, Validation) {
    const ModelSpec ou = make_ou_model();
    ChangeScenario s{ou_theta(1, 1, 1), ou_theta(2, 1, 1), 0.5};
    EXPECT_NO_THROW(s.validate(ou));
    s.change_fraction = 1.0;
    EXPECT_THROW(s.validate(ou), DomainError);
    s.change_fraction = 0.5;
    s.post = ou_theta(1, -1, 1);
    EXPECT_THROW(s.validate(ou), DomainError);
}

TEST(ObservationSeries, Invariants) {
    EXPECT_THROW(driftwatch::testing::scalar_series({0.0, 1.0}, 0.1), EmptySeries);
    EXPECT_THROW(driftwatch::testing::scalar_series({0.0, 1.0, 2.0}, 0.0), DomainError);
    EXPECT_THROW(driftwatch::testing::scalar_series({0.0, std::nan(""), 2.0}, 0.1), DomainError);
    const auto s = driftwatch::testing::scalar_series({0.0, 1.0, 3.0}, 0.5);
    EXPECT_EQ(s.n(), 2u);
    EXPECT_DOUBLE_EQ(s.horizon(), 1.0);
    EXPECT_EQ(s.increment(2)(0), 2.0);
}
