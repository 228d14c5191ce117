#include "driftwatch/changepoint.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/simulate.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace driftwatch;
using driftwatch::testing::scalar_series;
using driftwatch::testing::vec;

namespace {

const CriticalValueTable& fixed_table() {
    static const CriticalValueTable t = fixed_critical_values({1, 2}, {0.1}, {{1.223}, {1.444}});
    return t;
}

ObservationSeries simulate_ou(std::size_t n, const ChangeScenario& sc, std::uint64_t seed) {
    static const ModelSpec ou = make_ou_model();
    SimulationPlan plan;
    plan.model = &ou;
    plan.n = n;
    plan.step = default_step(n);
    plan.x0 = vec({1.0});
    plan.scenario = sc;
    plan.seed = seed;
    return simulate_path(plan);
}

// Integers over 8, so sums stay exact.
std::vector<double> dyadic(std::mt19937_64& gen, std::size_t n) {
    std::uniform_int_distribution<int> u(-64, 64);
    std::vector<double> v(n);
    for (auto& x : v) x = u(gen) / 8.0;
    return v;
}

}  // namespace

TEST(Cusum, HandExample) {
    const std::vector<double> s{1, 0, 0, 0};
    const CusumProfile p = cusum_statistic(s, 1.0);
    EXPECT_EQ(p.statistic, 0.75);
    EXPECT_EQ(p.argmax_k, 1u);
    EXPECT_EQ(p.centered(3, 0), 0.0);
}

TEST(Cusum, ConstantSummandsGiveZero) {
    for (double c : {0.0, 1.0, -3.5, 17.0}) {
        const std::vector<double> s(16, c);
        EXPECT_EQ(cusum_statistic(s, 1.0).statistic, 0.0);
    }
}

TEST(Cusum, LastCenteredRowIsExactlyZero) {
    std::mt19937_64 gen(1);
    std::normal_distribution<double> z;
    for (std::size_t n : {3u, 7u, 12u, 101u}) {
        Matrix m(n, 3);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(gen);
        const CusumProfile p = cusum_statistic(m, 0.3);
        for (int j = 0; j < 3; ++j) EXPECT_EQ(p.centered(n - 1, j), 0.0);
        EXPECT_EQ(p.statistic, 0.3 * p.centered.rowwise().norm().maxCoeff());
    }
}

TEST(Cusum, ShiftAndScaleIdentities) {
    std::mt19937_64 gen(2);
    for (std::size_t n : {4u, 8u, 16u, 64u}) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto s = dyadic(gen, n);
            const CusumProfile base = cusum_statistic(s, 1.0);
            std::vector<double> shifted(s), scaled(s), halved(s);
            for (std::size_t i = 0; i < n; ++i) {
                shifted[i] += 17.0;
                scaled[i] *= 4.0;
                halved[i] *= 0.5;
            }
            const CusumProfile ps = cusum_statistic(shifted, 1.0);
            EXPECT_TRUE(ps.centered == base.centered);
            EXPECT_EQ(ps.statistic, base.statistic);
            EXPECT_EQ(ps.argmax_k, base.argmax_k);
            EXPECT_EQ(cusum_statistic(scaled, 1.0).statistic, 4.0 * base.statistic);
            EXPECT_EQ(cusum_statistic(halved, 1.0).statistic, 0.5 * base.statistic);
            EXPECT_EQ(cusum_statistic(s, 0.25).statistic, 0.25 * base.statistic);
        }
    }
}

TEST(Cusum, MatchesBruteForceForShortSequences) {
    std::mt19937_64 gen(3);
    for (std::size_t n = 1; n <= 12; ++n) {
        for (int trial = 0; trial < 50; ++trial) {
            const auto s = dyadic(gen, n);
            double total = 0;
            for (double x : s) total += x;
            double best = -1;
            std::size_t best_k = 0;
            for (std::size_t k = 1; k <= n; ++k) {
                double partial = 0;
                for (std::size_t i = 0; i < k; ++i) partial += s[i];
                const double c = std::abs(partial - (static_cast<double>(k) / static_cast<double>(n)) * total);
                if (c > best) {
                    best = c;
                    best_k = k;
                }
            }
            const CusumProfile p = cusum_statistic(s, 1.0);
            EXPECT_EQ(p.statistic, best);
            EXPECT_EQ(p.argmax_k, best_k);
        }
    }
}

TEST(Cusum, TiesGoToSmallestK) {
    const std::vector<double> s{1, -1, 1, -1};
    const CusumProfile p = cusum_statistic(s, 1.0);
    EXPECT_EQ(p.statistic, 1.0);
    EXPECT_EQ(p.argmax_k, 1u);
}

TEST(Cusum, EmptyInputThrows) {
    EXPECT_THROW(cusum_statistic(std::vector<double>{}, 1.0), EmptySeries);
}

TEST(InfoMatrix, InverseSquareRootIdentities) {
    std::mt19937_64 gen(4);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 100; ++trial) {
        Matrix g(2, 2);
        g << z(gen), z(gen), z(gen), z(gen);
        const Matrix m = g * g.transpose() + 0.1 * Matrix::Identity(2, 2);
        const InfoMatrix info = make_info_matrix(m);
        EXPECT_LT((info.inv_sqrt * info.inv_sqrt * m - Matrix::Identity(2, 2)).norm(), 1e-10);
        EXPECT_LT((info.inv_sqrt * m * info.inv_sqrt - Matrix::Identity(2, 2)).norm(), 1e-8);
        EXPECT_LT((info.inv_sqrt - info.inv_sqrt.transpose()).norm(), 1e-12);
        const Vector v = vec({z(gen), z(gen)});
        const double lhs = (info.inv_sqrt * v).squaredNorm();
        const double rhs = v.dot(m.ldlt().solve(v));
        EXPECT_NEAR(lhs, rhs, 1e-8 * std::max(1.0, rhs));
    }
}

TEST(InfoMatrix, SingularMatrixThrows) {
    Matrix m(2, 2);
    m << 1, 1, 1, 1;
    EXPECT_THROW(make_info_matrix(m), SingularInformation);
}

TEST(Summands, EtaTwoDimensional) {
    auto drift = [](const Vector& x, const Vector&) -> Vector { return Vector::Zero(x.size()); };
    auto diffusion = [](const Vector&, const Vector& alpha) -> Matrix {
        return alpha(0) * Matrix::Identity(2, 2);
    };
    const ModelSpec m("flat2", 2, 1, 1, drift, {}, diffusion, ParamBox{{{0.1, 2}}, {{-1, 1}}});
    const double h = 0.04;
    Matrix values(4, 2);
    for (int i = 0; i < 4; ++i) values.row(i).setConstant(i * std::sqrt(h));
    const auto eta = eta_hat(ObservationSeries(values, h), m, vec({1.0}));
    ASSERT_EQ(eta.size(), 3u);
    for (double e : eta) EXPECT_NEAR(e, 2.0, 1e-12);
}

TEST(Summands, OuEtaDisplayAndConstantPath) {
    const auto s = simulate_ou(300, ChangeScenario::none(ou_theta(1, 1, 1)), 6);
    const double a = 1.1;
    const auto eta = eta_hat(s, make_ou_model(), vec({a}));
    const auto eta_g = eta_hat(s, driftwatch::testing::generic_ou_model(), vec({a}));
    for (std::size_t i = 1; i <= s.n(); ++i) {
        const double dx = s.scalar(i) - s.scalar(i - 1);
        EXPECT_NEAR(eta[i - 1], dx * dx / (s.step() * a * a), 1e-12);
        EXPECT_NEAR(eta_g[i - 1], eta[i - 1], 1e-12);
    }
    for (double e : eta_hat(scalar_series({1, 1, 1, 1}, 0.1), make_ou_model(), vec({1.0}))) EXPECT_EQ(e, 0.0);
}

TEST(Summands, XiHandValue) {
    const ModelSpec m = driftwatch::testing::linear_drift_model(0.0, 1.0, 2.0);
    const auto xi = xi_hat(scalar_series({0.0, 0.2, 0.4}, 0.1), m, vec({1.0}), vec({0.0}));
    ASSERT_EQ(xi.size(), 2u);
    for (double v : xi) EXPECT_NEAR(v, 0.05, 1e-12);
}

TEST(Summands, XiZeroOnPerfectDriftPath) {
    const double h = 0.1, b = 1.5, g = 0.5;
    std::vector<double> xs{2.0};
    for (int i = 0; i < 10; ++i) xs.push_back(xs.back() - h * b * (xs.back() - g));
    const auto s = scalar_series(xs, h);
    for (const ModelSpec& m : {make_ou_model(), driftwatch::testing::generic_ou_model()}) {
        for (double v : xi_hat(s, m, vec({1.0}), vec({b, g}))) EXPECT_NEAR(v, 0.0, 1e-15);
        EXPECT_NEAR(zeta_hat(s, m, vec({1.0}), vec({b, g})).norm(), 0.0, 1e-14);
    }
}

TEST(Summands, ZetaHandValue) {
    // b = 2 beta, A = 4; with beta = 0 the residual equals the increment.
    const ModelSpec m = driftwatch::testing::linear_drift_model(2.0, 0.0, 2.0);
    const Matrix z = zeta_hat(scalar_series({0.0, 0.1, 0.2}, 0.1), m, vec({1.0}), vec({0.0}));
    ASSERT_EQ(z.rows(), 2);
    ASSERT_EQ(z.cols(), 1);
    EXPECT_NEAR(z(0, 0), 0.05, 1e-12);
    EXPECT_NEAR(z(1, 0), 0.05, 1e-12);
}

TEST(Summands, OuZetaAndInfoMatchDisplays) {
    const auto s = simulate_ou(400, ChangeScenario::none(ou_theta(1, 1, 1)), 9);
    const double a = 0.9, b = 1.2, g = 0.8, h = s.step();
    const ModelSpec ou = make_ou_model();
    const ModelSpec gen = driftwatch::testing::generic_ou_model();
    const Matrix z = zeta_hat(s, ou, vec({a}), vec({b, g}));
    const Matrix zg = zeta_hat(s, gen, vec({a}), vec({b, g}));
    Matrix info = Matrix::Zero(2, 2);
    for (std::size_t i = 1; i <= s.n(); ++i) {
        const double x = s.scalar(i - 1);
        const double r = s.scalar(i) - x + h * b * (x - g);
        EXPECT_NEAR(z(i - 1, 0), -(x - g) * r / (a * a), 1e-12);
        EXPECT_NEAR(z(i - 1, 1), b * r / (a * a), 1e-12);
        const double bx = -b * (x - g);
        Matrix term(2, 2);
        term << (x - g) * (x - g), bx, bx, b * b;
        info += term;
    }
    info /= static_cast<double>(s.n()) * a * a;
    EXPECT_LT((zg - z).norm(), 1e-10);
    EXPECT_LT((info_matrix(s, ou, vec({a}), vec({b, g})).matrix - info).norm(), 1e-10);
    EXPECT_LT((info_matrix(s, gen, vec({a}), vec({b, g})).matrix - info).norm(), 1e-10);
}

TEST(Summands, ConstantJacobianInfo) {
    const ModelSpec m = driftwatch::testing::linear_drift_model(-3.0, 0.0, 1.0);
    const auto info = info_matrix(scalar_series({0.0, 0.1, 0.3, 0.2}, 0.1), m, vec({1.0}), vec({0.0}));
    EXPECT_NEAR(info.matrix(0, 0), 9.0, 1e-12);
    EXPECT_NEAR(info.inv_sqrt(0, 0), 1.0 / 3.0, 1e-12);
}

TEST(Tests, ScalesAndRejectionRule) {
    EXPECT_DOUBLE_EQ(alpha_scale(1, 8), 0.25);
    EXPECT_DOUBLE_EQ(beta1_scale(1, 100, 0.04), 0.5);
    EXPECT_DOUBLE_EQ(beta2_scale(25, 0.04), 1.0);
    const auto s = simulate_ou(2000, {ou_theta(1, 1, 1), ou_theta(1.5, 1, 1), 0.5}, 3);
    const ModelSpec ou = make_ou_model();
    for (TestKind k : {TestKind::Alpha, TestKind::Beta1, TestKind::Beta2}) {
        const auto fit = fit_adaptive(s, ou);
        const TestReport r = evaluate_test(k, s, ou, fit, 0.1, fixed_table());
        EXPECT_EQ(r.reject, r.statistic > r.critical_value);
        EXPECT_EQ(r.critical_value, k == TestKind::Beta2 ? 1.444 : 1.223);
    }
}

TEST(Tests, OuStatisticsMatchManualCusum) {
    const auto s = simulate_ou(1000, ChangeScenario::none(ou_theta(1, 1, 1)), 12);
    const ModelSpec ou = make_ou_model();
    const TestReport ra = test_alpha(s, ou, 0.1, fixed_table());
    const double a = ra.alpha_hat(0), h = s.step();
    std::vector<double> eta;
    for (std::size_t i = 1; i <= s.n(); ++i) {
        const double dx = s.scalar(i) - s.scalar(i - 1);
        eta.push_back(dx * dx / (h * a * a));
    }
    double total = 0;
    for (double e : eta) total += e;
    double partial = 0, best = 0;
    for (std::size_t k = 1; k <= eta.size(); ++k) {
        partial += eta[k - 1];
        best = std::max(best, std::abs(partial - static_cast<double>(k) / 1000.0 * total));
    }
    EXPECT_NEAR(ra.statistic, best / std::sqrt(2.0 * 1000.0), 1e-9);
}

TEST(Tests, ConstantPathDoesNotRejectAlpha) {
    std::vector<double> xs(50, 1.0);
    const TestReport r = test_alpha(scalar_series(xs, 0.1), make_ou_model(), 0.1, fixed_table());
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_FALSE(r.reject);
}

TEST(Tests, MissingCriticalValueThrows) {
    const auto s = simulate_ou(500, ChangeScenario::none(ou_theta(1, 1, 1)), 1);
    const auto only1 = fixed_critical_values({1}, {0.1}, {{1.223}});
    EXPECT_THROW(test_beta(s, make_ou_model(), 2, 0.1, only1), DomainError);
    EXPECT_THROW(test_alpha(s, make_ou_model(), 0.05, only1), DomainError);
}

TEST(Adaptive, AlphaChangeStopsWorkflow) {
    const auto s = simulate_ou(8000, {ou_theta(1, 1, 1), ou_theta(1.5, 1, 1), 0.5}, 5);
    const AdaptiveReport r = adaptive_test(s, make_ou_model(), 0.1, fixed_table());
    EXPECT_TRUE(r.alpha.reject);
    EXPECT_GT(r.alpha.argmax_k, 3600u);
    EXPECT_LT(r.alpha.argmax_k, 4400u);
    EXPECT_FALSE(r.beta2);
    EXPECT_FALSE(r.beta1);
}

TEST(Adaptive, NullDataRunsDriftTests) {
    AdaptiveOptions opts;
    opts.run_variant1 = true;
    int alpha_rejects = 0;
    for (int seed = 1; seed <= 5; ++seed) {
        const auto s = simulate_ou(8000, ChangeScenario::none(ou_theta(1, 1, 1)), seed);
        const AdaptiveReport r = adaptive_test(s, make_ou_model(), 0.1, fixed_table(), opts);
        if (r.alpha.reject) {
            ++alpha_rejects;
            EXPECT_FALSE(r.beta2);
        } else {
            EXPECT_TRUE(r.beta2);
            EXPECT_TRUE(r.beta1);
        }
    }
    EXPECT_LE(alpha_rejects, 3);
}

TEST(Adaptive, GammaChangeIsPickedUpByDriftTest) {
    AdaptiveOptions opts;
    opts.run_variant1 = true;
    const auto s = simulate_ou(125000, {ou_theta(1, 1, 1), ou_theta(1, 1, -1), 0.5}, 7);
    const AdaptiveReport r = adaptive_test(s, make_ou_model(), 0.1, fixed_table(), opts);
    if (!r.alpha.reject) {
        ASSERT_TRUE(r.beta1);
        EXPECT_TRUE(r.beta1->reject);
    } else {
        EXPECT_FALSE(r.beta1);
    }
}

TEST(Names, RoundTrip) {
    for (TestKind k : {TestKind::Alpha, TestKind::Beta1, TestKind::Beta2})
        EXPECT_EQ(parse_test_kind(to_string(k)), k);
    EXPECT_THROW(parse_test_kind("gamma"), DomainError);
}
