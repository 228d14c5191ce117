#pragma once

// Cusum statistics for changes in the diffusion parameter (T_alpha) and the
// drift parameter (T_beta1, T_beta2), and the adaptive alpha-then-beta workflow.

#include "driftwatch/critvals.hpp"
#include "driftwatch/estimate.hpp"
#include "driftwatch/model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace driftwatch {

enum class TestKind { Alpha, Beta1, Beta2 };

std::string to_string(TestKind kind);
/// Accepts "alpha", "beta1", "beta2".
TestKind parse_test_kind(const std::string& name);

/// eta_i = tr(A^{-1}(X_{i-1}, alpha_hat) dX_i dX_i^T) / h.
std::vector<double> eta_hat(const ObservationSeries& series, const ModelSpec& model,
                            const Vector& alpha_hat);

/// xi_i = 1^T a^{-1}(X_{i-1}, alpha_hat) (dX_i - h b(X_{i-1}, beta_hat)).
std::vector<double> xi_hat(const ObservationSeries& series, const ModelSpec& model,
                           const Vector& alpha_hat, const Vector& beta_hat);

/// Row i-1 holds zeta_i = J^T A^{-1} (dX_i - h b), J = d b / d beta at (X_{i-1}, beta_hat).
Matrix zeta_hat(const ObservationSeries& series, const ModelSpec& model, const Vector& alpha_hat,
                const Vector& beta_hat);

struct InfoMatrix {
    Matrix matrix;
    Matrix inv_sqrt;
    double min_eigenvalue = 0.0;
};

/// Symmetric eigendecomposition of `matrix`; throws SingularInformation when the
/// smallest eigenvalue is at or below 1e-10 * trace / q.
InfoMatrix make_info_matrix(const Matrix& matrix);

/// I_n = (1/n) sum_i J^T A^{-1} J evaluated along the path.
InfoMatrix info_matrix(const ObservationSeries& series, const ModelSpec& model,
                       const Vector& alpha_hat, const Vector& beta_hat);

struct CusumProfile {
    /// n x q summands (q = 1 for scalar statistics), after any transform.
    Matrix summands;
    /// Row k-1 holds S_k - (k/n) S_n.
    Matrix centered;
    double scale = 1.0;
    double statistic = 0.0;
    /// 1-based k attaining the max; ties go to the smallest k. A convenience
    /// location estimate only.
    std::size_t argmax_k = 1;
};


CusumProfile cusum_statistic(std::span<const double> summands, double scale);
/// Vector version; rows are summands. `transform`, when given, left-multiplies each row
/// (e.g. I_n^{-1/2}) before the partial sums are taken.
CusumProfile cusum_statistic(const Matrix& summands, double scale, const Matrix* transform = nullptr);

double alpha_scale(int d, std::size_t n);
double beta1_scale(int d, std::size_t n, double h);
double beta2_scale(std::size_t n, double h);

struct TestReport {
    TestKind test = TestKind::Alpha;
    double statistic = 0.0;
    double critical_value = 0.0;
    double level = 0.0;
    bool reject = false;
    std::size_t argmax_k = 1;
    Vector alpha_hat;
    std::optional<Vector> beta_hat;
    std::vector<std::string> warnings;
    CusumProfile profile;
};

struct TestOptions {
    EstimateOptions estimate;
};

/// Statistic from an existing fit; lets several tests share one estimation.
TestReport evaluate_test(TestKind kind, const ObservationSeries& series, const ModelSpec& model,
                         const QmleResult& fit, double level, const CriticalValueTable& critvals);

TestReport test_alpha(const ObservationSeries& series, const ModelSpec& model, double level,
                      const CriticalValueTable& critvals, const TestOptions& options = {});

/// variant 1: xi cusum against w_1; variant 2: I_n^{-1/2}-whitened zeta cusum against w_q.
TestReport test_beta(const ObservationSeries& series, const ModelSpec& model, int variant,
                     double level, const CriticalValueTable& critvals,
                     const TestOptions& options = {});

struct AdaptiveOptions {
    bool run_variant2 = true;
    bool run_variant1 = false;
    TestOptions test;
};

struct AdaptiveReport {
    TestReport alpha;
    std::optional<TestReport> beta2;
    std::optional<TestReport> beta1;
};

/// Tests alpha first; the drift tests run only if no alpha change was detected.
AdaptiveReport adaptive_test(const ObservationSeries& series, const ModelSpec& model, double level,
                             const CriticalValueTable& critvals, const AdaptiveOptions& options = {});

}  // namespace driftwatch
