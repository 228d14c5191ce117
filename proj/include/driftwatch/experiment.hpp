#pragma once

// Monte Carlo size/power campaigns for the change-point tests.

#include "driftwatch/changepoint.hpp"
#include "driftwatch/critvals.hpp"
#include "driftwatch/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace driftwatch {

struct ScenarioSpec {
    std::string name;
    /// Scenarios sharing a group are emitted as columns of one table.
    std::string group;
    ChangeScenario scenario;
};

struct CritvalsSpec {
    int grid_points = 10000;
    int replications = 10000;
    std::uint64_t seed = 7;
};

struct ExperimentConfig {
    std::string model = "ou";
    Theta base = ou_theta(1.0, 1.0, 1.0);
    std::vector<ScenarioSpec> cases;
    std::vector<std::size_t> n_list{8000};
    int replications = 1000;
    /// First replication index; lets a cell be split into disjoint runs.
    std::uint64_t replication_offset = 0;
    double level = 0.1;
    std::uint64_t master_seed = 42;
    std::vector<TestKind> tests{TestKind::Alpha, TestKind::Beta1, TestKind::Beta2};
    /// Count a drift-test rejection only when the alpha test did not reject.
    bool adaptive = false;
    int substeps = 10;
    Vector x0 = Vector::Ones(1);
    /// Fixed sampling step; empty means h_n = n^{-2/3}.
    std::optional<double> step;
    CritvalsSpec critvals;
    int threads = 1;

    void validate(const ModelSpec& model) const;
    nlohmann::json to_json() const;
    /// Missing "pre" defaults to "base"; a "post" without "change_fraction" changes at 0.5.
    static ExperimentConfig from_json(const nlohmann::json& j);
};

struct CellKey {
    std::string scenario;
    std::size_t n = 0;
    TestKind test = TestKind::Alpha;

    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

struct CellResult {
    int rejections = 0;
    /// Attempted replications, failures included.
    int replications = 0;
    double rate = 0.0;
    double mean_statistic = 0.0;
    /// Statistics of the successful replications, in replication order.
    std::vector<double> statistics;
    int failures = 0;
    std::map<std::string, int> failure_reasons;
    /// Set when more than 10% of replications failed.
    bool aborted = false;
};

struct CampaignResult {
    std::map<CellKey, CellResult> per_cell;
    /// Scenario (name, group) pairs in configuration order.
    std::vector<std::pair<std::string, std::string>> scenarios;
    std::vector<std::size_t> n_list;
    std::vector<TestKind> tests;
    int beta_dim = 2;
    double level = 0.1;

    nlohmann::json to_json() const;
    static CampaignResult from_json(const nlohmann::json& j);
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Seed of replication r in the cells of sample size n. The stream depends on
/// n and r only, so scenarios share common random numbers.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n, std::uint64_t r);

CampaignResult run_campaign(const ExperimentConfig& config, const ModelSpec& model,
                            const CriticalValueTable& critvals, const ProgressFn& progress = {});

enum class TableFormat { Csv, Text };

/// One row per (n, test), one column per scenario of `group` (all scenarios if empty).
std::string emit_table(const CampaignResult& result, TableFormat format,
                       const std::optional<std::string>& group = std::nullopt);

struct DistributionData {
    std::vector<double> bin_edges;
    std::vector<int> counts;
    /// Expected bin counts under the reference law.
    std::vector<double> expected_counts;
    std::vector<double> sorted;
    std::vector<double> ecdf;
    std::vector<double> reference_cdf;
    double ks_distance = 0.0;
};

/// Empirical CDF value of `x` in a sorted sample.
double empirical_cdf(const std::vector<double>& sorted, double x);

/// sup_x |F_m(x) - F(x)| for a sorted sample.
double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf);

/// Histogram (40 equal bins on [0, max]) and ECDF of a cell's statistics with the
/// reference law: the Kolmogorov CDF for alpha/beta1, and for beta2 the empirical
/// CDF of `reference_sample` (sorted bridge sups of dimension q; generated with a
/// fixed seed if absent). Throws InsufficientSample below 100 statistics.
DistributionData emit_distribution(const CampaignResult& result, const CellKey& cell,
                                   const std::vector<double>* reference_sample = nullptr);

/// Columns: kind,x,y,reference with kind "hist" (x = left edge, y = count,
/// reference = expected count) or "ecdf" (x = statistic, y = ECDF, reference = CDF).
std::string distribution_csv(const DistributionData& data);

/// Standard OU designs with X0 = 1 and any change at 0.5.
std::vector<ScenarioSpec> case1_scenarios();
std::vector<ScenarioSpec> case2_scenarios();
std::vector<ScenarioSpec> case3_beta_scenarios();
std::vector<ScenarioSpec> case3_gamma_scenarios();
std::vector<ScenarioSpec> case3_joint_scenarios();

}  // namespace driftwatch
