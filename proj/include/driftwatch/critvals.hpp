#pragma once

// Critical values w_k(eps) of sup_{0<=s<=1} |B_k^0(s)| for a k-dimensional Brownian bridge.

#include "driftwatch/rng.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace driftwatch {

/// P(sup |B_1^0| > x) = 2 sum_{j>=1} (-1)^{j+1} exp(-2 j^2 x^2).
double kolmogorov_survival(double x);
double kolmogorov_cdf(double x);
/// Solves kolmogorov_survival(x) = epsilon by bisection on [0.2, 3].
double kolmogorov_upper_point(double epsilon);

/// One draw of max_j |B(s_j)| over a uniform grid of `grid_points` points on
/// [0, 1], with B(s) = W(s) - s W(1).
double sample_bridge_sup(int k, int grid_points, NormalStream& rng);

/// `replications` independent draws, sorted ascending. Replication r uses the
/// stream seeded by derive_replication_seed(seed, r).
std::vector<double> sample_bridge_sups(int k, int grid_points, int replications,
                                       std::uint64_t seed, int threads = 1);

/// Upper-eps point of a sorted sample: order statistic ceil((1 - eps) m), 1-based.
double upper_quantile(std::span<const double> sorted, double epsilon);

struct CriticalValueTable {
    std::vector<int> dims;
    std::vector<double> levels;
    /// values[i][j] = w_{dims[i]}(levels[j]).
    std::vector<std::vector<double>> values;
    int grid_points = 10000;
    int replications = 10000;
    std::uint64_t seed = 7;

    bool has(int k, double level) const;
    /// Throws DomainError if (k, level) is not tabulated.
    double value(int k, double level) const;

    nlohmann::json to_json() const;
    static CriticalValueTable from_json(const nlohmann::json& j);
};

/// Per-dimension seeds are derive_replication_seed(seed, k), so adding a
/// dimension never changes the others.
CriticalValueTable estimate_quantiles(const std::vector<int>& dims, const std::vector<double>& levels,
                                      int grid_points = 10000, int replications = 10000,
                                      std::uint64_t seed = 7, int threads = 1);

/// Table with fixed values, e.g. 1.223 / 1.444 at eps = 0.1.
CriticalValueTable fixed_critical_values(std::vector<int> dims, std::vector<double> levels,
                                         std::vector<std::vector<double>> values);

/// JSON file cache of tables keyed by (k, grid, reps, seed).
class CriticalValueCache {
public:
    explicit CriticalValueCache(std::filesystem::path path);

    /// Returns cached values where present, computes and stores the rest.
    CriticalValueTable get(const std::vector<int>& dims, const std::vector<double>& levels,
                           int grid_points, int replications, std::uint64_t seed, int threads = 1);

private:
    std::filesystem::path path_;
};

}  // namespace driftwatch
