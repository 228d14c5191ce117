#include "driftwatch/critvals.hpp"

#include "driftwatch/errors.hpp"
#include "driftwatch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace driftwatch {

namespace {

std::string cache_key(int k, int grid, int reps, std::uint64_t seed) {
    return std::to_string(k) + ":" + std::to_string(grid) + ":" + std::to_string(reps) + ":" +
           std::to_string(seed);
}

bool same_level(double a, double b) { return std::abs(a - b) <= 1e-12; }

}  // namespace

namespace {

// Alternating series; converges fast for x >= 1.
double survival_series(double x) {
    double sum = 0.0;
    for (int j = 1; j < 1000; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        sum += (j % 2 == 1) ? term : -term;
        if (term < 1e-15) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Theta-function form of the CDF; converges fast for small x.
double cdf_series(double x) {
    const double pi = 3.14159265358979323846;
    double sum = 0.0;
    for (int j = 1; j < 1000; ++j) {
        const double odd = 2.0 * j - 1.0;
        const double term = std::exp(-odd * odd * pi * pi / (8.0 * x * x));
        sum += term;
        if (term < 1e-17) break;
    }
    return std::clamp(std::sqrt(2.0 * pi) / x * sum, 0.0, 1.0);
}

}  // namespace

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    return x < 1.0 ? 1.0 - cdf_series(x) : survival_series(x);
}

double kolmogorov_cdf(double x) {
    if (x <= 0.0) return 0.0;
    return x < 1.0 ? cdf_series(x) : 1.0 - survival_series(x);
}

double kolmogorov_upper_point(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    double lo = 0.2;
    double hi = 3.0;
    // Survival is decreasing in x.
    for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (kolmogorov_survival(mid) > epsilon) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

namespace {

double bridge_sup(int k, int grid_points, NormalStream& rng, std::vector<double>& walk) {
    const std::size_t m = static_cast<std::size_t>(grid_points);
    const auto dims = static_cast<std::size_t>(k);
    walk.assign(m * dims, 0.0);
    const double sd = std::sqrt(1.0 / static_cast<double>(m - 1));
    for (std::size_t l = 0; l < dims; ++l) {
        double w = 0.0;
        for (std::size_t j = 1; j < m; ++j) {
            w += rng.next() * sd;
            walk[l * m + j] = w;
        }
    }
    double best = 0.0;
    for (std::size_t j = 1; j + 1 < m; ++j) {
        const double s = static_cast<double>(j) / static_cast<double>(m - 1);
        double sq = 0.0;
        for (std::size_t l = 0; l < dims; ++l) {
            const double b = walk[l * m + j] - s * walk[l * m + m - 1];
            sq += b * b;
        }
        best = std::max(best, sq);
    }
    return std::sqrt(best);
}

}  // namespace

double sample_bridge_sup(int k, int grid_points, NormalStream& rng) {
    if (k < 1) throw DomainError("bridge dimension must be >= 1");
    if (grid_points < 2) throw DomainError("bridge grid needs >= 2 points");
    std::vector<double> walk;
    return bridge_sup(k, grid_points, rng, walk);
}

std::vector<double> sample_bridge_sups(int k, int grid_points, int replications, std::uint64_t seed,
                                       int threads) {
    if (k < 1) throw DomainError("bridge dimension must be >= 1");
    if (grid_points < 2) throw DomainError("bridge grid needs >= 2 points");
    if (replications < 1) throw DomainError("need at least one replication");
    std::vector<double> sups(static_cast<std::size_t>(replications));
    parallel_for<std::vector<double>>(sups.size(), threads, [&](std::size_t r, std::vector<double>& walk) {
        NormalStream rng(derive_replication_seed(seed, r));
        sups[r] = bridge_sup(k, grid_points, rng, walk);
    });
    std::sort(sups.begin(), sups.end());
    return sups;
}

double upper_quantile(std::span<const double> sorted, double epsilon) {
    if (sorted.empty()) throw InsufficientSample("quantile of an empty sample");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    const double m = static_cast<double>(sorted.size());
    auto index = static_cast<std::size_t>(std::ceil((1.0 - epsilon) * m - 1e-9));
    index = std::clamp<std::size_t>(index, 1, sorted.size());
    return sorted[index - 1];
}

bool CriticalValueTable::has(int k, double level) const {
    const auto ki = std::find(dims.begin(), dims.end(), k);
    if (ki == dims.end()) return false;
    return std::any_of(levels.begin(), levels.end(), [&](double l) { return same_level(l, level); });
}

double CriticalValueTable::value(int k, double level) const {
    const auto ki = std::find(dims.begin(), dims.end(), k);
    const auto li = std::find_if(levels.begin(), levels.end(),
                                 [&](double l) { return same_level(l, level); });
    if (ki == dims.end() || li == levels.end()) {
        throw DomainError("no critical value for k = " + std::to_string(k) +
                          ", level = " + std::to_string(level));
    }
    return values[static_cast<std::size_t>(ki - dims.begin())]
                 [static_cast<std::size_t>(li - levels.begin())];
}

nlohmann::json CriticalValueTable::to_json() const {
    return {{"k", dims},
            {"levels", levels},
            {"values", values},
            {"meta", {{"grid", grid_points}, {"reps", replications}, {"seed", seed}}}};
}

CriticalValueTable CriticalValueTable::from_json(const nlohmann::json& j) {
    CriticalValueTable t;
    if (j.at("k").is_array()) {
        t.dims = j.at("k").get<std::vector<int>>();
        t.values = j.at("values").get<std::vector<std::vector<double>>>();
    } else {
        t.dims = {j.at("k").get<int>()};
        t.values = {j.at("values").get<std::vector<double>>()};
    }
    t.levels = j.at("levels").get<std::vector<double>>();
    if (j.contains("meta")) {
        const auto& meta = j.at("meta");
        t.grid_points = meta.value("grid", t.grid_points);
        t.replications = meta.value("reps", t.replications);
        t.seed = meta.value("seed", t.seed);
    }
    if (t.values.size() != t.dims.size()) throw DimensionMismatch("critical value table shape");
    for (const auto& row : t.values) {
        if (row.size() != t.levels.size()) throw DimensionMismatch("critical value table shape");
    }
    return t;
}

CriticalValueTable estimate_quantiles(const std::vector<int>& dims, const std::vector<double>& levels,
                                      int grid_points, int replications, std::uint64_t seed,
                                      int threads) {
    if (replications < 100) throw DomainError("estimate_quantiles needs >= 100 replications");
    if (dims.empty() || levels.empty()) throw DomainError("need at least one dimension and level");
    CriticalValueTable table;
    table.dims = dims;
    table.levels = levels;
    table.grid_points = grid_points;
    table.replications = replications;
    table.seed = seed;
    for (int k : dims) {
        const auto sups = sample_bridge_sups(k, grid_points, replications,
                                             derive_replication_seed(seed, static_cast<std::uint64_t>(k)),
                                             threads);
        std::vector<double> row;
        for (double eps : levels) row.push_back(upper_quantile(sups, eps));
        table.values.push_back(std::move(row));
    }
    return table;
}

CriticalValueTable fixed_critical_values(std::vector<int> dims, std::vector<double> levels,
                                         std::vector<std::vector<double>> values) {
    CriticalValueTable t;
    t.dims = std::move(dims);
    t.levels = std::move(levels);
    t.values = std::move(values);
    t.grid_points = 0;
    t.replications = 0;
    t.seed = 0;
    if (t.values.size() != t.dims.size()) throw DimensionMismatch("critical value table shape");
    return t;
}

CriticalValueCache::CriticalValueCache(std::filesystem::path path) : path_(std::move(path)) {}

CriticalValueTable CriticalValueCache::get(const std::vector<int>& dims,
                                           const std::vector<double>& levels, int grid_points,
                                           int replications, std::uint64_t seed, int threads) {
    nlohmann::json store = nlohmann::json::object();
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_);
        store = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
        if (store.is_discarded() || !store.is_object()) store = nlohmann::json::object();
    }
    CriticalValueTable table;
    table.dims = dims;
    table.levels = levels;
    table.grid_points = grid_points;
    table.replications = replications;
    table.seed = seed;
    bool dirty = false;
    for (int k : dims) {
        const std::string key = cache_key(k, grid_points, replications, seed);
        auto& entry = store[key];
        if (!entry.is_object()) entry = nlohmann::json::object();
        std::vector<double> row;
        std::vector<double> missing;
        for (double eps : levels) {
            bool found = false;
            for (const auto& item : entry.items()) {
                if (same_level(std::stod(item.key()), eps)) {
                    row.push_back(item.value().get<double>());
                    found = true;
                    break;
                }
            }
            if (!found) {
                missing.push_back(eps);
                row.push_back(0.0);
            }
        }
        if (!missing.empty()) {
            const CriticalValueTable fresh =
                estimate_quantiles({k}, missing, grid_points, replications, seed, threads);
            std::size_t next = 0;
            for (std::size_t j = 0; j < levels.size(); ++j) {
                if (std::find(missing.begin(), missing.end(), levels[j]) == missing.end()) continue;
                row[j] = fresh.values.front()[next++];
                entry[nlohmann::json(levels[j]).dump()] = row[j];
            }
            dirty = true;
        }
        table.values.push_back(std::move(row));
    }
    if (dirty) {
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
        std::ofstream out(path_);
        out << store.dump(2) << '\n';
    }
    return table;
}

}  // namespace driftwatch
