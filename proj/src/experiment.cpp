#include "driftwatch/experiment.hpp"

#include "driftwatch/errors.hpp"
#include "driftwatch/estimate.hpp"
#include "driftwatch/io.hpp"
#include "driftwatch/json_codec.hpp"
#include "driftwatch/parallel.hpp"
#include "driftwatch/rng.hpp"
#include "driftwatch/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <sstream>

namespace driftwatch {

namespace {

constexpr double kMaxFailureRate = 0.1;
constexpr int kHistogramBins = 40;

std::string failure_reason(const std::exception& e) {
    if (dynamic_cast<const NumericalBlowup*>(&e)) return "NumericalBlowup";
    if (dynamic_cast<const NonPositiveDefiniteDiffusion*>(&e)) return "NonPositiveDefiniteDiffusion";
    if (dynamic_cast<const SingularInformation*>(&e)) return "SingularInformation";
    if (dynamic_cast<const DegenerateRegression*>(&e)) return "DegenerateRegression";
    if (dynamic_cast<const OptimizerFailure*>(&e)) return "OptimizerFailure";
    if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
    return "Error";
}

struct TestOutcome {
    bool ok = false;
    double statistic = 0.0;
    bool reject = false;
    std::string failure;
};

using ReplicationOutcome = std::vector<TestOutcome>;

bool needs_beta(const std::vector<TestKind>& tests) {
    return std::any_of(tests.begin(), tests.end(), [](TestKind t) { return t != TestKind::Alpha; });
}

ScenarioSpec ou_case(std::string name, std::string group, Theta pre, std::optional<Theta> post) {
    ChangeScenario sc;
    sc.pre = pre;
    if (post) {
        sc.post = *post;
        sc.change_fraction = 0.5;
    } else {
        sc.post = pre;
    }
    return {std::move(name), std::move(group), std::move(sc)};
}

}  // namespace

void ExperimentConfig::validate(const ModelSpec& model) const {
    if (replications < 1) throw DomainError("replications must be >= 1");
    if (cases.empty()) throw DomainError("experiment needs at least one case");
    if (n_list.empty()) throw DomainError("experiment needs at least one sample size");
    if (tests.empty()) throw DomainError("experiment needs at least one test");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("level must lie in (0, 1)");
    if (substeps < 1) throw DomainError("substeps must be >= 1");
    if (step && !(*step > 0.0)) throw DomainError("step must be positive");
    if (x0.size() != model.state_dim()) throw DimensionMismatch("x0 does not match the model");
    for (std::size_t n : n_list) {
        if (n < 10) throw DomainError("sample sizes must be >= 10");
    }
    std::vector<std::string> names;
    for (const auto& c : cases) {
        c.scenario.validate(model);
        names.push_back(c.name);
    }
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
        throw DomainError("scenario names must be unique");
    }
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["model"] = model;
    j["base"] = theta_to_json(base);
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : cases) {
        nlohmann::json e;
        e["name"] = c.name;
        e["group"] = c.group;
        e["pre"] = theta_to_json(c.scenario.pre);
        if (c.scenario.change_fraction) {
            e["post"] = theta_to_json(c.scenario.post);
            e["change_fraction"] = *c.scenario.change_fraction;
        }
        cs.push_back(std::move(e));
    }
    j["cases"] = std::move(cs);
    j["n_list"] = n_list;
    j["replications"] = replications;
    j["replication_offset"] = replication_offset;
    j["level"] = level;
    j["master_seed"] = master_seed;
    std::vector<std::string> names;
    for (TestKind t : tests) names.push_back(to_string(t));
    j["tests"] = names;
    j["adaptive"] = adaptive;
    j["substeps"] = substeps;
    j["x0"] = vector_to_json(x0);
    j["hn"] = step ? nlohmann::json(*step) : nlohmann::json("auto");
    j["critvals"] = {{"grid", critvals.grid_points}, {"reps", critvals.replications},
                     {"seed", critvals.seed}};
    j["threads"] = threads;
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.model = j.value("model", c.model);
    if (j.contains("base")) c.base = theta_from_json(j.at("base"));
    for (const auto& e : j.at("cases")) {
        ScenarioSpec s;
        s.name = e.at("name").get<std::string>();
        s.group = e.value("group", std::string("cases"));
        s.scenario.pre = e.contains("pre") ? theta_from_json(e.at("pre")) : c.base;
        if (e.contains("post") && !e.at("post").is_null()) {
            s.scenario.post = theta_from_json(e.at("post"));
            s.scenario.change_fraction = e.value("change_fraction", 0.5);
        } else {
            s.scenario.post = s.scenario.pre;
        }
        c.cases.push_back(std::move(s));
    }
    if (j.contains("n_list")) c.n_list = j.at("n_list").get<std::vector<std::size_t>>();
    c.replications = j.value("replications", c.replications);
    c.replication_offset = j.value("replication_offset", c.replication_offset);
    c.level = j.value("level", c.level);
    c.master_seed = j.value("master_seed", c.master_seed);
    if (j.contains("tests")) {
        c.tests.clear();
        for (const auto& t : j.at("tests")) c.tests.push_back(parse_test_kind(t.get<std::string>()));
    }
    c.adaptive = j.value("adaptive", c.adaptive);
    c.substeps = j.value("substeps", c.substeps);
    if (j.contains("x0")) c.x0 = vector_from_json(j.at("x0"));
    if (j.contains("hn")) {
        const auto& hn = j.at("hn");
        if (hn.is_string()) {
            if (hn.get<std::string>() != "auto") throw DomainError("hn must be a number or \"auto\"");
            c.step.reset();
        } else {
            c.step = hn.get<double>();
        }
    }
    if (j.contains("critvals")) {
        const auto& cv = j.at("critvals");
        c.critvals.grid_points = cv.value("grid", c.critvals.grid_points);
        c.critvals.replications = cv.value("reps", c.critvals.replications);
        c.critvals.seed = cv.value("seed", c.critvals.seed);
    }
    c.threads = j.value("threads", c.threads);
    return c;
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t n, std::uint64_t r) {
    return derive_replication_seed(derive_replication_seed(master_seed, n), r);
}

CampaignResult run_campaign(const ExperimentConfig& config, const ModelSpec& model,
                            const CriticalValueTable& critvals, const ProgressFn& progress) {
    config.validate(model);
    CampaignResult result;
    result.n_list = config.n_list;
    result.tests = config.tests;
    result.beta_dim = model.beta_dim();
    result.level = config.level;
    for (const auto& c : config.cases) result.scenarios.emplace_back(c.name, c.group);

    // Fail fast on missing critical values rather than once per replication.
    const bool adaptive = config.adaptive;
    for (TestKind t : config.tests) {
        const int k = t == TestKind::Beta2 ? model.beta_dim() : 1;
        critvals.value(k, config.level);
    }
    if (adaptive) critvals.value(1, config.level);

    const bool beta_needed = needs_beta(config.tests);
    const std::size_t reps = static_cast<std::size_t>(config.replications);
    const std::size_t total = reps * config.cases.size() * config.n_list.size();
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;

    EstimateOptions estimate;
    for (std::size_t n : config.n_list) {
        const double step = config.step.value_or(default_step(n));
        for (const auto& spec : config.cases) {
            std::vector<ReplicationOutcome> outcomes(reps);
            parallel_for<int>(reps, config.threads, [&](std::size_t r, int&) {
                ReplicationOutcome& out = outcomes[r];
                out.assign(config.tests.size(), TestOutcome{});
                const auto fail_all = [&](const std::exception& e) {
                    for (auto& o : out) o.failure = failure_reason(e);
                };
                try {
                    SimulationPlan plan;
                    plan.model = &model;
                    plan.n = n;
                    plan.step = step;
                    plan.x0 = config.x0;
                    plan.scenario = spec.scenario;
                    plan.substeps = config.substeps;
                    plan.seed = replication_seed(config.master_seed, n, config.replication_offset + r);
                    const ObservationSeries series = simulate_path(plan);
                    const QmleResult alpha_fit = fit_alpha(series, model, estimate);

                    bool alpha_rejected = false;
                    if (adaptive) {
                        alpha_rejected =
                            evaluate_test(TestKind::Alpha, series, model, alpha_fit, config.level, critvals)
                                .reject;
                    }
                    std::optional<QmleResult> beta_fit;
                    std::string beta_failure;
                    if (beta_needed) {
                        try {
                            beta_fit = fit_beta(series, model, alpha_fit.alpha_hat, estimate);
                        } catch (const Error& e) {
                            beta_failure = failure_reason(e);
                        }
                    }
                    for (std::size_t t = 0; t < config.tests.size(); ++t) {
                        const TestKind kind = config.tests[t];
                        TestOutcome& o = out[t];
                        if (kind != TestKind::Alpha && !beta_fit) {
                            o.failure = beta_failure;
                            continue;
                        }
                        try {
                            const TestReport rep = evaluate_test(
                                kind, series, model, kind == TestKind::Alpha ? alpha_fit : *beta_fit,
                                config.level, critvals);
                            o.ok = true;
                            o.statistic = rep.statistic;
                            o.reject = rep.reject && !(adaptive && kind != TestKind::Alpha && alpha_rejected);
                        } catch (const Error& e) {
                            o.failure = failure_reason(e);
                        }
                    }
                } catch (const Error& e) {
                    fail_all(e);
                }
                const std::size_t now = ++done;
                if (progress) {
                    std::lock_guard lock(progress_mutex);
                    progress(now, total);
                }
            });

            for (std::size_t t = 0; t < config.tests.size(); ++t) {
                CellResult cell;
                cell.replications = config.replications;
                double sum = 0.0;
                for (const auto& rep : outcomes) {
                    const TestOutcome& o = rep[t];
                    if (!o.ok) {
                        ++cell.failures;
                        ++cell.failure_reasons[o.failure];
                        continue;
                    }
                    cell.statistics.push_back(o.statistic);
                    sum += o.statistic;
                    if (o.reject) ++cell.rejections;
                }
                cell.rate = static_cast<double>(cell.rejections) / static_cast<double>(cell.replications);
                cell.mean_statistic =
                    cell.statistics.empty() ? 0.0 : sum / static_cast<double>(cell.statistics.size());
                cell.aborted = static_cast<double>(cell.failures) >
                               kMaxFailureRate * static_cast<double>(cell.replications);
                result.per_cell[CellKey{spec.name, n, config.tests[t]}] = std::move(cell);
            }
        }
    }
    return result;
}

nlohmann::json CampaignResult::to_json() const {
    nlohmann::json j;
    nlohmann::json sc = nlohmann::json::array();
    for (const auto& [name, group] : scenarios) sc.push_back({{"name", name}, {"group", group}});
    j["scenarios"] = sc;
    j["n_list"] = n_list;
    std::vector<std::string> names;
    for (TestKind t : tests) names.push_back(to_string(t));
    j["tests"] = names;
    j["beta_dim"] = beta_dim;
    j["level"] = level;
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [key, cell] : per_cell) {
        cells.push_back({{"scenario", key.scenario},
                         {"n", key.n},
                         {"test", to_string(key.test)},
                         {"rejections", cell.rejections},
                         {"replications", cell.replications},
                         {"rate", cell.rate},
                         {"mean_statistic", cell.mean_statistic},
                         {"failures", cell.failures},
                         {"failure_reasons", cell.failure_reasons},
                         {"aborted", cell.aborted},
                         {"statistics", cell.statistics}});
    }
    j["cells"] = std::move(cells);
    return j;
}

CampaignResult CampaignResult::from_json(const nlohmann::json& j) {
    CampaignResult r;
    for (const auto& s : j.at("scenarios")) {
        r.scenarios.emplace_back(s.at("name").get<std::string>(), s.at("group").get<std::string>());
    }
    r.n_list = j.at("n_list").get<std::vector<std::size_t>>();
    for (const auto& t : j.at("tests")) r.tests.push_back(parse_test_kind(t.get<std::string>()));
    r.beta_dim = j.value("beta_dim", 2);
    r.level = j.value("level", 0.1);
    for (const auto& c : j.at("cells")) {
        CellResult cell;
        cell.rejections = c.at("rejections").get<int>();
        cell.replications = c.at("replications").get<int>();
        cell.rate = c.at("rate").get<double>();
        cell.mean_statistic = c.at("mean_statistic").get<double>();
        cell.failures = c.at("failures").get<int>();
        cell.failure_reasons = c.at("failure_reasons").get<std::map<std::string, int>>();
        cell.aborted = c.at("aborted").get<bool>();
        cell.statistics = c.at("statistics").get<std::vector<double>>();
        r.per_cell[CellKey{c.at("scenario").get<std::string>(), c.at("n").get<std::size_t>(),
                           parse_test_kind(c.at("test").get<std::string>())}] = std::move(cell);
    }
    return r;
}

std::string emit_table(const CampaignResult& result, TableFormat format,
                       const std::optional<std::string>& group) {
    std::vector<std::string> columns;
    for (const auto& [name, g] : result.scenarios) {
        if (!group || g == *group) columns.push_back(name);
    }
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"n", "test"};
    header.insert(header.end(), columns.begin(), columns.end());
    rows.push_back(header);
    for (std::size_t n : result.n_list) {
        for (TestKind t : result.tests) {
            std::vector<std::string> row{std::to_string(n), to_string(t)};
            bool any = false;
            for (const auto& col : columns) {
                const auto it = result.per_cell.find(CellKey{col, n, t});
                if (it == result.per_cell.end()) {
                    row.emplace_back("");
                } else {
                    any = true;
                    row.push_back(format_double(it->second.rate));
                }
            }
            if (any) rows.push_back(std::move(row));
        }
    }

    std::ostringstream out;
    if (format == TableFormat::Csv) {
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
            out << '\n';
        }
        return out.str();
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            out << (c ? "  " : "") << std::setw(static_cast<int>(widths[c]))
                << (c < 2 ? std::left : std::right) << rows[r][c];
        }
        out << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t w : widths) total += w + 2;
            out << std::string(total - 2, '-') << '\n';
        }
    }
    return out.str();
}

double empirical_cdf(const std::vector<double>& sorted, double x) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

double ks_distance(const std::vector<double>& sorted, const std::function<double(double)>& cdf) {
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return d;
}

DistributionData emit_distribution(const CampaignResult& result, const CellKey& cell,
                                   const std::vector<double>* reference_sample) {
    const auto it = result.per_cell.find(cell);
    if (it == result.per_cell.end()) throw DomainError("no such cell");
    const auto& stats = it->second.statistics;
    if (stats.size() < 100) throw InsufficientSample("distribution needs >= 100 statistics");

    std::vector<double> generated;
    std::function<double(double)> cdf;
    if (cell.test == TestKind::Beta2 && result.beta_dim > 1) {
        if (reference_sample == nullptr) {
            generated = sample_bridge_sups(result.beta_dim, 1000, 10000, 7);
            reference_sample = &generated;
        }
        cdf = [reference_sample](double x) { return empirical_cdf(*reference_sample, x); };
    } else {
        cdf = kolmogorov_cdf;
    }

    DistributionData data;
    data.sorted = stats;
    std::sort(data.sorted.begin(), data.sorted.end());
    const double m = static_cast<double>(data.sorted.size());
    double upper = data.sorted.back();
    if (!(upper > 0.0)) upper = 1.0;
    const double width = upper / kHistogramBins;
    data.bin_edges.resize(kHistogramBins + 1);
    for (int b = 0; b <= kHistogramBins; ++b) data.bin_edges[static_cast<std::size_t>(b)] = b * width;
    data.bin_edges.back() = upper;
    data.counts.assign(kHistogramBins, 0);
    for (double s : data.sorted) {
        auto b = static_cast<int>(std::floor(s / width));
        b = std::clamp(b, 0, kHistogramBins - 1);
        ++data.counts[static_cast<std::size_t>(b)];
    }
    for (int b = 0; b < kHistogramBins; ++b) {
        const auto bi = static_cast<std::size_t>(b);
        data.expected_counts.push_back(m * (cdf(data.bin_edges[bi + 1]) - cdf(data.bin_edges[bi])));
    }
    for (std::size_t i = 0; i < data.sorted.size(); ++i) {
        data.ecdf.push_back(empirical_cdf(data.sorted, data.sorted[i]));
        data.reference_cdf.push_back(cdf(data.sorted[i]));
    }
    data.ks_distance = ks_distance(data.sorted, cdf);
    return data;
}

std::string distribution_csv(const DistributionData& data) {
    std::ostringstream out;
    out << "kind,x,y,reference\n";
    for (std::size_t b = 0; b < data.counts.size(); ++b) {
        out << "hist," << format_double(data.bin_edges[b]) << ',' << data.counts[b] << ','
            << format_double(data.expected_counts[b]) << '\n';
    }
    for (std::size_t i = 0; i < data.sorted.size(); ++i) {
        out << "ecdf," << format_double(data.sorted[i]) << ',' << format_double(data.ecdf[i]) << ','
            << format_double(data.reference_cdf[i]) << '\n';
    }
    return out.str();
}

std::vector<ScenarioSpec> case1_scenarios() {
    return {ou_case("theta_1_1_1", "case1", ou_theta(1, 1, 1), std::nullopt),
            ou_case("theta_0.5_1_0", "case1", ou_theta(0.5, 1, 0), std::nullopt),
            ou_case("theta_1.5_1.5_-1", "case1", ou_theta(1.5, 1.5, -1), std::nullopt),
            ou_case("theta_2_3_0.5", "case1", ou_theta(2, 3, 0.5), std::nullopt)};
}

std::vector<ScenarioSpec> case2_scenarios() {
    std::vector<ScenarioSpec> out;
    for (double a : {1.01, 1.05, 1.1, 1.5}) {
        out.push_back(ou_case("alpha_" + format_double(a), "case2", ou_theta(1, 1, 1), ou_theta(a, 1, 1)));
    }
    return out;
}

std::vector<ScenarioSpec> case3_beta_scenarios() {
    std::vector<ScenarioSpec> out;
    for (double b : {1.1, 1.5, 3.0, 5.0}) {
        out.push_back(ou_case("beta_" + format_double(b), "case3_beta", ou_theta(1, 1, 1), ou_theta(1, b, 1)));
    }
    return out;
}

std::vector<ScenarioSpec> case3_gamma_scenarios() {
    std::vector<ScenarioSpec> out;
    for (double g : {0.9, 0.5, 0.0, -1.0}) {
        out.push_back(ou_case("gamma_" + format_double(g), "case3_gamma", ou_theta(1, 1, 1), ou_theta(1, 1, g)));
    }
    return out;
}

std::vector<ScenarioSpec> case3_joint_scenarios() {
    std::vector<ScenarioSpec> out;
    for (auto [b, g] : {std::pair{3.0, 0.5}, std::pair{3.0, 0.0}, std::pair{5.0, 0.5}, std::pair{5.0, 0.0}}) {
        out.push_back(ou_case("beta_gamma_" + format_double(b) + "_" + format_double(g), "case3_joint",
                              ou_theta(1, 1, 1), ou_theta(1, b, g)));
    }
    return out;
}

}  // namespace driftwatch
