#include "driftwatch/cli.hpp"

#include "driftwatch/changepoint.hpp"
#include "driftwatch/critvals.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/estimate.hpp"
#include "driftwatch/experiment.hpp"
#include "driftwatch/io.hpp"
#include "driftwatch/json_codec.hpp"
#include "driftwatch/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace driftwatch {

namespace {

namespace fs = std::filesystem;

std::uint64_t env_seed(std::uint64_t fallback) {
    if (const char* s = std::getenv("DRIFTWATCH_SEED"); s != nullptr && *s != '\0') {
        return std::stoull(s);
    }
    return fallback;
}

std::optional<fs::path> env_critvals_cache() {
    if (const char* s = std::getenv("DRIFTWATCH_CRITVALS"); s != nullptr && *s != '\0') return fs::path(s);
    return std::nullopt;
}

ModelSpec model_by_name(const std::string& name) {
    if (name == "ou") return make_ou_model();
    throw DomainError("unknown model '" + name + "' (the CLI supports \"ou\")");
}

/// "auto" -> n^{-2/3}; a number -> that step; empty -> keep the file's spacing.
ObservationSeries apply_step(ObservationSeries series, const std::string& hn) {
    if (hn.empty()) return series;
    const double step = hn == "auto" ? default_step(series.n()) : parse_double(hn, 0);
    return ObservationSeries(series.values(), step);
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << text;
}

CriticalValueTable obtain_critvals(const std::vector<int>& dims, const std::vector<double>& levels,
                                   int grid, int reps, std::uint64_t seed, int threads,
                                   const std::string& cache_flag) {
    std::optional<fs::path> cache = cache_flag.empty() ? env_critvals_cache() : fs::path(cache_flag);
    if (cache) return CriticalValueCache(*cache).get(dims, levels, grid, reps, seed, threads);
    return estimate_quantiles(dims, levels, grid, reps, seed, threads);
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_';
        if (!ok) c = '_';
    }
    return s;
}

struct SimulateArgs {
    std::string model = "ou";
    double alpha = 1.0, beta = 1.0, gamma = 1.0;
    std::size_t n = 8000;
    std::string hn = "auto";
    std::uint64_t seed = 42;
    double x0 = 1.0;
    int substeps = 10;
    std::optional<double> change_at, post_alpha, post_beta, post_gamma;
    std::string out;
};

struct SeriesArgs {
    std::string model = "ou";
    std::string in;
    std::string hn;
    std::string out;
    bool generic = false;
};

struct TestArgs {
    SeriesArgs series;
    double level = 0.1;
    std::string variant = "2";
    bool adaptive = false;
    bool exit_on_reject = false;
    std::string profile;
    std::string cache;
    int cv_grid = 10000;
    int cv_reps = 10000;
    std::uint64_t cv_seed = 7;
    int threads = 1;
};

struct CritvalsArgs {
    std::vector<int> k{1};
    std::vector<double> levels{0.1};
    int grid = 10000;
    int reps = 10000;
    std::uint64_t seed = 7;
    int threads = 1;
    std::string out;
    std::string cache;
};

struct ExperimentArgs {
    std::string config;
    std::string out_dir = "results";
    std::optional<int> threads;
    bool progress = false;
    std::string cache;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    const ModelSpec model = model_by_name(a.model);
    SimulationPlan plan;
    plan.model = &model;
    plan.n = a.n;
    plan.step = a.hn == "auto" ? default_step(a.n) : parse_double(a.hn, 0);
    plan.x0 = Vector::Constant(1, a.x0);
    plan.substeps = a.substeps;
    plan.seed = a.seed;
    const Theta pre = ou_theta(a.alpha, a.beta, a.gamma);
    plan.scenario = ChangeScenario::none(pre);
    if (a.change_at) {
        plan.scenario.post = ou_theta(a.post_alpha.value_or(a.alpha), a.post_beta.value_or(a.beta),
                                      a.post_gamma.value_or(a.gamma));
        plan.scenario.change_fraction = *a.change_at;
    } else if (a.post_alpha || a.post_beta || a.post_gamma) {
        throw DomainError("--post-* flags require --change-at");
    }
    const ObservationSeries series = simulate_path(plan);
    if (a.out.empty() || a.out == "-") {
        write_series(out, series);
    } else {
        write_series(fs::path(a.out), series);
    }
    return 0;
}

ObservationSeries load_series(const SeriesArgs& a, const ModelSpec& model) {
    if (a.in.empty()) throw DomainError("--in is required");
    return apply_step(read_series(fs::path(a.in), model.state_dim()), a.hn);
}

int run_estimate(const SeriesArgs& a, std::ostream& out) {
    const ModelSpec model = model_by_name(a.model);
    const ObservationSeries series = load_series(a, model);
    EstimateOptions opts;
    opts.use_closed_form = !a.generic;
    const QmleResult fit = fit_adaptive(series, model, opts);
    write_text(a.out, qmle_to_json(fit).dump(2) + "\n", out);
    return 0;
}

int run_test(const TestArgs& a, std::ostream& out) {
    const ModelSpec model = model_by_name(a.series.model);
    const ObservationSeries series = load_series(a.series, model);
    if (a.variant != "1" && a.variant != "2" && a.variant != "both") {
        throw DomainError("--variant must be 1, 2 or both");
    }
    const bool v1 = a.variant == "1" || a.variant == "both";
    const bool v2 = a.variant == "2" || a.variant == "both";
    std::vector<int> dims{1};
    if (v2 && model.beta_dim() != 1) dims.push_back(model.beta_dim());
    const CriticalValueTable critvals =
        obtain_critvals(dims, {a.level}, a.cv_grid, a.cv_reps, a.cv_seed, a.threads, a.cache);

    EstimateOptions est;
    est.use_closed_form = !a.series.generic;
    std::vector<TestReport> reports;
    if (a.adaptive) {
        AdaptiveOptions opts;
        opts.run_variant1 = v1;
        opts.run_variant2 = v2;
        opts.test.estimate = est;
        AdaptiveReport ar = adaptive_test(series, model, a.level, critvals, opts);
        reports.push_back(std::move(ar.alpha));
        if (ar.beta1) reports.push_back(std::move(*ar.beta1));
        if (ar.beta2) reports.push_back(std::move(*ar.beta2));
    } else {
        const QmleResult alpha_fit = fit_alpha(series, model, est);
        reports.push_back(evaluate_test(TestKind::Alpha, series, model, alpha_fit, a.level, critvals));
        QmleResult fit = fit_beta(series, model, alpha_fit.alpha_hat, est);
        fit.warnings.insert(fit.warnings.begin(), alpha_fit.warnings.begin(), alpha_fit.warnings.end());
        if (v1) reports.push_back(evaluate_test(TestKind::Beta1, series, model, fit, a.level, critvals));
        if (v2) reports.push_back(evaluate_test(TestKind::Beta2, series, model, fit, a.level, critvals));
    }

    nlohmann::json j;
    j["n"] = series.n();
    j["hn"] = series.step();
    j["adaptive"] = a.adaptive;
    j["reports"] = nlohmann::json::array();
    bool any_reject = false;
    for (const auto& r : reports) {
        j["reports"].push_back(report_to_json(r));
        any_reject = any_reject || r.reject;
    }
    write_text(a.series.out, j.dump(2) + "\n", out);

    if (!a.profile.empty()) {
        std::ofstream f(a.profile);
        if (!f) throw Error("cannot open '" + a.profile + "' for writing");
        f << 'k';
        for (const auto& r : reports) f << ',' << to_string(r.test);
        f << '\n';
        for (std::size_t k = 1; k <= series.n(); ++k) {
            f << k;
            for (const auto& r : reports) {
                const auto row = static_cast<Eigen::Index>(k - 1);
                f << ',' << format_double(r.profile.scale * r.profile.centered.row(row).norm());
            }
            f << '\n';
        }
    }
    return a.exit_on_reject && any_reject ? 2 : 0;
}

int run_critvals(const CritvalsArgs& a, std::ostream& out) {
    const CriticalValueTable table =
        obtain_critvals(a.k, a.levels, a.grid, a.reps, a.seed, a.threads, a.cache);
    write_text(a.out, table.to_json().dump(2) + "\n", out);
    return 0;
}

int run_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
    std::ifstream in(a.config);
    if (!in) throw Error("cannot open config '" + a.config + "'");
    ExperimentConfig config = ExperimentConfig::from_json(nlohmann::json::parse(in));
    if (a.threads) config.threads = *a.threads;
    const ModelSpec model = model_by_name(config.model);

    const auto start = std::chrono::steady_clock::now();
    std::vector<int> dims{1};
    if (model.beta_dim() != 1) dims.push_back(model.beta_dim());
    const CriticalValueTable critvals =
        obtain_critvals(dims, {config.level}, config.critvals.grid_points, config.critvals.replications,
                        config.critvals.seed, config.threads, a.cache);

    ProgressFn progress;
    if (a.progress) {
        progress = [&err](std::size_t done, std::size_t total) {
            if (done == total || done % 100 == 0) err << "\rreplications " << done << "/" << total << std::flush;
            if (done == total) err << '\n';
        };
    }
    const CampaignResult result = run_campaign(config, model, critvals, progress);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    std::vector<std::string> groups;
    for (const auto& [name, group] : result.scenarios) {
        if (std::find(groups.begin(), groups.end(), group) == groups.end()) groups.push_back(group);
    }
    std::vector<std::string> files;
    for (const auto& g : groups) {
        const std::string file = "table_" + sanitize(g) + ".csv";
        write_text((dir / file).string(), emit_table(result, TableFormat::Csv, g), out);
        files.push_back(file);
        out << "== " << g << " ==\n" << emit_table(result, TableFormat::Text, g);
    }
    std::optional<std::vector<double>> reference;
    for (const auto& [key, cell] : result.per_cell) {
        if (cell.statistics.size() < 100) continue;
        if (key.test == TestKind::Beta2 && !reference) {
            reference = sample_bridge_sups(result.beta_dim, config.critvals.grid_points,
                                           config.critvals.replications,
                                           derive_replication_seed(config.critvals.seed,
                                                                   static_cast<std::uint64_t>(result.beta_dim)),
                                           config.threads);
        }
        const DistributionData data =
            emit_distribution(result, key, key.test == TestKind::Beta2 ? &*reference : nullptr);
        const std::string file = "dist_" + sanitize(key.scenario) + "_n" + std::to_string(key.n) + "_" +
                                 to_string(key.test) + ".csv";
        write_text((dir / file).string(), distribution_csv(data), out);
        files.push_back(file);
    }
    write_text((dir / "campaign.json").string(), result.to_json().dump(2) + "\n", out);

    nlohmann::json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = config.to_json();
    manifest["master_seed"] = config.master_seed;
    manifest["critical_values"] = critvals.to_json();
    manifest["runtime_seconds"] = seconds;
    manifest["files"] = files;
    write_text((dir / "MANIFEST.json").string(), manifest.dump(2) + "\n", out);
    return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"driftwatch: cusum tests for parameter changes in discretely observed diffusions"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    SimulateArgs sim;
    sim.seed = env_seed(sim.seed);
    auto* simulate = app.add_subcommand("simulate", "Simulate an OU path by Euler-Maruyama");
    simulate->add_option("--model", sim.model, "Model name")->capture_default_str();
    simulate->add_option("--alpha", sim.alpha, "Diffusion parameter")->capture_default_str();
    simulate->add_option("--beta", sim.beta, "Mean-reversion speed")->capture_default_str();
    simulate->add_option("--gamma", sim.gamma, "Long-run mean")->capture_default_str();
    simulate->add_option("--n", sim.n, "Number of observation intervals")->capture_default_str();
    simulate->add_option("--hn", sim.hn, "Sampling step, or 'auto' for n^{-2/3}")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Seed (default $DRIFTWATCH_SEED or 42)")->capture_default_str();
    simulate->add_option("--x0", sim.x0, "Initial state")->capture_default_str();
    simulate->add_option("--substeps", sim.substeps, "Euler substeps per interval")->capture_default_str();
    simulate->add_option("--change-at", sim.change_at, "Change fraction t* in (0, 1)");
    simulate->add_option("--post-alpha", sim.post_alpha, "alpha after the change");
    simulate->add_option("--post-beta", sim.post_beta, "beta after the change");
    simulate->add_option("--post-gamma", sim.post_gamma, "gamma after the change");
    simulate->add_option("--out", sim.out, "Output CSV (stdout if omitted)");

    SeriesArgs est;
    auto* estimate = app.add_subcommand("estimate", "Adaptive QMLE of (alpha, beta)");
    estimate->add_option("--model", est.model, "Model name")->capture_default_str();
    estimate->add_option("--in", est.in, "Input series CSV")->required();
    estimate->add_option("--hn", est.hn, "Sampling step override, or 'auto'");
    estimate->add_option("--out", est.out, "Output JSON (stdout if omitted)");
    estimate->add_flag("--generic", est.generic, "Use the Nelder-Mead optimizer instead of closed forms");

    TestArgs tst;
    auto* test = app.add_subcommand("test", "Cusum change-point tests");
    test->add_option("--model", tst.series.model, "Model name")->capture_default_str();
    test->add_option("--in", tst.series.in, "Input series CSV")->required();
    test->add_option("--hn", tst.series.hn, "Sampling step override, or 'auto'");
    test->add_option("--out", tst.series.out, "Output JSON (stdout if omitted)");
    test->add_flag("--generic", tst.series.generic, "Use the Nelder-Mead optimizer instead of closed forms");
    test->add_option("--level", tst.level, "Significance level")->capture_default_str();
    test->add_option("--variant", tst.variant, "Drift test variant: 1, 2 or both")->capture_default_str();
    test->add_flag("--adaptive", tst.adaptive, "Run drift tests only if no diffusion change is found");
    test->add_flag("--exit-on-reject", tst.exit_on_reject, "Exit with status 2 if any test rejects");
    test->add_option("--profile", tst.profile, "Write scaled cusum paths to this CSV");
    test->add_option("--critvals-cache", tst.cache, "Critical value cache (default $DRIFTWATCH_CRITVALS)");
    test->add_option("--cv-grid", tst.cv_grid, "Bridge grid points")->capture_default_str();
    test->add_option("--cv-reps", tst.cv_reps, "Bridge replications")->capture_default_str();
    test->add_option("--cv-seed", tst.cv_seed, "Bridge seed")->capture_default_str();
    test->add_option("--threads", tst.threads, "Worker threads")->capture_default_str();

    CritvalsArgs cv;
    auto* critvals = app.add_subcommand("critvals", "Monte Carlo critical values of sup |B_k^0|");
    critvals->add_option("--k", cv.k, "Bridge dimensions")->capture_default_str();
    critvals->add_option("--levels", cv.levels, "Upper tail levels")->capture_default_str();
    critvals->add_option("--grid", cv.grid, "Grid points on [0, 1]")->capture_default_str();
    critvals->add_option("--reps", cv.reps, "Replications")->capture_default_str();
    critvals->add_option("--seed", cv.seed, "Seed")->capture_default_str();
    critvals->add_option("--threads", cv.threads, "Worker threads")->capture_default_str();
    critvals->add_option("--out", cv.out, "Output JSON (stdout if omitted)");
    critvals->add_option("--critvals-cache", cv.cache, "Critical value cache (default $DRIFTWATCH_CRITVALS)");

    ExperimentArgs ex;
    auto* experiment = app.add_subcommand("experiment", "Run a size/power campaign");
    experiment->add_option("--config", ex.config, "Experiment JSON")->required();
    experiment->add_option("--out-dir", ex.out_dir, "Output directory")->capture_default_str();
    experiment->add_option("--threads", ex.threads, "Worker threads (results do not depend on it)");
    experiment->add_flag("--progress", ex.progress, "Report progress on stderr");
    experiment->add_option("--critvals-cache", ex.cache, "Critical value cache (default $DRIFTWATCH_CRITVALS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        if (code == 0) return 0;
        err << '\n' << app.help();
        return 1;
    }

    try {
        if (*simulate) return run_simulate(sim, out);
        if (*estimate) return run_estimate(est, out);
        if (*test) return run_test(tst, out);
        if (*critvals) return run_critvals(cv, out);
        if (*experiment) return run_experiment(ex, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace driftwatch
