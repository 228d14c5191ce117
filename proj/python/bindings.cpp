#include "driftwatch/changepoint.hpp"
#include "driftwatch/critvals.hpp"
#include "driftwatch/errors.hpp"
#include "driftwatch/estimate.hpp"
#include "driftwatch/experiment.hpp"
#include "driftwatch/json_codec.hpp"
#include "driftwatch/simulate.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>

namespace py = pybind11;
using namespace driftwatch;

namespace {

ObservationSeries as_series(const Matrix& values, double step) {
    if (values.cols() == 1 || values.rows() == 1) {
        Matrix column = values.cols() == 1 ? values : Matrix(values.transpose());
        return ObservationSeries(std::move(column), step);
    }
    return ObservationSeries(values, step);
}

py::object from_json(const nlohmann::json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

Matrix simulate_ou(std::size_t n, double alpha, double beta, double gamma, std::uint64_t seed,
                   std::optional<double> step, double x0, int substeps, std::optional<double> change_at,
                   std::optional<double> post_alpha, std::optional<double> post_beta,
                   std::optional<double> post_gamma) {
    static const ModelSpec ou = make_ou_model();
    SimulationPlan plan;
    plan.model = &ou;
    plan.n = n;
    plan.step = step.value_or(default_step(n));
    plan.x0 = Vector::Constant(1, x0);
    plan.substeps = substeps;
    plan.seed = seed;
    plan.scenario = ChangeScenario::none(ou_theta(alpha, beta, gamma));
    if (change_at) {
        plan.scenario.post = ou_theta(post_alpha.value_or(alpha), post_beta.value_or(beta), post_gamma.value_or(gamma));
        plan.scenario.change_fraction = change_at;
    }
    py::gil_scoped_release release;
    return simulate_path(plan).values();
}

py::object estimate_ou(const Matrix& values, double step, bool generic) {
    EstimateOptions opts;
    opts.use_closed_form = !generic;
    return from_json(qmle_to_json(fit_adaptive(as_series(values, step), make_ou_model(), opts)));
}

py::object test_ou(const Matrix& values, double step, double level, const std::string& variant, bool adaptive,
                   int cv_grid, int cv_reps, std::uint64_t cv_seed) {
    const ModelSpec ou = make_ou_model();
    const ObservationSeries series = as_series(values, step);
    const bool v1 = variant == "1" || variant == "both";
    const bool v2 = variant == "2" || variant == "both";
    if (!v1 && !v2) throw DomainError("variant must be '1', '2' or 'both'");
    const CriticalValueTable cv = estimate_quantiles({1, 2}, {level}, cv_grid, cv_reps, cv_seed);
    std::vector<TestReport> reports;
    if (adaptive) {
        AdaptiveOptions opts;
        opts.run_variant1 = v1;
        opts.run_variant2 = v2;
        AdaptiveReport r = adaptive_test(series, ou, level, cv, opts);
        reports.push_back(std::move(r.alpha));
        if (r.beta1) reports.push_back(std::move(*r.beta1));
        if (r.beta2) reports.push_back(std::move(*r.beta2));
    } else {
        const QmleResult fit = fit_adaptive(series, ou);
        reports.push_back(evaluate_test(TestKind::Alpha, series, ou, fit, level, cv));
        if (v1) reports.push_back(evaluate_test(TestKind::Beta1, series, ou, fit, level, cv));
        if (v2) reports.push_back(evaluate_test(TestKind::Beta2, series, ou, fit, level, cv));
    }
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : reports) out.push_back(report_to_json(r));
    return from_json(out);
}

py::object critical_values(const std::vector<int>& k, const std::vector<double>& levels, int grid, int reps,
                           std::uint64_t seed, int threads) {
    CriticalValueTable t;
    {
        py::gil_scoped_release release;
        t = estimate_quantiles(k, levels, grid, reps, seed, threads);
    }
    return from_json(t.to_json());
}

py::object run_experiment(const std::string& config_json) {
    const ExperimentConfig config = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
    const ModelSpec ou = make_ou_model();
    if (config.model != "ou") throw DomainError("only the 'ou' model is available from Python");
    CampaignResult result;
    {
        py::gil_scoped_release release;
        const CriticalValueTable cv =
            estimate_quantiles({1, ou.beta_dim()}, {config.level}, config.critvals.grid_points,
                               config.critvals.replications, config.critvals.seed, config.threads);
        result = run_campaign(config, ou, cv);
    }
    return from_json(result.to_json());
}

double cusum(const std::vector<double>& summands, double scale) {
    return cusum_statistic(summands, scale).statistic;
}

}  // namespace

PYBIND11_MODULE(_driftwatch, m) {
    m.doc() = "Cusum change-point tests for discretely observed diffusions";

    py::register_exception<Error>(m, "DriftwatchError", PyExc_RuntimeError);

    m.def("default_step", &default_step, py::arg("n"));
    m.def("simulate_ou", &simulate_ou, py::arg("n"), py::arg("alpha") = 1.0, py::arg("beta") = 1.0,
          py::arg("gamma") = 1.0, py::arg("seed") = 42, py::arg("step") = py::none(), py::arg("x0") = 1.0,
          py::arg("substeps") = 10, py::arg("change_at") = py::none(), py::arg("post_alpha") = py::none(),
          py::arg("post_beta") = py::none(), py::arg("post_gamma") = py::none(),
          "Euler-Maruyama OU path as an (n+1) x 1 array.");
    m.def("estimate_ou", &estimate_ou, py::arg("values"), py::arg("step"), py::arg("generic") = false,
          "Adaptive QMLE of (alpha, (beta, gamma)).");
    m.def("test_ou", &test_ou, py::arg("values"), py::arg("step"), py::arg("level") = 0.1,
          py::arg("variant") = "2", py::arg("adaptive") = false, py::arg("cv_grid") = 10000,
          py::arg("cv_reps") = 10000, py::arg("cv_seed") = 7, "Cusum test reports.");
    m.def("critical_values", &critical_values, py::arg("k"), py::arg("levels"), py::arg("grid") = 10000,
          py::arg("reps") = 10000, py::arg("seed") = 7, py::arg("threads") = 1);
    m.def("kolmogorov_upper_point", &kolmogorov_upper_point, py::arg("epsilon"));
    m.def("kolmogorov_cdf", &kolmogorov_cdf, py::arg("x"));
    m.def("misspecified_limits", [](double a, double b1, double g1, double b2, double g2, double t) {
        const OuLimits l = ou_misspecified_limits({ou_theta(a, b1, g1), ou_theta(a, b2, g2), t}, a);
        return py::make_tuple(l.beta_bar, l.gamma_bar);
    }, py::arg("alpha"), py::arg("beta1"), py::arg("gamma1"), py::arg("beta2"), py::arg("gamma2"),
       py::arg("change_at") = 0.5);
    m.def("cusum", &cusum, py::arg("summands"), py::arg("scale") = 1.0);
    m.def("run_experiment", &run_experiment, py::arg("config_json"));
    m.attr("__version__") = "0.1.0";
}
