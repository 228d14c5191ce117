#include "driftwatch/json_codec.hpp"

#include "driftwatch/errors.hpp"

namespace driftwatch {

nlohmann::json vector_to_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const nlohmann::json& j) {
    if (j.is_number()) {
        Vector v(1);
        v(0) = j.get<double>();
        return v;
    }
    const auto values = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json theta_to_json(const Theta& theta) {
    return {{"alpha", vector_to_json(theta.alpha)}, {"beta", vector_to_json(theta.beta)}};
}

Theta theta_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("alpha") || !j.contains("beta")) {
        throw DomainError("parameters must be {\"alpha\": [...], \"beta\": [...]}");
    }
    return {vector_from_json(j.at("alpha")), vector_from_json(j.at("beta"))};
}

nlohmann::json qmle_to_json(const QmleResult& fit) {
    nlohmann::json out;
    out["alpha_hat"] = vector_to_json(fit.alpha_hat);
    out["beta_hat"] = fit.beta_hat ? vector_to_json(*fit.beta_hat) : nlohmann::json(nullptr);
    out["u1"] = fit.u1_value;
    out["u2"] = fit.u2_value ? nlohmann::json(*fit.u2_value) : nlohmann::json(nullptr);
    out["trace"] = {{"iterations", fit.trace.iterations},
                    {"evaluations", fit.trace.evaluations},
                    {"converged", fit.trace.converged},
                    {"final_gradient_norm", fit.trace.final_gradient_norm},
                    {"closed_form", fit.closed_form}};
    out["warnings"] = fit.warnings;
    return out;
}

nlohmann::json report_to_json(const TestReport& report) {
    nlohmann::json out;
    out["test_name"] = to_string(report.test);
    out["statistic"] = report.statistic;
    out["critical_value"] = report.critical_value;
    out["level"] = report.level;
    out["reject"] = report.reject;
    out["argmax_k"] = report.argmax_k;
    out["estimates"] = {{"alpha_hat", vector_to_json(report.alpha_hat)},
                        {"beta_hat", report.beta_hat ? vector_to_json(*report.beta_hat)
                                                     : nlohmann::json(nullptr)}};
    out["warnings"] = report.warnings;
    return out;
}

}  // namespace driftwatch
