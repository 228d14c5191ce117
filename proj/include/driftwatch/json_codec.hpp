#pragma once

#include "driftwatch/changepoint.hpp"
#include "driftwatch/estimate.hpp"
#include "driftwatch/model.hpp"

#include <json.hpp>

#include <vector>

namespace driftwatch {

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

/// {"alpha": [...], "beta": [...]}
nlohmann::json theta_to_json(const Theta& theta);
Theta theta_from_json(const nlohmann::json& j);

nlohmann::json qmle_to_json(const QmleResult& fit);
/// The cusum profile is omitted; write it separately when needed.
nlohmann::json report_to_json(const TestReport& report);

}  // namespace driftwatch
