#pragma once

#include "driftwatch/model.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace driftwatch {

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a whole field; throws ParseError(row) on failure.
double parse_double(std::string_view field, std::size_t row);

/// Header `t,x1,...,xd`, one row per observation, t_i = i * step.
void write_series(std::ostream& out, const ObservationSeries& series);
void write_series(const std::filesystem::path& path, const ObservationSeries& series);

/// Reads a series written by write_series. The step is t_1 - t_0 and every
/// spacing must agree with it to relative 1e-9, else NonUniformGrid(row).
/// When expected_dim is given, a different column count raises DimensionMismatch.
ObservationSeries read_series(std::istream& in, std::optional<int> expected_dim = std::nullopt);
ObservationSeries read_series(const std::filesystem::path& path,
                              std::optional<int> expected_dim = std::nullopt);

}  // namespace driftwatch
