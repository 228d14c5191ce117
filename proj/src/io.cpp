#include "driftwatch/io.hpp"

#include "driftwatch/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace driftwatch {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view field, std::size_t row) {
    field = trim(field);
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError("cannot parse number '" + std::string(field) + "'", row);
    }
    return v;
}

void write_series(std::ostream& out, const ObservationSeries& series) {
    out << 't';
    for (int l = 1; l <= series.dim(); ++l) out << ",x" << l;
    out << '\n';
    for (std::size_t i = 0; i <= series.n(); ++i) {
        out << format_double(static_cast<double>(i) * series.step());
        for (int l = 0; l < series.dim(); ++l) {
            out << ',' << format_double(series.values()(static_cast<Eigen::Index>(i), l));
        }
        out << '\n';
    }
}

void write_series(const std::filesystem::path& path, const ObservationSeries& series) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    write_series(out, series);
}

ObservationSeries read_series(std::istream& in, std::optional<int> expected_dim) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header", 0);
    const auto header = split(trim(line));
    if (header.size() < 2 || trim(header[0]) != "t") {
        throw ParseError("header must be t,x1[,x2,...]", 0);
    }
    const int dim = static_cast<int>(header.size()) - 1;
    for (int l = 1; l <= dim; ++l) {
        if (trim(header[static_cast<std::size_t>(l)]) != "x" + std::to_string(l)) {
            throw ParseError("header must be t,x1[,x2,...]", 0);
        }
    }
    if (expected_dim && *expected_dim != dim) {
        throw DimensionMismatch("series has " + std::to_string(dim) + " state columns, model expects " +
                                std::to_string(*expected_dim));
    }

    std::vector<double> times;
    std::vector<double> flat;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split(trim(line));
        if (fields.size() != header.size()) throw ParseError("wrong number of fields", row);
        times.push_back(parse_double(fields[0], row));
        for (int l = 1; l <= dim; ++l) flat.push_back(parse_double(fields[static_cast<std::size_t>(l)], row));
    }
    if (times.size() < 3) throw EmptySeries("series file needs at least 3 observations");

    const double step = times[1] - times[0];
    if (!(step > 0.0)) throw NonUniformGrid(2);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double gap = times[i] - times[i - 1];
        if (std::abs(gap - step) > 1e-9 * step) throw NonUniformGrid(i + 1);
    }

    Matrix values(static_cast<Eigen::Index>(times.size()), dim);
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (int l = 0; l < dim; ++l) {
            values(static_cast<Eigen::Index>(i), l) = flat[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(l)];
        }
    }
    return ObservationSeries(std::move(values), step);
}

ObservationSeries read_series(const std::filesystem::path& path, std::optional<int> expected_dim) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return read_series(in, expected_dim);
}

}  // namespace driftwatch
