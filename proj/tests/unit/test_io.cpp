#include "driftwatch/errors.hpp"
#include "driftwatch/io.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <sstream>

using namespace driftwatch;

TEST(ReadSeries, ThreeRows) {
    std::istringstream in("t,x1\n0,1.0\n0.1,1.1\n0.2,0.9\n");
    const ObservationSeries s = read_series(in);
    EXPECT_EQ(s.n(), 2u);
    EXPECT_DOUBLE_EQ(s.step(), 0.1);
    EXPECT_EQ(s.scalar(2), 0.9);
}

TEST(ReadSeries, NonUniformGridReportsRow) {
    std::istringstream in("t,x1\n0,1\n0.1,1\n0.25,1\n");
    try {
        read_series(in);
        FAIL();
    } catch (const NonUniformGrid& e) {
        EXPECT_EQ(e.row(), 3u);
    }
}

TEST(ReadSeries, Errors) {
    std::istringstream bad("t,x1\n0,1\n0.1,abc\n0.2,1\n");
    try {
        read_series(bad);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
    }
    std::istringstream short_file("t,x1\n0,1\n0.1,1\n");
    EXPECT_THROW(read_series(short_file), EmptySeries);
    std::istringstream wide("t,x1,x2\n0,1,1\n0.1,1,1\n0.2,1,1\n");
    EXPECT_THROW(read_series(wide, 1), DimensionMismatch);
    std::istringstream ragged("t,x1\n0,1\n0.1,1,2\n0.2,1\n");
    EXPECT_THROW(read_series(ragged), ParseError);
}

TEST(ReadSeries, MultiDimensional) {
    std::istringstream in("t,x1,x2\n0,1,2\n0.5,3,4\n1,5,6\n");
    const ObservationSeries s = read_series(in, 2);
    EXPECT_EQ(s.dim(), 2);
    EXPECT_EQ(s.values()(2, 1), 6.0);
}

TEST(WriteSeries, ExactRoundTrip) {
    std::mt19937_64 gen(8);
    std::uniform_int_distribution<std::uint64_t> bits;
    for (int trial = 0; trial < 20; ++trial) {
        Matrix m(50, 2);
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            double v;
            do {
                const std::uint64_t b = bits(gen);
                std::memcpy(&v, &b, sizeof v);
            } while (!std::isfinite(v));
            m.data()[i] = v;
        }
        const ObservationSeries s(m, 0.001 * (trial + 1) / 3.0);
        std::ostringstream out;
        write_series(out, s);
        std::istringstream in(out.str());
        const ObservationSeries back = read_series(in);
        EXPECT_TRUE(back.values() == s.values());
        EXPECT_EQ(back.step(), s.step());
    }
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(format_double(-2.5e-300), "-2.5e-300");
    for (double v : {5e-324, 1.7976931348623157e308, 0.30000000000000004}) {
        EXPECT_EQ(parse_double(format_double(v), 1), v);
    }
    EXPECT_THROW(parse_double("1.0x", 4), ParseError);
    EXPECT_THROW(parse_double("", 4), ParseError);
}
