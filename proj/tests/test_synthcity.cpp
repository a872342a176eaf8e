#include <doctest.h>

#include <cmath>
#include <sstream>

#include "crimesim/error.hpp"
#include "crimesim/geodata.hpp"
#include "crimesim/synthcity.hpp"

using namespace crimesim;
using namespace crimesim::synthcity;

namespace {

SynthSpec flat_spec(int rows, int cols, double base, double trend, int years = 3) {
    SynthSpec s;
    s.n_rows = rows;
    s.n_cols = cols;
    s.n_districts = 1;
    s.year_start = 2010;
    s.year_end = 2010 + years - 1;
    s.base.assign(static_cast<std::size_t>(rows) * cols, base);
    s.trend.assign(static_cast<std::size_t>(rows) * cols, trend);
    return s;
}

}  // namespace

TEST_CASE("gen_city examples") {
    SUBCASE("zero trend gives the same intensity every year") {
        auto city = gen_city(flat_spec(3, 3, 2.5, 0.0, 5));
        for (CellIndex c = 0; c < 9; ++c)
            for (int y = 2010; y <= 2014; ++y) CHECK(city.lambda(c, y) == 2.5);
    }
    SUBCASE("base 5, trend 1, third year") {
        auto city = gen_city(flat_spec(1, 1, 5.0, 1.0, 3));
        CHECK(city.lambda(0, 2012) == 7.0);
    }
    SUBCASE("masked cell is excluded") {
        auto s = flat_spec(2, 2, 1.0, 0.0);
        s.masked.insert({1, 1});
        auto city = gen_city(s);
        CHECK(city.attrs.size() == 3);
        for (const auto& a : city.attrs) CHECK_FALSE((a.row == 1 && a.col == 1));
        CHECK(city.lambda(3, 2010) == 0.0);
    }
    SUBCASE("negative intensity within the range is rejected") {
        CHECK_THROWS_AS(gen_city(flat_spec(1, 1, 1.0, -1.0, 3)), ConfigError);
    }
}

TEST_CASE("districts tile the grid in rectangular bands") {
    for (int nd : {1, 2, 3, 4, 6, 9}) {
        SynthSpec s = flat_spec(12, 12, 1, 0);
        s.n_districts = nd;
        auto city = gen_city(s);
        CHECK(city.districts.size() == static_cast<std::size_t>(nd));
        std::vector<int> rmin(nd, 99), rmax(nd, -1), cmin(nd, 99), cmax(nd, -1), count(nd, 0);
        for (const auto& a : city.attrs) {
            REQUIRE(a.district >= 1);
            REQUIRE(a.district <= nd);
            const int d = a.district - 1;
            rmin[d] = std::min(rmin[d], a.row);
            rmax[d] = std::max(rmax[d], a.row);
            cmin[d] = std::min(cmin[d], a.col);
            cmax[d] = std::max(cmax[d], a.col);
            ++count[d];
        }
        for (int d = 0; d < nd; ++d) {
            CHECK(count[d] > 0);
            // a district filling its bounding box is a rectangle
            CHECK(count[d] == (rmax[d] - rmin[d] + 1) * (cmax[d] - cmin[d] + 1));
        }
    }
}

TEST_CASE("poisson and gen_crimes") {
    SUBCASE("zero intensity gives no records") {
        auto city = gen_city(flat_spec(4, 4, 0.0, 0.0));
        Rng rng(1);
        CHECK(gen_crimes(city, rng).empty());
    }
    SUBCASE("Poisson mean for lambda 4 over 1e4 draws") {
        Rng rng(2);
        double sum = 0;
        const int n = 10000;
        for (int i = 0; i < n; ++i) sum += static_cast<double>(poisson(4.0, rng));
        CHECK(std::abs(sum / n - 4.0) <= 0.06);
    }
    SUBCASE("large lambda is split into chunks") {
        Rng rng(3);
        double sum = 0, sq = 0;
        const int n = 4000;
        for (int i = 0; i < n; ++i) {
            const double x = static_cast<double>(poisson(95.0, rng));
            sum += x;
            sq += x * x;
        }
        const double mean = sum / n, var = sq / n - mean * mean;
        CHECK(std::abs(mean - 95.0) <= 3 * std::sqrt(95.0 / n));
        CHECK(var == doctest::Approx(95.0).epsilon(0.1));
    }
    SUBCASE("records locate back to their source cell and carry its district") {
        SynthSpec s = flat_spec(6, 8, 3.0, 0.5, 4);
        s.n_districts = 4;
        s.origin_easting = 350000;
        s.origin_northing = 4000000;
        auto city = gen_city(s);
        Rng rng(4);
        auto crimes = gen_crimes(city, rng);
        CHECK_FALSE(crimes.empty());
        for (const auto& r : crimes) {
            auto rc = geodata::locate(r, city.spec);
            REQUIRE(rc);
            REQUIRE(r.district);
            CHECK(*r.district == district_of(s, rc->row, rc->col));
            CHECK(r.year >= 2010);
            CHECK(r.year <= 2013);
        }
    }
    SUBCASE("deterministic under a fixed seed") {
        auto city = gen_city(flat_spec(3, 3, 2.0, 0.5));
        Rng a(9), b(9);
        auto x = gen_crimes(city, a), y = gen_crimes(city, b);
        REQUIRE(x.size() == y.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(x[i].easting == y[i].easting);
            CHECK(x[i].northing == y[i].northing);
            CHECK(x[i].year == y[i].year);
        }
    }
}

TEST_CASE("aggregated synthetic crimes have expectation lambda") {
    SynthSpec s = flat_spec(5, 5, 0.0, 0.0, 2);
    for (std::size_t c = 0; c < 25; ++c) {
        s.base[c] = 0.5 + 0.3 * static_cast<double>(c);
        s.trend[c] = 0.1 * static_cast<double>(c % 3);
    }
    auto city = gen_city(s);
    const int reps = 1000;
    std::vector<double> sum(25 * 2, 0.0);
    Rng rng(5);
    for (int i = 0; i < reps; ++i) {
        auto crimes = gen_crimes(city, rng);
        auto series = geodata::aggregate_yearly(crimes, city.spec, 2010, 2011);
        for (CellIndex c = 0; c < 25; ++c)
            for (int y = 0; y < 2; ++y) sum[c * 2 + y] += series.at(c, 2010 + y);
    }
    // 3 sigma family-wise over the 50 entries (Bonferroni: 4 sigma each),
    // plus 3 sigma on the pooled total.
    double total = 0, total_lambda = 0;
    for (CellIndex c = 0; c < 25; ++c)
        for (int y = 0; y < 2; ++y) {
            const double lambda = city.lambda(c, 2010 + y);
            total += sum[c * 2 + y];
            total_lambda += lambda;
            CHECK(std::abs(sum[c * 2 + y] / reps - lambda) <= 4 * std::sqrt(lambda / reps));
        }
    CHECK(std::abs(total / reps - total_lambda) <= 3 * std::sqrt(total_lambda / reps));
}

TEST_CASE("hotspot_spec produces a valid nonnegative field") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto s = hotspot_spec(20, 20, 4, 2010, 2018, seed);
        CHECK_NOTHROW(s.validate());
        auto city = gen_city(s);
        CHECK(city.attrs.size() == 400);
        for (double v : city.intensity) CHECK(v >= 0.0);
        CHECK(city.districts.size() == 4);
    }
    auto a = hotspot_spec(10, 12, 3, 2010, 2015, 42), b = hotspot_spec(10, 12, 3, 2010, 2015, 42);
    CHECK(a.base == b.base);
    CHECK(a.trend == b.trend);
}

TEST_CASE("synthetic CSV outputs feed the geodata readers") {
    auto s = hotspot_spec(6, 6, 2, 2010, 2012, 3);
    auto city = gen_city(s);
    Rng rng(6);
    auto crimes = gen_crimes(city, rng);
    std::stringstream csv;
    write_crimes_csv(csv, crimes);
    auto parsed = geodata::parse_crime_csv(csv, {}, geodata::RowErrorPolicy::Abort);
    REQUIRE(parsed.records.size() == crimes.size());
    auto x = geodata::aggregate_yearly(crimes, city.spec, 2010, 2012);
    auto y = geodata::aggregate_yearly(parsed.records, city.spec, 2010, 2012);
    CHECK(x == y);
    std::stringstream intensity;
    write_intensity_csv(intensity, city);
    std::string header;
    std::getline(intensity, header);
    CHECK(header == "row,col,year,lambda");
}
