#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "crimesim/crimestats.hpp"
#include "crimesim/error.hpp"

using namespace crimesim;
using namespace crimesim::crimestats;

namespace {

/// Solves the normal equations (X^T X) b = X^T y by Gaussian elimination
/// with partial pivoting; x values are offsets from the first year.
std::vector<double> normal_equations(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    const int m = degree + 1;
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) a[r][c] += std::pow(x[i], r + c);
            a[r][m] += std::pow(x[i], r) * y[i];
        }
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        for (int r = 0; r < m; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            for (int c = col; c <= m; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> b(m);
    for (int r = 0; r < m; ++r) b[r] = a[r][m] / a[r][r];
    return b;
}

double eval_poly(const std::vector<double>& b, double x) {
    double v = 0.0;
    for (std::size_t k = b.size(); k-- > 0;) v = v * x + b[k];
    return v;
}

std::vector<int> year_range(int y0, int n) {
    std::vector<int> ys(n);
    for (int i = 0; i < n; ++i) ys[i] = y0 + i;
    return ys;
}

}  // namespace

TEST_CASE("fit_cell_trend examples") {
    SUBCASE("all zero") {
        std::vector<std::uint32_t> c{0, 0, 0, 0};
        auto t = fit_cell_trend(c, year_range(2010, 4), 2014);
        CHECK(t.prediction == doctest::Approx(0.0));
        CHECK(t.error == doctest::Approx(0.0));
    }
    SUBCASE("exact linear data") {
        std::vector<std::uint32_t> c{2, 4, 6, 8};
        auto t = fit_cell_trend(c, year_range(2010, 4), 2014);
        CHECK(t.prediction == doctest::Approx(10.0).epsilon(1e-12));
        CHECK(t.error < 1e-9);
    }
    SUBCASE("constant") {
        std::vector<std::uint32_t> c{5, 5, 5};
        auto t = fit_cell_trend(c, year_range(2010, 3), 2013);
        CHECK(t.prediction == doctest::Approx(5.0));
        CHECK(t.error < 1e-9);
    }
    SUBCASE("single year is degree 0") {
        std::vector<std::uint32_t> c{7};
        auto t = fit_cell_trend(c, year_range(2010, 1), 2012);
        CHECK(t.prediction == 7.0);
        CHECK(t.error == 0.0);
    }
    SUBCASE("two years fit a line") {
        std::vector<std::uint32_t> c{3, 5};
        auto t = fit_cell_trend(c, year_range(2010, 2), 2012);
        CHECK(t.prediction == doctest::Approx(7.0));
    }
    SUBCASE("negative extrapolation is clamped") {
        std::vector<std::uint32_t> c{9, 6, 3, 1};
        auto t = fit_cell_trend(c, year_range(2010, 4), 2016);
        CHECK(t.prediction == 0.0);
        CHECK(t.error > 0.0);
    }
}

TEST_CASE("fit_cell_trend matches a normal-equations oracle on noisy data") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 3 + static_cast<int>(gen() % 8);
        std::vector<std::uint32_t> c(n);
        for (auto& v : c) v = static_cast<std::uint32_t>(gen() % 50);
        const auto years = year_range(2005, n);
        const int target = 2005 + n + static_cast<int>(gen() % 3);
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = i;
            y[i] = c[i];
        }
        auto b = normal_equations(x, y, 2);
        double sse = 0.0;
        for (int i = 0; i < n; ++i) sse += std::pow(eval_poly(b, x[i]) - y[i], 2);
        auto t = fit_cell_trend(c, years, target);
        CHECK(t.prediction == doctest::Approx(std::max(0.0, eval_poly(b, target - 2005))).epsilon(1e-9));
        CHECK(t.error == doctest::Approx(std::sqrt(sse / n)).epsilon(1e-9));
    }
}

TEST_CASE("fit_trends agrees with its serial reference") {
    geodata::CellYearSeries s(2010, 2018, 300);
    std::mt19937_64 gen(9);
    for (CellIndex c = 0; c < 300; ++c)
        for (int y = 2010; y <= 2018; ++y) s.at(c, y) = static_cast<std::uint32_t>(gen() % 30);
    auto a = fit_trends(s, 2017, 2018);
    auto b = fit_trends_serial(s, 2017, 2018);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].prediction == b[i].prediction);
        CHECK(a[i].error == b[i].error);
    }
}

TEST_CASE("redraw_alpha") {
    Rng a(42), b(42);
    CHECK(redraw_alpha(a, 0).empty());
    auto x = redraw_alpha(a, 1000);
    for (double v : x) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    Rng c(7), d(7);
    CHECK(redraw_alpha(c, 4) == redraw_alpha(d, 4));
}

TEST_CASE("compute_criminal_power examples") {
    SUBCASE("identity") {
        std::vector<CellTrend> t(5, {1.0, 0.0});
        std::vector<double> a(5, 0.0);
        for (double p : compute_criminal_power(t, a)) CHECK(p == 1.0);
    }
    SUBCASE("predictions {3,1}") {
        std::vector<CellTrend> t{{3, 0}, {1, 0}};
        auto p = compute_criminal_power(t, std::vector<double>{0, 0});
        CHECK(p[0] == 1.5);
        CHECK(p[1] == 0.5);
    }
    SUBCASE("floor applies to the numerator only") {
        std::vector<CellTrend> t{{0, 0}, {4, 0}};
        auto p = compute_criminal_power(t, std::vector<double>{0, 0});
        CHECK(p[0] == 0.5);
        CHECK(p[1] == 2.0);
    }
    SUBCASE("alpha scales the absolute error") {
        std::vector<CellTrend> t{{4, 2}, {4, 2}};
        auto p = compute_criminal_power(t, std::vector<double>{1.0, -1.0});
        // numerators 6, 2; denominator mean(6, 2) = 4
        CHECK(p[0] == 1.5);
        CHECK(p[1] == 0.5);
    }
    SUBCASE("degenerate field") {
        std::vector<CellTrend> t(3, {0.0, 0.0});
        CHECK_THROWS_AS(compute_criminal_power(t, std::vector<double>(3, 0.0)), SimulationError);
    }
}

TEST_CASE("criminal power properties on random fields") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> pred(1.0, 40.0), err(0.0, 5.0);
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + gen() % 200;
        std::vector<CellTrend> t(n);
        for (auto& c : t) c = {pred(gen), err(gen)};
        const std::vector<double> zero(n, 0.0);
        auto p = compute_criminal_power(t, zero);
        double mean = 0.0;
        for (double v : p) mean += v;
        CHECK(mean / n == doctest::Approx(1.0).epsilon(1e-9));

        auto alpha = redraw_alpha(rng, n);
        auto q = compute_criminal_power(t, alpha);
        for (double v : q) CHECK(v > 0.0);

        // scale equivariance with the floor inactive
        const double k = 3.5;
        std::vector<CellTrend> scaled(t);
        bool floor_inactive = true;
        for (std::size_t i = 0; i < n; ++i) {
            scaled[i] = {t[i].prediction * k, t[i].error * k};
            floor_inactive = floor_inactive && t[i].prediction + alpha[i] * t[i].error >= 1.0;
        }
        if (floor_inactive) {
            auto r = compute_criminal_power(scaled, alpha);
            for (std::size_t i = 0; i < n; ++i) CHECK(r[i] == doctest::Approx(q[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("matrix CSV round-trip") {
    geodata::GridSpec s;
    s.n_rows = 2;
    s.n_cols = 3;
    std::vector<double> v{0.1, 2, 3.25, 1e-7, 0, 12345.5};
    std::stringstream io;
    write_matrix(io, v, s);
    CHECK(read_matrix(io, s) == v);
    std::stringstream io2;
    write_matrix(io2, v, s);
    int r = 0, c = 0;
    CHECK(read_matrix(io2, r, c) == v);
    CHECK(r == 2);
    CHECK(c == 3);
    std::istringstream bad("1,2,3\n4,5\n");
    CHECK_THROWS_AS(read_matrix(bad, s), InputError);
}

TEST_CASE("offense_rate_from_history") {
    geodata::CellYearSeries s(2010, 2012, 2);
    s.at(0, 2010) = 100;
    s.at(1, 2011) = 300;
    s.at(0, 2012) = 999;  // outside the training window
    // mean yearly crimes = 200 over 2010-2011
    CHECK(offense_rate_from_history(s, 2011, 1000.0) == doctest::Approx(200.0 / (1000.0 * 3 * 365)));
}
