#include "crimesim/crimestats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "crimesim/csv.hpp"
#include "crimesim/error.hpp"

namespace crimesim::crimestats {

CellTrend fit_cell_trend(std::span<const std::uint32_t> yearly_counts, std::span<const int> years,
                         int target_year) {
    const auto n = static_cast<Eigen::Index>(years.size());
    if (n == 0 || yearly_counts.size() != years.size())
        throw ConfigError("fit_cell_trend: counts and years must be nonempty and equally long");
    for (Eigen::Index i = 1; i < n; ++i)
        if (years[i] <= years[i - 1]) throw ConfigError("fit_cell_trend: years must be increasing");

    const Eigen::Index degree = std::min<Eigen::Index>(2, n - 1);
    Eigen::MatrixXd design(n, degree + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = years[i] - years[0];
        double p = 1.0;
        for (Eigen::Index k = 0; k <= degree; ++k, p *= x) design(i, k) = p;
        y(i) = yearly_counts[i];
    }
    Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);

    const double xt = target_year - years[0];
    double value = 0.0;
    for (Eigen::Index k = degree; k >= 0; --k) value = value * xt + coef(k);

    const double rmse = (design * coef - y).norm() / std::sqrt(static_cast<double>(n));
    return CellTrend{std::max(value, 0.0), rmse};
}

namespace {

std::vector<int> training_years(const geodata::CellYearSeries& series, int last_training_year) {
    if (last_training_year < series.year_start() || last_training_year > series.year_end())
        throw ConfigError("training range does not overlap the crime series");
    std::vector<int> years;
    for (int y = series.year_start(); y <= last_training_year; ++y) years.push_back(y);
    return years;
}

}  // namespace

std::vector<CellTrend> fit_trends(const geodata::CellYearSeries& series, int last_training_year,
                                  int target_year) {
    const auto years = training_years(series, last_training_year);
    const auto n_cells = static_cast<std::int64_t>(series.n_cells());
    std::vector<CellTrend> out(series.n_cells());
#pragma omp parallel for schedule(static)
    for (std::int64_t c = 0; c < n_cells; ++c)
        out[c] = fit_cell_trend(series.cell(c).first(years.size()), years, target_year);
    return out;
}

std::vector<CellTrend> fit_trends_serial(const geodata::CellYearSeries& series,
                                         int last_training_year, int target_year) {
    const auto years = training_years(series, last_training_year);
    std::vector<CellTrend> out;
    out.reserve(series.n_cells());
    for (CellIndex c = 0; c < series.n_cells(); ++c)
        out.push_back(fit_cell_trend(series.cell(c).first(years.size()), years, target_year));
    return out;
}

std::vector<double> redraw_alpha(Rng& rng, std::size_t n_cells) {
    std::vector<double> alpha(n_cells);
    for (auto& a : alpha) a = rng.uniform(-1.0, 1.0);
    return alpha;
}

std::vector<double> compute_criminal_power(std::span<const CellTrend> trends,
                                           std::span<const double> alpha) {
    if (trends.size() != alpha.size() || trends.empty())
        throw ConfigError("compute_criminal_power: trends and alpha must cover the same cells");
    std::vector<double> power(trends.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < trends.size(); ++c) {
        const double v = trends[c].prediction + alpha[c] * std::abs(trends[c].error);
        power[c] = std::max(v, 1.0);
        sum += v;
    }
    const double mean = sum / static_cast<double>(trends.size());
    if (!(mean > 1e-9)) throw SimulationError("degenerate crime field: mean predicted crime is ~0");
    for (auto& p : power) p /= mean;
    return power;
}

double offense_rate_from_history(const geodata::CellYearSeries& series, int last_training_year,
                                 double total_population) {
    const auto years = training_years(series, last_training_year);
    if (!(total_population > 0.0)) throw ConfigError("total_population must be > 0");
    std::uint64_t total = 0;
    for (CellIndex c = 0; c < series.n_cells(); ++c)
        for (int y : years) total += series.at(c, y);
    const double per_year = static_cast<double>(total) / static_cast<double>(years.size());
    return per_year / (total_population * 3.0 * 365.0);
}

void write_matrix(std::ostream& out, std::span<const double> values, const geodata::GridSpec& spec) {
    for (int r = 0; r < spec.n_rows; ++r) {
        for (int c = 0; c < spec.n_cols; ++c) {
            if (c) out << ',';
            out << csv::format(values[spec.index(r, c)]);
        }
        out << '\n';
    }
}

std::vector<double> read_matrix(std::istream& in, int& n_rows, int& n_cols, const std::string& source) {
    std::vector<double> values;
    std::string line;
    std::size_t line_no = 0;
    n_rows = 0;
    n_cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string field;
        int cols = 0;
        while (std::getline(ss, field, ',')) {
            auto b = field.find_first_not_of(" \t");
            auto e = field.find_last_not_of(" \t");
            std::string_view v = b == std::string::npos ? std::string_view{}
                                                        : std::string_view(field).substr(b, e - b + 1);
            double x = 0.0;
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
            if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x))
                throw ParseError(source, line_no, "not a number: '" + std::string(v) + "'");
            values.push_back(x);
            ++cols;
        }
        if (n_rows == 0) n_cols = cols;
        else if (cols != n_cols)
            throw ParseError(source, line_no, "expected " + std::to_string(n_cols) + " columns");
        ++n_rows;
    }
    return values;
}

std::vector<double> read_matrix(std::istream& in, const geodata::GridSpec& spec, const std::string& source) {
    int rows = 0;
    int cols = 0;
    auto values = read_matrix(in, rows, cols, source);
    if (rows != spec.n_rows || cols != spec.n_cols)
        throw InputError(source + ": matrix is " + std::to_string(rows) + "x" + std::to_string(cols) +
                         ", grid is " + std::to_string(spec.n_rows) + "x" + std::to_string(spec.n_cols));
    return values;
}

}  // namespace crimesim::crimestats
