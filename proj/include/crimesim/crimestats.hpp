#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "crimesim/geodata.hpp"
#include "crimesim/rng.hpp"

namespace crimesim::crimestats {

/// Trend-predicted crimes for the target year and the RMSE of the fit.
struct CellTrend {
    double prediction = 0.0;
    double error = 0.0;
};

/// Least-squares polynomial of degree min(2, n-1) through (year, count),
/// evaluated at `target_year` and clamped at zero. Predictors are year
/// offsets from the first year.
CellTrend fit_cell_trend(std::span<const std::uint32_t> yearly_counts, std::span<const int> years,
                         int target_year);

/// Fits every cell of `series`, using years year_start..last_training_year.
/// OpenMP-parallel over cells; `fit_trends_serial` is the reference loop.
std::vector<CellTrend> fit_trends(const geodata::CellYearSeries& series, int last_training_year,
                                  int target_year);
std::vector<CellTrend> fit_trends_serial(const geodata::CellYearSeries& series,
                                         int last_training_year, int target_year);

/// Per-cell uniform draws on [-1, 1), row-major.
std::vector<double> redraw_alpha(Rng& rng, std::size_t n_cells);

/// Criminal power of every cell:
///   max(pred_c + a_c*|err_c|, 1) / mean_over_cells(pred + a*|err|).
/// Throws SimulationError if the mean is <= 1e-9.
std::vector<double> compute_criminal_power(std::span<const CellTrend> trends,
                                           std::span<const double> alpha);

/// Offense-rate estimate from history: mean yearly crimes divided by
/// (population * 3 slots * 365 days). Gives a per-person, per-slot rate.
double offense_rate_from_history(const geodata::CellYearSeries& series, int last_training_year,
                                 double total_population);

/// n_rows lines of n_cols comma-separated values.
void write_matrix(std::ostream& out, std::span<const double> values, const geodata::GridSpec& spec);
std::vector<double> read_matrix(std::istream& in, const geodata::GridSpec& spec,
                                const std::string& source = "matrix.csv");
/// Reads a matrix whose shape is taken from the file itself.
std::vector<double> read_matrix(std::istream& in, int& n_rows, int& n_cols,
                                const std::string& source = "matrix.csv");

}  // namespace crimesim::crimestats
