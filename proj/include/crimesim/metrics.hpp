#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "crimesim/geodata.hpp"

namespace crimesim::metrics {

/// Per-cell counts (possibly averaged) with an eligibility mask. Ineligible
/// cells never enter a hotspot selection or a coverage denominator.
struct CountRaster {
    std::vector<double> counts;
    std::vector<std::uint8_t> eligible;

    /// Eligibility taken from the grid's walkable cells.
    static CountRaster from_grid(std::vector<double> counts, const geodata::Grid& grid);
    /// Every cell eligible.
    static CountRaster all_eligible(std::vector<double> counts);

    std::size_t size() const noexcept { return counts.size(); }
    std::size_t eligible_count() const;
    double eligible_total() const;
};

/// round-half-up(coverage * eligible).
std::size_t coverage_cell_count(std::size_t eligible, double coverage);

/// The k highest-scored eligible cells, ordered by (score desc, index asc).
/// Throws MetricError when k rounds to zero.
std::vector<CellIndex> top_coverage_cells(const CountRaster& scores, double coverage);

/// Hit rate / area coverage of `selected` against `real`.
double pai(const CountRaster& real, std::span<const CellIndex> selected);

struct PeiResult {
    double pai = 0.0;
    double pai_star = 0.0;
    double pei = 0.0;
};

/// PAI of the simulation's top cells, PAI* of the ground truth's own top
/// cells (same k), and their ratio.
PeiResult pai_star_and_pei(const CountRaster& sim, const CountRaster& real, double coverage);

/// (n_real / n_sim) / (N_real / N_sim) over `selected`.
double fai(const CountRaster& sim, const CountRaster& real, std::span<const CellIndex> selected);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
};

/// Hotspots are eligible cells with count >= threshold.
Prf hotspot_prf(const CountRaster& sim, const CountRaster& real, double threshold);

struct SpearmanResult {
    double rho = 0.0;
    double p = 1.0;
};
SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys);

struct PairedT {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};
PairedT paired_t(std::span<const double> xs, std::span<const double> ys);

struct WilcoxonResult {
    double w = 0.0;
    double z = 0.0;
    double p = 1.0;
    std::size_t n = 0;  // nonzero differences
};
/// Differences are ys - xs.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> xs, std::span<const double> ys);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Totals per grid district, ascending id. Cells without a district are skipped.
std::vector<double> district_vector(const CountRaster& raster, const geodata::Grid& grid);

inline const std::vector<double> kDefaultCoverages{0.03, 0.05, 0.10, 0.20};
inline const std::vector<double> kDefaultThresholds{1, 10, 50, 100, 200};

struct CoverageRow {
    double coverage = 0.0;
    double pai = 0.0;
    double pai_star = 0.0;
    double pei = 0.0;
    double fai = 0.0;
};

struct ThresholdRow {
    double threshold = 0.0;
    Prf prf;
};

/// Undefined metrics are NaN and listed in `failures` as "metric: reason".
struct MetricsReport {
    std::vector<CoverageRow> coverage;
    std::vector<ThresholdRow> thresholds;
    std::vector<double> sim_districts;
    std::vector<double> real_districts;
    SpearmanResult spearman{};
    PairedT paired_t{};
    WilcoxonResult wilcoxon{};
    std::vector<std::string> failures;

    const CoverageRow* at_coverage(double coverage) const;
};

MetricsReport evaluate(const CountRaster& sim, const CountRaster& real, const geodata::Grid& grid,
                       std::span<const double> coverages = kDefaultCoverages,
                       std::span<const double> thresholds = kDefaultThresholds);

void write_report_json(std::ostream& out, const MetricsReport& report);
/// One row per coverage: coverage,pai,pai_star,pei,fai.
void write_coverage_csv(std::ostream& out, const MetricsReport& report);
/// One row per threshold: threshold,precision,recall,f_measure.
void write_prf_csv(std::ostream& out, const MetricsReport& report);

}  // namespace crimesim::metrics
