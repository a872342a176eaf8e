#include "crimesim/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "crimesim/csv.hpp"
#include "crimesim/error.hpp"

namespace crimesim::metrics {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_shape(const CountRaster& a, const CountRaster& b) {
    if (a.counts.size() != b.counts.size() || a.eligible.size() != a.counts.size() ||
        b.eligible.size() != b.counts.size())
        throw MetricError("raster", "shape mismatch");
}

// Sums in ascending cell order, the same order as eligible_total(), so a
// full selection reproduces the total bit for bit.
double sum_over(const CountRaster& r, std::span<const CellIndex> cells) {
    std::vector<CellIndex> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end());
    double s = 0.0;
    for (CellIndex c : sorted) s += r.counts[c];
    return s;
}

double two_sided_t(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double two_sided_normal(double z) {
    boost::math::normal dist;
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(z)));
}

}  // namespace

CountRaster CountRaster::from_grid(std::vector<double> counts, const geodata::Grid& grid) {
    if (counts.size() != grid.n_cells()) throw MetricError("raster", "does not match the grid");
    return CountRaster{std::move(counts), grid.walkable_mask()};
}

CountRaster CountRaster::all_eligible(std::vector<double> counts) {
    std::vector<std::uint8_t> mask(counts.size(), 1);
    return CountRaster{std::move(counts), std::move(mask)};
}

std::size_t CountRaster::eligible_count() const {
    return static_cast<std::size_t>(std::count(eligible.begin(), eligible.end(), 1));
}

double CountRaster::eligible_total() const {
    double s = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (eligible[i]) s += counts[i];
    return s;
}

std::size_t coverage_cell_count(std::size_t eligible, double coverage) {
    return static_cast<std::size_t>(std::floor(coverage * static_cast<double>(eligible) + 0.5));
}

std::vector<CellIndex> top_coverage_cells(const CountRaster& scores, double coverage) {
    if (!(coverage > 0.0 && coverage <= 1.0)) throw MetricError("coverage", "must lie in (0, 1]");
    std::vector<CellIndex> cells;
    for (CellIndex i = 0; i < scores.counts.size(); ++i)
        if (scores.eligible[i]) cells.push_back(i);
    const std::size_t k = coverage_cell_count(cells.size(), coverage);
    if (k == 0) throw MetricError("coverage", "coverage too small for grid");
    std::partial_sort(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(k), cells.end(),
                      [&](CellIndex a, CellIndex b) {
                          if (scores.counts[a] != scores.counts[b]) return scores.counts[a] > scores.counts[b];
                          return a < b;
                      });
    cells.resize(k);
    return cells;
}

double pai(const CountRaster& real, std::span<const CellIndex> selected) {
    if (selected.empty()) throw MetricError("PAI", "empty selection");
    const double total = real.eligible_total();
    if (!(total > 0.0)) throw MetricError("PAI", "no ground-truth crimes");
    const double hit_rate = sum_over(real, selected) / total;
    const double area = static_cast<double>(selected.size()) / static_cast<double>(real.eligible_count());
    return hit_rate / area;
}

PeiResult pai_star_and_pei(const CountRaster& sim, const CountRaster& real, double coverage) {
    check_shape(sim, real);
    PeiResult r;
    r.pai = pai(real, top_coverage_cells(sim, coverage));
    r.pai_star = pai(real, top_coverage_cells(real, coverage));
    if (!(r.pai_star > 0.0)) throw MetricError("PEI", "PAI* is zero (degenerate ground truth)");
    r.pei = r.pai / r.pai_star;
    return r;
}

double fai(const CountRaster& sim, const CountRaster& real, std::span<const CellIndex> selected) {
    check_shape(sim, real);
    const double n_sim = sum_over(sim, selected);
    const double n_real = sum_over(real, selected);
    const double total_sim = sim.eligible_total();
    const double total_real = real.eligible_total();
    if (!(n_sim > 0.0) || !(total_sim > 0.0) || !(total_real > 0.0))
        throw MetricError("FAI", "FAI undefined on this fixture (zero simulated or real crimes)");
    return (n_real / n_sim) / (total_real / total_sim);
}

Prf hotspot_prf(const CountRaster& sim, const CountRaster& real, double threshold) {
    check_shape(sim, real);
    if (!(threshold >= 1.0)) throw MetricError("PRF", "threshold must be >= 1");
    std::size_t predicted = 0, actual = 0, both = 0;
    for (std::size_t i = 0; i < sim.counts.size(); ++i) {
        if (!sim.eligible[i]) continue;
        const bool p = sim.counts[i] >= threshold;
        const bool a = real.counts[i] >= threshold;
        predicted += p;
        actual += a;
        both += p && a;
    }
    Prf r;
    r.precision = predicted ? static_cast<double>(both) / predicted : 0.0;
    r.recall = actual ? static_cast<double>(both) / actual : 0.0;
    const double s = r.precision + r.recall;
    r.f_measure = s > 0.0 ? 2.0 * r.precision * r.recall / s : 0.0;
    return r;
}

std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3)
        throw MetricError("Spearman", "needs two equally long vectors of at least 3 values");
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) throw MetricError("Spearman", "rank correlation undefined (constant vector)");
    SpearmanResult r;
    r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    if (1.0 - std::abs(r.rho) < 1e-15) {
        r.p = 0.0;  // reported as p < 1e-15
    } else {
        const double t = r.rho * std::sqrt((n - 2.0) / (1.0 - r.rho * r.rho));
        r.p = two_sided_t(t, n - 2.0);
    }
    return r;
}

PairedT paired_t(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw MetricError("paired t", "needs two equally long vectors of at least 2 values");
    const double n = static_cast<double>(xs.size());
    std::vector<double> d(xs.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = ys[i] - xs[i];
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    if (!(sd > 0.0)) throw MetricError("paired t", "differences have zero variance");
    PairedT r;
    r.t = mean / (sd / std::sqrt(n));
    r.df = n - 1.0;
    r.p = two_sided_t(r.t, r.df);
    return r;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw MetricError("Wilcoxon", "vectors differ in length");
    std::vector<double> d;
    for (std::size_t i = 0; i < xs.size(); ++i)
        if (ys[i] - xs[i] != 0.0) d.push_back(ys[i] - xs[i]);
    if (d.empty()) throw MetricError("Wilcoxon", "all differences are zero");

    std::vector<double> mag(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) mag[i] = std::abs(d[i]);
    const auto ranks = average_ranks(mag);

    WilcoxonResult r;
    r.n = d.size();
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0.0) r.w += ranks[i];

    // Tie correction: sum of (t^3 - t) over groups of equal magnitude.
    std::vector<double> sorted = mag;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    const double n = static_cast<double>(r.n);
    const double mean = n * (n + 1.0) / 4.0;
    const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
    r.z = var > 0.0 ? (r.w - mean) / std::sqrt(var) : 0.0;
    r.p = two_sided_normal(r.z);
    return r;
}

std::vector<double> district_vector(const CountRaster& raster, const geodata::Grid& grid) {
    if (raster.counts.size() != grid.n_cells()) throw MetricError("district vector", "raster does not match grid");
    const auto districts = grid.districts();
    std::vector<double> totals(districts.size(), 0.0);
    for (CellIndex c = 0; c < grid.n_cells(); ++c) {
        const auto id = grid.cell(c).district;
        if (id == kNoDistrict) continue;
        auto it = std::lower_bound(districts.begin(), districts.end(), id,
                                   [](const geodata::DistrictInfo& d, DistrictId v) { return d.id < v; });
        totals[static_cast<std::size_t>(it - districts.begin())] += raster.counts[c];
    }
    return totals;
}

const CoverageRow* MetricsReport::at_coverage(double cov) const {
    for (const auto& row : coverage)
        if (std::abs(row.coverage - cov) < 1e-12) return &row;
    return nullptr;
}

MetricsReport evaluate(const CountRaster& sim, const CountRaster& real, const geodata::Grid& grid,
                       std::span<const double> coverages, std::span<const double> thresholds) {
    check_shape(sim, real);
    MetricsReport rep;
    auto attempt = [&](const std::string& label, auto&& fn) {
        try {
            fn();
        } catch (const MetricError& e) {
            rep.failures.push_back(label + ": " + e.what());
        }
    };

    for (double cov : coverages) {
        CoverageRow row{cov, kNaN, kNaN, kNaN, kNaN};
        const std::string tag = "@" + csv::format(cov * 100.0) + "%";
        attempt("PEI" + tag, [&] {
            auto r = pai_star_and_pei(sim, real, cov);
            row.pai = r.pai;
            row.pai_star = r.pai_star;
            row.pei = r.pei;
        });
        attempt("FAI" + tag, [&] { row.fai = fai(sim, real, top_coverage_cells(sim, cov)); });
        rep.coverage.push_back(row);
    }
    for (double th : thresholds) rep.thresholds.push_back(ThresholdRow{th, hotspot_prf(sim, real, th)});

    rep.sim_districts = district_vector(sim, grid);
    rep.real_districts = district_vector(real, grid);
    rep.spearman = {kNaN, kNaN};
    rep.paired_t = {kNaN, kNaN, kNaN};
    rep.wilcoxon = {kNaN, kNaN, kNaN, 0};
    attempt("Spearman", [&] { rep.spearman = spearman(rep.real_districts, rep.sim_districts); });
    attempt("paired t", [&] { rep.paired_t = paired_t(rep.real_districts, rep.sim_districts); });
    attempt("Wilcoxon", [&] { rep.wilcoxon = wilcoxon_signed_rank(rep.real_districts, rep.sim_districts); });
    return rep;
}

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

void write_report_json(std::ostream& out, const MetricsReport& rep) {
    nlohmann::ordered_json j;
    auto& cov = j["coverage"] = nlohmann::json::array();
    for (const auto& r : rep.coverage)
        cov.push_back({{"coverage", r.coverage}, {"pai", num(r.pai)}, {"pai_star", num(r.pai_star)},
                       {"pei", num(r.pei)}, {"fai", num(r.fai)}});
    auto& th = j["hotspots"] = nlohmann::json::array();
    for (const auto& r : rep.thresholds)
        th.push_back({{"threshold", r.threshold}, {"precision", r.prf.precision}, {"recall", r.prf.recall},
                      {"f_measure", r.prf.f_measure}});
    j["districts"] = {{"simulated", rep.sim_districts}, {"real", rep.real_districts}};
    j["spearman"] = {{"rho", num(rep.spearman.rho)}, {"p", num(rep.spearman.p)}};
    j["paired_t"] = {{"t", num(rep.paired_t.t)}, {"df", num(rep.paired_t.df)}, {"p", num(rep.paired_t.p)}};
    j["wilcoxon"] = {{"w", num(rep.wilcoxon.w)}, {"z", num(rep.wilcoxon.z)}, {"p", num(rep.wilcoxon.p)},
                     {"n", rep.wilcoxon.n}};
    j["failures"] = rep.failures;
    out << j.dump(2) << '\n';
}

namespace {

std::string cell(double v) { return std::isfinite(v) ? csv::format(v) : std::string(); }

}  // namespace

void write_coverage_csv(std::ostream& out, const MetricsReport& rep) {
    out << "coverage,pai,pai_star,pei,fai\n";
    for (const auto& r : rep.coverage)
        out << csv::format(r.coverage) << ',' << cell(r.pai) << ',' << cell(r.pai_star) << ',' << cell(r.pei)
            << ',' << cell(r.fai) << '\n';
}

void write_prf_csv(std::ostream& out, const MetricsReport& rep) {
    out << "threshold,precision,recall,f_measure\n";
    for (const auto& r : rep.thresholds)
        out << csv::format(r.threshold) << ',' << csv::format(r.prf.precision) << ','
            << csv::format(r.prf.recall) << ',' << csv::format(r.prf.f_measure) << '\n';
}

}  // namespace crimesim::metrics
