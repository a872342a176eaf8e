#include "crimesim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <nlohmann/json.hpp>

#include "crimesim/csv.hpp"
#include "crimesim/error.hpp"

namespace crimesim::calibration {

engine::SimParams apply(const engine::SimParams& base, const ConfigValues& v) {
    engine::SimParams p = base;
    p.unemployment_related_increase_in_crime = v.mu;
    p.nearby_leisure_probability = v.nearby;
    p.downtown_leisure_probability = v.downtown;
    p.n_police_units = 0;
    return p;
}

namespace {

std::uint64_t seed_for(const ReplicationOptions& o, std::size_t i) {
    return o.reuse_master_seed ? o.master_seed : replication_seed(o.master_seed, i);
}

std::vector<double> mean_of(const std::vector<std::vector<std::uint32_t>>& runs, std::size_t n_cells) {
    // Integer accumulation keeps the mean independent of reduction order.
    std::vector<std::uint64_t> sum(n_cells, 0);
    for (const auto& r : runs)
        for (std::size_t c = 0; c < n_cells; ++c) sum[c] += r[c];
    std::vector<double> mean(n_cells);
    for (std::size_t c = 0; c < n_cells; ++c)
        mean[c] = static_cast<double>(sum[c]) / static_cast<double>(runs.size());
    return mean;
}

}  // namespace

std::vector<std::vector<std::uint32_t>> run_replications(const ConfigValues& values,
                                                         const engine::SimParams& base,
                                                         const geodata::Grid& grid,
                                                         std::span<const crimestats::CellTrend> trends,
                                                         const ReplicationOptions& options) {
    if (options.replications < 1) throw ConfigError("replications must be >= 1");
    const engine::SimParams params = apply(base, values);
    params.validate();
    const auto strategy = engine::make_strategy("static");
    const auto n = static_cast<std::int64_t>(options.replications);
    std::vector<std::vector<std::uint32_t>> runs(options.replications);

    // Exceptions must not escape the parallel region; the first one is rethrown.
    std::exception_ptr failure;
#ifdef _OPENMP
    const int threads = options.threads > 0 ? options.threads : omp_get_max_threads();
#endif
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            engine::SimParams p = params;
            p.seed = seed_for(options, static_cast<std::size_t>(i));
            runs[i] = engine::run_year(grid, p, strategy, trends).cell_counts;
        } catch (...) {
#pragma omp critical(crimesim_replication_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return runs;
}

std::vector<double> run_config(const ConfigValues& values, const engine::SimParams& base,
                               const geodata::Grid& grid, std::span<const crimestats::CellTrend> trends,
                               const ReplicationOptions& options) {
    return mean_of(run_replications(values, base, grid, trends, options), grid.n_cells());
}

std::vector<double> run_config_serial(const ConfigValues& values, const engine::SimParams& base,
                                      const geodata::Grid& grid,
                                      std::span<const crimestats::CellTrend> trends,
                                      const ReplicationOptions& options) {
    if (options.replications < 1) throw ConfigError("replications must be >= 1");
    const engine::SimParams params = apply(base, values);
    const auto strategy = engine::make_strategy("static");
    std::vector<std::vector<std::uint32_t>> runs;
    for (std::size_t i = 0; i < options.replications; ++i) {
        engine::SimParams p = params;
        p.seed = seed_for(options, i);
        runs.push_back(engine::run_year(grid, p, strategy, trends).cell_counts);
    }
    return mean_of(runs, grid.n_cells());
}

void SweepConfig::validate() const {
    if (replications < 1) throw ConfigError("sweep: replications must be >= 1");
    if (mu.empty() || nearby.empty() || downtown.empty())
        throw ConfigError("sweep: candidate lists must be nonempty");
}

std::vector<ConfigValues> enumerate(const SweepConfig& config) {
    config.validate();
    std::vector<ConfigValues> out;
    for (double m : config.mu)
        for (double n : config.nearby)
            for (double d : config.downtown) out.push_back(ConfigValues{m, n, d});
    return out;
}

void rank(std::vector<ConfigReport>& reports) {
    auto key = [](const ConfigReport& r, double coverage, bool fai) {
        const auto* row = r.metrics.at_coverage(coverage);
        const double v = row ? (fai ? row->fai : row->pai) : std::numeric_limits<double>::quiet_NaN();
        return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
    };
    std::stable_sort(reports.begin(), reports.end(), [&](const ConfigReport& a, const ConfigReport& b) {
        const double fa = key(a, 0.05, true), fb = key(b, 0.05, true);
        if (fa != fb) return fa > fb;
        const double pa = key(a, 0.03, false), pb = key(b, 0.03, false);
        if (pa != pb) return pa > pb;
        return a.id < b.id;
    });
}

std::vector<ConfigReport> sweep(const SweepConfig& config, const geodata::Grid& grid,
                                std::span<const crimestats::CellTrend> trends,
                                std::span<const double> heldout_counts) {
    const auto configs = enumerate(config);
    if (heldout_counts.size() != grid.n_cells()) throw ConfigError("held-out counts do not cover the grid");
    const auto real = metrics::CountRaster::from_grid({heldout_counts.begin(), heldout_counts.end()}, grid);

    std::vector<ConfigReport> reports;
    for (std::size_t k = 0; k < configs.size(); ++k) {
        ConfigReport rep;
        rep.id = static_cast<int>(k) + 1;
        rep.values = configs[k];
        rep.replications = config.replications;
        rep.mean_counts = run_config(configs[k], config.base, grid, trends,
                                     {config.replications, config.master_seed, false, config.threads});
        rep.metrics = metrics::evaluate(metrics::CountRaster::from_grid(rep.mean_counts, grid), real, grid);
        reports.push_back(std::move(rep));
    }
    rank(reports);
    return reports;
}

namespace {

std::string cell(double v) { return std::isfinite(v) ? csv::format(v) : std::string(); }

std::string pct(double coverage) { return csv::format(std::round(coverage * 1000.0) / 10.0); }

}  // namespace

void write_sweep_csv(std::ostream& out, const std::vector<ConfigReport>& reports) {
    out << "id,rank,mu,nearby_leisure_probability,downtown_leisure_probability,replications";
    if (!reports.empty()) {
        const auto& m = reports.front().metrics;
        for (const char* name : {"pai", "pai_star", "pei", "fai"})
            for (const auto& row : m.coverage) out << ',' << name << '_' << pct(row.coverage);
        for (const auto& row : m.thresholds)
            for (const char* name : {"precision", "recall", "f_measure"})
                out << ',' << name << '_' << csv::format(row.threshold);
        out << ",spearman_rho,spearman_p,t,t_df,t_p,wilcoxon_w,wilcoxon_z,wilcoxon_p";
    }
    out << '\n';
    // Rows in configuration id order; `reports` is in rank order.
    std::vector<std::size_t> order(reports.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return reports[a].id < reports[b].id; });
    for (std::size_t i : order) {
        const auto& r = reports[i];
        const auto& m = r.metrics;
        out << r.id << ',' << i + 1 << ',' << csv::format(r.values.mu) << ',' << csv::format(r.values.nearby)
            << ',' << csv::format(r.values.downtown) << ',' << r.replications;
        for (const auto& row : m.coverage) out << ',' << cell(row.pai);
        for (const auto& row : m.coverage) out << ',' << cell(row.pai_star);
        for (const auto& row : m.coverage) out << ',' << cell(row.pei);
        for (const auto& row : m.coverage) out << ',' << cell(row.fai);
        for (const auto& row : m.thresholds)
            out << ',' << cell(row.prf.precision) << ',' << cell(row.prf.recall) << ',' << cell(row.prf.f_measure);
        out << ',' << cell(m.spearman.rho) << ',' << cell(m.spearman.p) << ',' << cell(m.paired_t.t) << ','
            << cell(m.paired_t.df) << ',' << cell(m.paired_t.p) << ',' << cell(m.wilcoxon.w) << ','
            << cell(m.wilcoxon.z) << ',' << cell(m.wilcoxon.p) << '\n';
    }
}

void write_sweep_json(std::ostream& out, const std::vector<ConfigReport>& reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const auto& r = reports[i];
        std::ostringstream metrics_json;
        metrics::write_report_json(metrics_json, r.metrics);
        nlohmann::ordered_json j;
        j["rank"] = i + 1;
        j["id"] = r.id;
        j["unemployment_related_increase_in_crime"] = r.values.mu;
        j["nearby_leisure_probability"] = r.values.nearby;
        j["downtown_leisure_probability"] = r.values.downtown;
        j["replications"] = r.replications;
        j["metrics"] = nlohmann::ordered_json::parse(metrics_json.str());
        arr.push_back(std::move(j));
    }
    out << nlohmann::ordered_json{{"configurations", arr}}.dump(2) << '\n';
}

}  // namespace crimesim::calibration
