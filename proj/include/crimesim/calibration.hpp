#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "crimesim/crimestats.hpp"
#include "crimesim/engine.hpp"
#include "crimesim/geodata.hpp"
#include "crimesim/metrics.hpp"

namespace crimesim::calibration {

/// The latent parameters being swept.
struct ConfigValues {
    double mu = 0.10;
    double nearby = 0.50;
    double downtown = 0.075;

    bool operator==(const ConfigValues&) const = default;
};

struct ReplicationOptions {
    std::size_t replications = 1;
    std::uint64_t master_seed = 0;
    /// Test hook: every replication uses master_seed itself.
    bool reuse_master_seed = false;
    /// 0 = OpenMP default.
    int threads = 0;
};

/// Base params with the swept values applied and police disabled.
engine::SimParams apply(const engine::SimParams& base, const ConfigValues& values);

/// Per-replication cell counts, replication i seeded with
/// replication_seed(master_seed, i). Replications run in parallel.
std::vector<std::vector<std::uint32_t>> run_replications(const ConfigValues& values,
                                                         const engine::SimParams& base,
                                                         const geodata::Grid& grid,
                                                         std::span<const crimestats::CellTrend> trends,
                                                         const ReplicationOptions& options);

/// Mean per-cell crime count over replications (OpenMP).
std::vector<double> run_config(const ConfigValues& values, const engine::SimParams& base,
                               const geodata::Grid& grid, std::span<const crimestats::CellTrend> trends,
                               const ReplicationOptions& options);

/// Single-threaded reference for run_config.
std::vector<double> run_config_serial(const ConfigValues& values, const engine::SimParams& base,
                                      const geodata::Grid& grid,
                                      std::span<const crimestats::CellTrend> trends,
                                      const ReplicationOptions& options);

struct SweepConfig {
    std::vector<double> mu{0.10, 0.15};
    std::vector<double> nearby{0.50, 0.60};
    std::vector<double> downtown{0.075, 0.100};
    std::size_t replications = 200;
    engine::SimParams base;
    std::uint64_t master_seed = 0;
    int threads = 0;

    void validate() const;
};

struct ConfigReport {
    int id = 0;
    ConfigValues values;
    std::size_t replications = 0;
    std::vector<double> mean_counts;
    metrics::MetricsReport metrics;
};

/// Cartesian product, mu slowest and downtown fastest; ids start at 1.
std::vector<ConfigValues> enumerate(const SweepConfig& config);

/// Ranking: FAI at 5% descending, then PAI at 3% descending, then id.
/// Undefined metrics rank last.
void rank(std::vector<ConfigReport>& reports);

/// Runs and scores every configuration against the held-out counts, then
/// ranks them. All configurations share replication seeds.
std::vector<ConfigReport> sweep(const SweepConfig& config, const geodata::Grid& grid,
                                std::span<const crimestats::CellTrend> trends,
                                std::span<const double> heldout_counts);

void write_sweep_csv(std::ostream& out, const std::vector<ConfigReport>& reports);
void write_sweep_json(std::ostream& out, const std::vector<ConfigReport>& reports);

}  // namespace crimesim::calibration
