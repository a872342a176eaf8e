#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "crimesim/engine.hpp"
#include "crimesim/geodata.hpp"

namespace crimesim::config {

/// Everything a CLI command needs. Loaded from a flat JSON object whose keys
/// mirror the model parameter names; command-line flags override file values.
struct RunConfig {
    engine::SimParams params;
    geodata::GridSpec grid;

    // Inputs (relative paths resolve against the config file's directory).
    std::filesystem::path crime_csv;
    std::filesystem::path cell_attrs_csv;
    std::filesystem::path buildings_csv;
    std::filesystem::path land_mask_csv;
    std::filesystem::path districts_csv;
    std::filesystem::path env_dir = "env";
    std::filesystem::path out_dir = "out";

    std::vector<std::string> categories;  // empty = all
    bool skip_malformed_rows = false;
    std::optional<int> year_start;
    std::optional<int> year_end;
    /// Year the simulation predicts; training uses all earlier years.
    std::optional<int> target_year;

    std::string strategy = "static";
    std::size_t replications = 1;
    int threads = 0;
    bool export_events = true;
    bool export_heatmap = true;

    std::vector<double> mu_candidates{0.10, 0.15};
    std::vector<double> nearby_candidates{0.50, 0.60};
    std::vector<double> downtown_candidates{0.075, 0.100};
    std::size_t sweep_replications = 200;

    // `synth` command.
    int synth_rows = 20;
    int synth_cols = 20;
    int synth_districts = 4;
    int synth_year_start = 2010;
    int synth_year_end = 2018;

    void validate() const;
};

nlohmann::ordered_json params_to_json(const engine::SimParams& params);

/// Applies the keys of `j` on top of `cfg`. Unknown keys are rejected.
void apply_json(RunConfig& cfg, const nlohmann::json& j, const std::filesystem::path& base_dir);

RunConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// A built environment: the grid and its yearly crime series.
struct Environment {
    geodata::Grid grid;
    geodata::CellYearSeries series;
};

/// Reads grid.csv, districts.csv, counts_by_year.csv and environment.json.
Environment load_environment(const std::filesystem::path& dir);

/// Resolved prediction setup for a series: target year, last training year.
struct TrainingWindow {
    int target_year = 0;
    int last_training_year = 0;
};
TrainingWindow training_window(const geodata::CellYearSeries& series, std::optional<int> target_year);

}  // namespace crimesim::config
