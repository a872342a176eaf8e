#include "crimesim/config.hpp"

#include <fstream>
#include <set>

#include "crimesim/error.hpp"

namespace crimesim::config {

using nlohmann::json;

void RunConfig::validate() const {
    params.validate();
    grid.validate();
    if (replications < 1 || sweep_replications < 1) throw ConfigError("replications must be >= 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (mu_candidates.empty() || nearby_candidates.empty() || downtown_candidates.empty())
        throw ConfigError("sweep candidate lists must be nonempty");
    for (double n : nearby_candidates)
        for (double d : downtown_candidates)
            if (n + d > 1.0 + 1e-12) throw ConfigError("sweep: nearby + downtown candidates exceed 1");
    engine::make_strategy(strategy);
}

nlohmann::ordered_json params_to_json(const engine::SimParams& p) {
    nlohmann::ordered_json j;
    j["total_population"] = p.total_population;
    j["number_of_citizens"] = p.n_citizens;
    j["number_of_police_units"] = p.n_police_units;
    j["find_job_probability"] = p.find_job_probability;
    j["lose_job_probability"] = p.lose_job_probability;
    j["nearby_leisure_probability"] = p.nearby_leisure_probability;
    j["downtown_leisure_probability"] = p.downtown_leisure_probability;
    j["offense_rate"] = p.offense_rate;
    j["unemployment_related_increase_in_crime"] = p.unemployment_related_increase_in_crime;
    j["police_reduction"] = p.police_reduction;
    j["increase_no_police"] = p.increase_no_police;
    j["unemployment_rate"] = p.unemployment_rate;
    j["role_mix"] = {p.role_mix.morning, p.role_mix.afternoon, p.role_mix.night};
    j["leisure_radius"] = p.leisure_radius;
    j["downtown_district_ids"] = p.downtown_district_ids;
    j["power_refresh_period"] = p.power_refresh_period;
    j["police_window"] = p.police_window;
    j["days"] = p.n_days;
    j["epsilon_mode"] = p.epsilon_mode == engine::EpsilonMode::Printed ? "printed" : "interpolated";
    j["seed"] = p.seed;
    return j;
}

namespace {

template <typename T>
T get(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::filesystem::path path_value(const json& v, const std::string& key, const std::filesystem::path& base) {
    std::filesystem::path p = get<std::string>(v, key);
    if (p.empty() || p.is_absolute()) return p;
    return base / p;
}

}  // namespace

void apply_json(RunConfig& cfg, const json& j, const std::filesystem::path& base) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    auto& p = cfg.params;
    for (const auto& [key, v] : j.items()) {
        if (key == "total_population") p.total_population = get<double>(v, key);
        else if (key == "number_of_citizens") p.n_citizens = get<std::size_t>(v, key);
        else if (key == "number_of_police_units") p.n_police_units = get<std::size_t>(v, key);
        else if (key == "find_job_probability") p.find_job_probability = get<double>(v, key);
        else if (key == "lose_job_probability") p.lose_job_probability = get<double>(v, key);
        else if (key == "nearby_leisure_probability") p.nearby_leisure_probability = get<double>(v, key);
        else if (key == "downtown_leisure_probability") p.downtown_leisure_probability = get<double>(v, key);
        else if (key == "offense_rate") p.offense_rate = get<double>(v, key);
        else if (key == "unemployment_related_increase_in_crime")
            p.unemployment_related_increase_in_crime = get<double>(v, key);
        else if (key == "police_reduction") p.police_reduction = get<double>(v, key);
        else if (key == "increase_no_police") p.increase_no_police = get<double>(v, key);
        else if (key == "unemployment_rate") p.unemployment_rate = get<double>(v, key);
        else if (key == "role_mix") {
            auto mix = get<std::vector<double>>(v, key);
            if (mix.size() != 3) throw ConfigError("role_mix must list three fractions");
            p.role_mix = {mix[0], mix[1], mix[2]};
        } else if (key == "leisure_radius") p.leisure_radius = get<double>(v, key);
        else if (key == "downtown_district_ids") p.downtown_district_ids = get<std::vector<DistrictId>>(v, key);
        else if (key == "power_refresh_period") p.power_refresh_period = get<int>(v, key);
        else if (key == "police_window") p.police_window = get<int>(v, key);
        else if (key == "days") p.n_days = get<int>(v, key);
        else if (key == "epsilon_mode") {
            auto m = get<std::string>(v, key);
            if (m == "interpolated") p.epsilon_mode = engine::EpsilonMode::Interpolated;
            else if (m == "printed") p.epsilon_mode = engine::EpsilonMode::Printed;
            else throw ConfigError("epsilon_mode must be 'interpolated' or 'printed'");
        } else if (key == "seed") p.seed = get<std::uint64_t>(v, key);
        else if (key == "origin_easting") cfg.grid.origin_easting = get<double>(v, key);
        else if (key == "origin_northing") cfg.grid.origin_northing = get<double>(v, key);
        else if (key == "cell_side") cfg.grid.cell_side = get<double>(v, key);
        else if (key == "n_rows") cfg.grid.n_rows = get<int>(v, key);
        else if (key == "n_cols") cfg.grid.n_cols = get<int>(v, key);
        else if (key == "crime_csv") cfg.crime_csv = path_value(v, key, base);
        else if (key == "cell_attrs_csv") cfg.cell_attrs_csv = path_value(v, key, base);
        else if (key == "buildings_csv") cfg.buildings_csv = path_value(v, key, base);
        else if (key == "land_mask_csv") cfg.land_mask_csv = path_value(v, key, base);
        else if (key == "districts_csv") cfg.districts_csv = path_value(v, key, base);
        else if (key == "env_dir") cfg.env_dir = path_value(v, key, base);
        else if (key == "out_dir") cfg.out_dir = path_value(v, key, base);
        else if (key == "categories") cfg.categories = get<std::vector<std::string>>(v, key);
        else if (key == "skip_malformed_rows") cfg.skip_malformed_rows = get<bool>(v, key);
        else if (key == "year_start") cfg.year_start = get<int>(v, key);
        else if (key == "year_end") cfg.year_end = get<int>(v, key);
        else if (key == "target_year") cfg.target_year = get<int>(v, key);
        else if (key == "strategy") cfg.strategy = get<std::string>(v, key);
        else if (key == "replications") cfg.replications = get<std::size_t>(v, key);
        else if (key == "threads") cfg.threads = get<int>(v, key);
        else if (key == "export_events") cfg.export_events = get<bool>(v, key);
        else if (key == "export_heatmap") cfg.export_heatmap = get<bool>(v, key);
        else if (key == "mu_candidates") cfg.mu_candidates = get<std::vector<double>>(v, key);
        else if (key == "nearby_candidates") cfg.nearby_candidates = get<std::vector<double>>(v, key);
        else if (key == "downtown_candidates") cfg.downtown_candidates = get<std::vector<double>>(v, key);
        else if (key == "sweep_replications") cfg.sweep_replications = get<std::size_t>(v, key);
        else if (key == "synth_rows") cfg.synth_rows = get<int>(v, key);
        else if (key == "synth_cols") cfg.synth_cols = get<int>(v, key);
        else if (key == "synth_districts") cfg.synth_districts = get<int>(v, key);
        else if (key == "synth_year_start") cfg.synth_year_start = get<int>(v, key);
        else if (key == "synth_year_end") cfg.synth_year_end = get<int>(v, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
    RunConfig cfg;
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    cfg.env_dir = base / cfg.env_dir;
    cfg.out_dir = base / cfg.out_dir;
    apply_json(cfg, j, base);
    for (const auto* input : {&cfg.crime_csv, &cfg.cell_attrs_csv, &cfg.buildings_csv, &cfg.land_mask_csv,
                              &cfg.districts_csv})
        if (!input->empty() && !std::filesystem::exists(*input))
            throw InputError(path.string() + ": referenced file " + input->string() + " does not exist");
    cfg.validate();
    return cfg;
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
    auto j = params_to_json(cfg.params);
    j["origin_easting"] = cfg.grid.origin_easting;
    j["origin_northing"] = cfg.grid.origin_northing;
    j["cell_side"] = cfg.grid.cell_side;
    j["n_rows"] = cfg.grid.n_rows;
    j["n_cols"] = cfg.grid.n_cols;
    auto put_path = [&](const char* key, const std::filesystem::path& p) {
        if (!p.empty()) j[key] = p.generic_string();
    };
    put_path("crime_csv", cfg.crime_csv);
    put_path("cell_attrs_csv", cfg.cell_attrs_csv);
    put_path("buildings_csv", cfg.buildings_csv);
    put_path("land_mask_csv", cfg.land_mask_csv);
    put_path("districts_csv", cfg.districts_csv);
    put_path("env_dir", cfg.env_dir);
    put_path("out_dir", cfg.out_dir);
    j["categories"] = cfg.categories;
    if (cfg.year_start) j["year_start"] = *cfg.year_start;
    if (cfg.year_end) j["year_end"] = *cfg.year_end;
    if (cfg.target_year) j["target_year"] = *cfg.target_year;
    j["strategy"] = cfg.strategy;
    j["replications"] = cfg.replications;
    j["threads"] = cfg.threads;
    j["mu_candidates"] = cfg.mu_candidates;
    j["nearby_candidates"] = cfg.nearby_candidates;
    j["downtown_candidates"] = cfg.downtown_candidates;
    j["sweep_replications"] = cfg.sweep_replications;
    return j;
}

Environment load_environment(const std::filesystem::path& dir) {
    auto open = [&](const char* name) {
        auto path = dir / name;
        std::ifstream in(path);
        if (!in) throw InputError("missing environment file " + path.string() + " (run build-env first)");
        return in;
    };
    geodata::GridSpec spec;
    {
        auto in = open("environment.json");
        json j;
        try {
            j = json::parse(in);
            spec.origin_easting = j.at("origin_easting").get<double>();
            spec.origin_northing = j.at("origin_northing").get<double>();
            spec.cell_side = j.at("cell_side").get<double>();
            spec.n_rows = j.at("n_rows").get<int>();
            spec.n_cols = j.at("n_cols").get<int>();
        } catch (const json::exception& e) {
            throw InputError((dir / "environment.json").string() + ": " + e.what());
        }
    }
    auto in_grid = open("grid.csv");
    auto in_districts = open("districts.csv");
    auto in_counts = open("counts_by_year.csv");
    auto attrs = geodata::read_cell_attrs(in_grid, (dir / "grid.csv").string());
    auto districts = geodata::read_districts(in_districts, (dir / "districts.csv").string());
    auto grid = geodata::build_grid(spec, attrs, std::move(districts));
    auto series = geodata::read_counts_by_year(in_counts, spec, (dir / "counts_by_year.csv").string());
    return Environment{std::move(grid), std::move(series)};
}

TrainingWindow training_window(const geodata::CellYearSeries& series, std::optional<int> target_year) {
    TrainingWindow w;
    w.target_year = target_year.value_or(series.year_end());
    if (w.target_year <= series.year_start())
        throw ConfigError("target_year must come after the first year of the crime series");
    w.last_training_year = std::min(w.target_year - 1, series.year_end());
    return w;
}

}  // namespace crimesim::config
