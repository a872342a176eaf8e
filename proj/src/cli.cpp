#include "crimesim/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crimesim/calibration.hpp"
#include "crimesim/config.hpp"
#include "crimesim/crimestats.hpp"
#include "crimesim/error.hpp"
#include "crimesim/metrics.hpp"
#include "crimesim/sim_io.hpp"
#include "crimesim/synthcity.hpp"

namespace crimesim::cli {

namespace fs = std::filesystem;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::optional<std::string> strategy;
    std::optional<int> threads;
    std::optional<std::string> out;
    // evaluate / report
    std::string sim;
    std::string real;
    std::string grid;
    std::string counts;
    int block = 4;
};

/// Config file (if any), then command-line overrides.
config::RunConfig resolve(const Flags& f) {
    config::RunConfig cfg = f.config.empty() ? config::RunConfig{} : config::load_config(f.config);
    if (f.seed) cfg.params.seed = *f.seed;
    if (f.reps) {
        cfg.replications = *f.reps;
        cfg.sweep_replications = *f.reps;
    }
    if (f.strategy) cfg.strategy = *f.strategy;
    if (f.threads) cfg.threads = *f.threads;
    if (f.out) cfg.out_dir = *f.out;
    return cfg;
}

std::ifstream open_input(const fs::path& path, const char* what) {
    if (path.empty()) throw InputError(std::string("config does not name ") + what);
    std::ifstream in(path);
    if (!in) throw InputError(std::string("cannot open ") + what + " " + path.string());
    return in;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
    io::write_file_atomic(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

int cmd_synth(const Flags& f, std::ostream& out) {
    auto cfg = resolve(f);
    const std::uint64_t seed = cfg.params.seed;
    auto spec = synthcity::hotspot_spec(cfg.synth_rows, cfg.synth_cols, cfg.synth_districts,
                                        cfg.synth_year_start, cfg.synth_year_end, seed);
    auto city = synthcity::gen_city(spec);
    Rng rng(splitmix64(seed));
    auto crimes = synthcity::gen_crimes(city, rng);

    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);
    io::write_file_atomic(dir / "cells.csv", [&](std::ostream& o) {
        o << "row,col,district,habitable,walkable\n";
        for (const auto& a : city.attrs)
            o << a.row << ',' << a.col << ',' << a.district << ',' << a.habitable << ',' << a.walkable << '\n';
    });
    io::write_file_atomic(dir / "districts.csv",
                          [&](std::ostream& o) { geodata::write_districts(o, city.districts); });
    io::write_file_atomic(dir / "crimes.csv", [&](std::ostream& o) { synthcity::write_crimes_csv(o, crimes); });
    io::write_file_atomic(dir / "intensity.csv", [&](std::ostream& o) { synthcity::write_intensity_csv(o, city); });

    // A ready-to-run config for the generated city.
    config::RunConfig run;
    run.grid = city.spec;
    run.crime_csv = "crimes.csv";
    run.cell_attrs_csv = "cells.csv";
    run.districts_csv = "districts.csv";
    run.env_dir = "env";
    run.out_dir = "out";
    run.target_year = city.year_end;
    run.params.seed = seed;
    run.params.downtown_district_ids = {spec.downtown};
    double population = 0.0;
    for (const auto& d : city.districts) population += static_cast<double>(d.population);
    run.params.total_population = population;
    auto series = geodata::aggregate_yearly(crimes, city.spec, city.year_start, city.year_end);
    run.params.offense_rate = crimestats::offense_rate_from_history(series, city.year_end - 1, population);
    write_json(dir / "config.json", config::to_json(run));

    out << "synthetic city " << spec.n_rows << "x" << spec.n_cols << ", " << spec.n_districts << " districts, "
        << crimes.size() << " crimes " << city.year_start << "-" << city.year_end << " -> " << dir.string() << '\n';
    return kExitOk;
}

int cmd_build_env(const Flags& f, std::ostream& out) {
    auto cfg = resolve(f);
    cfg.grid.validate();
    auto in_districts = open_input(cfg.districts_csv, "districts_csv");
    auto districts = geodata::read_districts(in_districts, cfg.districts_csv.string());

    std::vector<geodata::CellAttr> attrs;
    if (!cfg.cell_attrs_csv.empty()) {
        auto in = open_input(cfg.cell_attrs_csv, "cell_attrs_csv");
        attrs = geodata::read_cell_attrs(in, cfg.cell_attrs_csv.string());
    } else if (!cfg.buildings_csv.empty()) {
        auto in = open_input(cfg.buildings_csv, "buildings_csv");
        auto buildings = geodata::read_buildings(in, cfg.buildings_csv.string());
        std::set<geodata::RowCol> mask;
        if (!cfg.land_mask_csv.empty()) {
            auto in_mask = open_input(cfg.land_mask_csv, "land_mask_csv");
            mask = geodata::read_land_mask(in_mask, cfg.land_mask_csv.string());
        }
        attrs = geodata::derive_cell_attrs(buildings, mask, cfg.grid);
    } else {
        throw InputError("config must name cell_attrs_csv or buildings_csv");
    }
    auto grid = geodata::build_grid(cfg.grid, attrs, std::move(districts));

    auto in_crimes = open_input(cfg.crime_csv, "crime_csv");
    auto parsed = geodata::parse_crime_csv(
        in_crimes, cfg.categories,
        cfg.skip_malformed_rows ? geodata::RowErrorPolicy::Skip : geodata::RowErrorPolicy::Abort,
        cfg.crime_csv.string());

    int y0 = cfg.year_start.value_or(std::numeric_limits<int>::max());
    int y1 = cfg.year_end.value_or(std::numeric_limits<int>::min());
    for (const auto& r : parsed.records) {
        if (!cfg.year_start) y0 = std::min(y0, r.year);
        if (!cfg.year_end) y1 = std::max(y1, r.year);
    }
    if (y0 > y1) throw InputError("no crime records and no year_start/year_end configured");
    geodata::AggregateReport agg;
    auto series = geodata::aggregate_yearly(parsed.records, cfg.grid, y0, y1, &agg);

    const fs::path dir = f.out ? fs::path(*f.out) : cfg.env_dir;
    fs::create_directories(dir);
    io::write_file_atomic(dir / "grid.csv", [&](std::ostream& o) { geodata::write_cell_attrs(o, grid); });
    io::write_file_atomic(dir / "districts.csv",
                          [&](std::ostream& o) { geodata::write_districts(o, grid.districts()); });
    io::write_file_atomic(dir / "counts_by_year.csv",
                          [&](std::ostream& o) { geodata::write_counts_by_year(o, series, cfg.grid); });
    write_json(dir / "environment.json", {{"origin_easting", cfg.grid.origin_easting},
                                          {"origin_northing", cfg.grid.origin_northing},
                                          {"cell_side", cfg.grid.cell_side},
                                          {"n_rows", cfg.grid.n_rows},
                                          {"n_cols", cfg.grid.n_cols},
                                          {"year_start", y0},
                                          {"year_end", y1}});

    const std::size_t dropped =
        parsed.malformed + parsed.dropped_category + agg.out_of_bounds + agg.out_of_range_years;
    nlohmann::ordered_json report{{"rows_read", parsed.rows_read},
                                  {"located", agg.stored},
                                  {"dropped", dropped},
                                  {"dropped_malformed", parsed.malformed},
                                  {"dropped_category", parsed.dropped_category},
                                  {"dropped_out_of_bounds", agg.out_of_bounds},
                                  {"dropped_out_of_range_year", agg.out_of_range_years},
                                  {"diagnostics", parsed.diagnostics},
                                  {"habitable_cells", grid.habitable_cells().size()},
                                  {"walkable_cells", grid.walkable_cells().size()}};
    write_json(dir / "build_report.json", report);
    out << "environment " << cfg.grid.n_rows << "x" << cfg.grid.n_cols << ", years " << y0 << "-" << y1
        << ": located " << agg.stored << ", dropped " << dropped << " -> " << dir.string() << '\n';
    return kExitOk;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
    auto cfg = resolve(f);
    cfg.validate();
    auto env = config::load_environment(cfg.env_dir);
    const auto window = config::training_window(env.series, cfg.target_year);
    const auto trends = crimestats::fit_trends(env.series, window.last_training_year, window.target_year);
    const auto strategy = engine::make_strategy(cfg.strategy);

    // Replication 0 runs with the given seed; replication i > 0 with
    // replication_seed(seed, i).
    const auto n = static_cast<std::int64_t>(cfg.replications);
    std::vector<std::vector<std::uint32_t>> counts(cfg.replications);
    engine::SimResult first;
    std::exception_ptr failure;
#ifdef _OPENMP
    const int threads = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#endif
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            auto p = cfg.params;
            if (i > 0) p.seed = replication_seed(cfg.params.seed, static_cast<std::uint64_t>(i));
            auto result = engine::run_year(env.grid, p, strategy, trends);
            counts[i] = result.cell_counts;
            if (i == 0) first = std::move(result);
        } catch (...) {
#pragma omp critical(crimesim_simulate_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);
    const auto& spec = env.grid.spec();
    std::vector<double> cell(first.cell_counts.begin(), first.cell_counts.end());
    io::write_file_atomic(dir / "cell_counts.csv", [&](std::ostream& o) { crimestats::write_matrix(o, cell, spec); });
    if (cfg.export_events)
        io::write_file_atomic(dir / "events.csv",
                              [&](std::ostream& o) { io::write_events_csv(o, first, env.grid); });
    io::write_file_atomic(dir / "summary.json",
                          [&](std::ostream& o) { io::write_summary_json(o, first, env.grid); });

    // Expected power (alpha = 0) for inspection.
    std::vector<double> zero(env.grid.n_cells(), 0.0);
    const auto power = crimestats::compute_criminal_power(trends, zero);
    io::write_file_atomic(dir / "power.csv", [&](std::ostream& o) { crimestats::write_matrix(o, power, spec); });

    if (cfg.replications > 1) {
        std::vector<double> mean(env.grid.n_cells(), 0.0);
        for (const auto& c : counts)
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += c[k];
        for (auto& v : mean) v /= static_cast<double>(cfg.replications);
        io::write_file_atomic(dir / "mean_counts.csv", [&](std::ostream& o) { crimestats::write_matrix(o, mean, spec); });
    }
    if (cfg.export_heatmap) {
        auto img = io::render_heatmap(cell, spec, 4);
        io::write_file_atomic(dir / "heatmap.ppm", [&](std::ostream& o) { io::write_ppm(o, img); });
    }
    out << "seed " << cfg.params.seed << ": " << first.total() << " crimes in year " << window.target_year << " ("
        << cfg.replications << " replication" << (cfg.replications == 1 ? "" : "s") << ") -> " << dir.string()
        << '\n';
    return kExitOk;
}

int cmd_calibrate(const Flags& f, std::ostream& out) {
    auto cfg = resolve(f);
    cfg.validate();
    auto env = config::load_environment(cfg.env_dir);
    const auto window = config::training_window(env.series, cfg.target_year);
    if (window.target_year > env.series.year_end())
        throw ConfigError("calibration needs the target year in the crime series (held-out year)");
    const auto trends = crimestats::fit_trends(env.series, window.last_training_year, window.target_year);
    const auto heldout = env.series.year_slice(window.target_year);

    calibration::SweepConfig sweep;
    sweep.mu = cfg.mu_candidates;
    sweep.nearby = cfg.nearby_candidates;
    sweep.downtown = cfg.downtown_candidates;
    sweep.replications = cfg.sweep_replications;
    sweep.base = cfg.params;
    sweep.master_seed = cfg.params.seed;
    sweep.threads = cfg.threads;
    auto reports = calibration::sweep(sweep, env.grid, trends, heldout);

    const fs::path dir = cfg.out_dir;
    fs::create_directories(dir);
    io::write_file_atomic(dir / "sweep.csv", [&](std::ostream& o) { calibration::write_sweep_csv(o, reports); });
    io::write_file_atomic(dir / "sweep.json", [&](std::ostream& o) { calibration::write_sweep_json(o, reports); });
    const auto& best = reports.front();
    io::write_file_atomic(dir / "best_counts.csv",
                          [&](std::ostream& o) { crimestats::write_matrix(o, best.mean_counts, env.grid.spec()); });
    io::write_file_atomic(dir / "heldout_counts.csv",
                          [&](std::ostream& o) { crimestats::write_matrix(o, heldout, env.grid.spec()); });

    out << "evaluated " << reports.size() << " configurations x " << sweep.replications << " replications\n";
    out << "selected configuration " << best.id << ": unemployment_related_increase_in_crime=" << best.values.mu
        << " nearby_leisure_probability=" << best.values.nearby
        << " downtown_leisure_probability=" << best.values.downtown << '\n';
    return kExitOk;
}

/// Grid for evaluate: --grid <grid.csv> (shape inferred, districts.csv read
/// from the same directory when present), else the configured environment.
geodata::Grid evaluation_grid(const Flags& f) {
    if (f.grid.empty()) {
        auto cfg = resolve(f);
        return config::load_environment(cfg.env_dir).grid;
    }
    auto in = open_input(f.grid, "grid");
    auto attrs = geodata::read_cell_attrs(in, f.grid);
    geodata::GridSpec spec;
    spec.n_rows = 0;
    spec.n_cols = 0;
    for (const auto& a : attrs) {
        spec.n_rows = std::max(spec.n_rows, a.row + 1);
        spec.n_cols = std::max(spec.n_cols, a.col + 1);
    }
    std::vector<geodata::DistrictInfo> districts;
    const auto dpath = fs::path(f.grid).parent_path() / "districts.csv";
    if (fs::exists(dpath)) {
        std::ifstream din(dpath);
        districts = geodata::read_districts(din, dpath.string());
    }
    return geodata::build_grid(spec, attrs, std::move(districts));
}

std::vector<double> read_raster(const std::string& path, const geodata::GridSpec& spec, const char* what) {
    auto in = open_input(path, what);
    return crimestats::read_matrix(in, spec, path);
}

int cmd_evaluate(const Flags& f, std::ostream& out, std::ostream& err) {
    auto grid = evaluation_grid(f);
    auto sim = metrics::CountRaster::from_grid(read_raster(f.sim, grid.spec(), "--sim"), grid);
    auto real = metrics::CountRaster::from_grid(read_raster(f.real, grid.spec(), "--real"), grid);
    auto report = metrics::evaluate(sim, real, grid);

    const fs::path dir = f.out ? fs::path(*f.out) : resolve(f).out_dir;
    fs::create_directories(dir);
    io::write_file_atomic(dir / "metrics.json", [&](std::ostream& o) { metrics::write_report_json(o, report); });
    io::write_file_atomic(dir / "pai_pei_fai.csv", [&](std::ostream& o) { metrics::write_coverage_csv(o, report); });
    io::write_file_atomic(dir / "precision_recall.csv", [&](std::ostream& o) { metrics::write_prf_csv(o, report); });

    bool coverage_failed = false;
    for (const auto& msg : report.failures) {
        const bool coverage_metric = msg.rfind("PEI@", 0) == 0 || msg.rfind("FAI@", 0) == 0;
        coverage_failed = coverage_failed || coverage_metric;
        err << (coverage_metric ? "error: " : "warning: ") << msg << '\n';
    }
    for (const auto& row : report.coverage)
        out << "coverage " << row.coverage * 100 << "%: PAI " << row.pai << "  PEI " << row.pei << "  FAI "
            << row.fai << '\n';
    out << "district Spearman rho " << report.spearman.rho << " (p " << report.spearman.p << ")\n";
    return coverage_failed ? kExitRuntime : kExitOk;
}

int cmd_report(const Flags& f, std::ostream& out) {
    auto in = open_input(f.counts, "--counts");
    int rows = 0, cols = 0;
    auto values = crimestats::read_matrix(in, rows, cols, f.counts);
    if (rows == 0 || cols == 0) throw InputError(f.counts + ": empty raster");
    geodata::GridSpec spec;
    spec.n_rows = rows;
    spec.n_cols = cols;
    auto img = io::render_heatmap(values, spec, f.block);

    const fs::path dir = f.out ? fs::path(*f.out) : fs::path("out");
    fs::create_directories(dir);
    io::write_file_atomic(dir / "heatmap.ppm", [&](std::ostream& o) { io::write_ppm(o, img); });
    io::write_file_atomic(dir / "counts.csv", [&](std::ostream& o) { crimestats::write_matrix(o, values, spec); });
    out << "heatmap " << img.width << "x" << img.height << " -> " << (dir / "heatmap.ppm").string() << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Agent-based urban crime simulator", "crimesim"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON configuration file");
        sub->add_option("--out", f.out, "Output directory");
    };
    auto run_flags = [&](CLI::App* sub) {
        sub->add_option("--seed", f.seed, "Master seed");
        sub->add_option("--reps", f.reps, "Replications")->check(CLI::PositiveNumber);
        sub->add_option("--strategy", f.strategy, "Police strategy (static, random, top_power)");
        sub->add_option("--threads", f.threads, "Worker threads (0 = all)")->check(CLI::NonNegativeNumber);
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic city and crime history");
    common(synth);
    synth->add_option("--seed", f.seed, "Generator seed");
    auto* build = app.add_subcommand("build-env", "Build the grid and yearly crime counts");
    common(build);
    auto* simulate = app.add_subcommand("simulate", "Simulate one year");
    common(simulate);
    run_flags(simulate);
    auto* calibrate = app.add_subcommand("calibrate", "Sweep the latent parameters against the held-out year");
    common(calibrate);
    run_flags(calibrate);
    auto* evaluate = app.add_subcommand("evaluate", "Score simulated against real counts");
    common(evaluate);
    evaluate->add_option("--sim", f.sim, "Simulated counts matrix")->required();
    evaluate->add_option("--real", f.real, "Real counts matrix")->required();
    evaluate->add_option("--grid", f.grid, "grid.csv (defaults to the configured environment)");
    auto* report = app.add_subcommand("report", "Render a counts matrix as a heatmap");
    common(report);
    report->add_option("--counts", f.counts, "Counts matrix")->required();
    report->add_option("--block", f.block, "Pixels per cell")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (synth->parsed()) return cmd_synth(f, out);
        if (build->parsed()) return cmd_build_env(f, out);
        if (simulate->parsed()) return cmd_simulate(f, out);
        if (calibrate->parsed()) return cmd_calibrate(f, out);
        if (evaluate->parsed()) return cmd_evaluate(f, out, err);
        if (report->parsed()) return cmd_report(f, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitInput;
    } catch (const InputError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitInput;
    } catch (const MetricError& e) {
        err << "metric error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const fs::filesystem_error& e) {
        err << "filesystem error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}

}  // namespace crimesim::cli
