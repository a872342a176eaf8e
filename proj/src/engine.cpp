#include "crimesim/engine.hpp"

#include <algorithm>
#include <cmath>

#include "crimesim/error.hpp"

namespace crimesim::engine {

namespace {

void check_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

void SimParams::validate() const {
    check_probability(find_job_probability, "find_job_probability");
    check_probability(lose_job_probability, "lose_job_probability");
    check_probability(nearby_leisure_probability, "nearby_leisure_probability");
    check_probability(downtown_leisure_probability, "downtown_leisure_probability");
    check_probability(unemployment_related_increase_in_crime, "unemployment_related_increase_in_crime");
    check_probability(police_reduction, "police_reduction");
    check_probability(increase_no_police, "increase_no_police");
    check_probability(unemployment_rate, "unemployment_rate");
    if (nearby_leisure_probability + downtown_leisure_probability > 1.0 + 1e-12)
        throw ConfigError("nearby_leisure_probability + downtown_leisure_probability must be <= 1");
    if (!(offense_rate >= 0.0) || !std::isfinite(offense_rate)) throw ConfigError("offense_rate must be >= 0");
    if (!(total_population >= 0.0) || !std::isfinite(total_population))
        throw ConfigError("total_population must be >= 0");
    if (!(leisure_radius >= 0.0)) throw ConfigError("leisure_radius must be >= 0");
    if (power_refresh_period < 1) throw ConfigError("power_refresh_period must be >= 1");
    if (police_window < 1) throw ConfigError("police_window must be >= 1");
    if (n_days < 0) throw ConfigError("n_days must be >= 0");
    role_mix.validate();
    if (unemployment_rate >= 1.0) throw ConfigError("unemployment_rate must be < 1");
    offense_rates(*this);
}

double SimParams::resolved_population(const geodata::Grid& grid) const {
    if (total_population > 0.0) return total_population;
    double sum = 0.0;
    for (const auto& d : grid.districts()) sum += static_cast<double>(d.population);
    return sum;
}

double SimParams::citizen_agent_rate(const geodata::Grid& grid) const {
    if (n_citizens == 0) return 0.0;
    const double rc = resolved_population(grid) / static_cast<double>(n_citizens);
    if (!(rc > 0.0)) throw ConfigError("citizen_agent_rate must be > 0 (set total_population)");
    return rc;
}

OffenseRates offense_rates(double offense_rate, double mu, double unemployment_rate) {
    if (!(unemployment_rate < 1.0)) throw ConfigError("unemployment_rate must be < 1");
    const double r_e = offense_rate * (1.0 - mu * unemployment_rate / (1.0 - unemployment_rate));
    if (r_e < 0.0)
        throw ConfigError("employed offense rate is negative: mu * U / (1 - U) exceeds 1");
    return {offense_rate * (1.0 + mu), r_e};
}

OffenseRates offense_rates(const SimParams& p) {
    return offense_rates(p.offense_rate, p.unemployment_related_increase_in_crime, p.unemployment_rate);
}

double crime_probability(bool unemployed, double power, std::uint32_t occupancy, double eps,
                         const OffenseRates& rates, double citizen_agent_rate) {
    const double z = std::max<std::uint32_t>(occupancy, 1);
    const double p = power * citizen_agent_rate * eps * (unemployed ? rates.unemployed : rates.employed) / z;
    return std::clamp(p, 0.0, 1.0);
}

World::World(const geodata::Grid& g, const SimParams& p, EngineOptions o)
    : grid(&g),
      params(p),
      rates(offense_rates(p)),
      citizen_agent_rate(p.citizen_agent_rate(g)),
      leisure(g, p.leisure_radius, p.downtown_district_ids),
      options(o) {}

SimState init_state(const World& world, Rng& rng) {
    const auto& grid = *world.grid;
    const auto& p = world.params;
    SimState s;
    s.citizens = population::spawn_citizens(p.n_citizens, grid, p.role_mix, p.unemployment_rate, rng);
    if (p.n_police_units > 0 && grid.walkable_cells().empty())
        throw ConfigError("police units configured but the grid has no walkable cell");
    const auto walkable = grid.walkable_cells();
    for (std::size_t k = 0; k < p.n_police_units; ++k) {
        PoliceUnit u;
        u.shift = static_cast<Slot>(k % kSlotsPerDay);
        u.work_cell = walkable[rng.index(walkable.size())];
        s.units.push_back(u);
    }
    s.ledger = PoliceLedger(grid.n_cells(), p.police_window);
    s.power.assign(grid.n_cells(), 1.0);
    s.crime_counter.assign(grid.n_cells(), 0);
    s.occupancy.assign(grid.n_cells(), 0);
    s.positions.resize(s.citizens.size());
    for (std::size_t i = 0; i < s.citizens.size(); ++i) s.positions[i] = s.citizens[i].home_cell;
    return s;
}

void step_slot(const World& world, SimState& s, const SimClock& clock, Rng& rng) {
    const auto& p = world.params;

    // 1. Police.
    deploy_police(s.units, clock);
    s.ledger.clear_presence();
    for (const auto& u : s.units)
        if (u.current_cell) s.ledger.mark_present(*u.current_cell);

    // 2. Movement.
    for (std::size_t i = 0; i < s.citizens.size(); ++i) {
        auto& c = s.citizens[i];
        CellIndex dest = c.home_cell;
        switch (population::planned_action(c.role, clock.slot, c.unemployed)) {
            case population::Action::Work:
                dest = c.work_cell;
                population::employment_step(c, rng, p.find_job_probability, p.lose_job_probability);
                break;
            case population::Action::SeekJob:
                dest = c.home_cell;
                population::employment_step(c, rng, p.find_job_probability, p.lose_job_probability);
                break;
            case population::Action::Leisure:
                dest = population::leisure_destination(c, world.leisure, p.nearby_leisure_probability,
                                                       p.downtown_leisure_probability, rng)
                           .cell;
                break;
            case population::Action::Rest:
                dest = c.home_cell;
                break;
        }
        s.positions[i] = dest;
    }

    // 3. Occupancy from settled positions.
    std::fill(s.occupancy.begin(), s.occupancy.end(), 0u);
    for (CellIndex pos : s.positions) ++s.occupancy[pos];

    // 4. Crime draws.
    const std::size_t n_police = s.units.size();
    for (std::size_t i = 0; i < s.citizens.size(); ++i) {
        const CellIndex cell = s.positions[i];
        const double eps = epsilon(cell, s.ledger, p, n_police);
        const std::uint32_t z = world.options.unit_occupancy ? 1u : s.occupancy[cell];
        const double prob = crime_probability(s.citizens[i].unemployed, s.power[cell], z, eps, world.rates,
                                              world.citizen_agent_rate);
        if (rng.uniform() < prob) {
            ++s.crime_counter[cell];
            s.events.push_back(CrimeEvent{clock.day, clock.slot, cell});
        }
    }

    // 5. Ledger.
    s.ledger.commit_slot();
}

SimResult run_year(const geodata::Grid& grid, const SimParams& params, const PoliceStrategy& strategy,
                   std::span<const crimestats::CellTrend> trends, const EngineOptions& options) {
    params.validate();
    if (trends.size() != grid.n_cells()) throw ConfigError("trends do not cover the grid");
    World world(grid, params, options);
    Rng rng(params.seed);
    SimState state = init_state(world, rng);

    SimResult result;
    result.seed = params.seed;
    result.params = params;
    result.slot_totals.assign(static_cast<std::size_t>(params.n_days) * kSlotsPerDay, 0);
    result.daily_unemployment.reserve(params.n_days);

    SimClock clock;
    for (int day = 0; day < params.n_days; ++day) {
        state.ledger.begin_day(day);
        if (day % params.power_refresh_period == 0) {
            const auto alpha = crimestats::redraw_alpha(rng, grid.n_cells());
            state.power = crimestats::compute_criminal_power(trends, alpha);
            if (options.power_scale != 1.0)
                for (auto& v : state.power) v *= options.power_scale;
            redistribute_police_units(strategy, grid, state.power, state.ledger, state.units, rng);
            ++result.refresh_count;
        }
        clock = SimClock{day, Slot::Morning};
        for (int k = 0; k < kSlotsPerDay; ++k) {
            const std::size_t before = state.events.size();
            step_slot(world, state, clock, rng);
            result.slot_totals[static_cast<std::size_t>(day) * kSlotsPerDay + k] =
                static_cast<std::uint32_t>(state.events.size() - before);
            clock.advance();
        }
        std::size_t unemployed = 0;
        for (const auto& c : state.citizens) unemployed += c.unemployed ? 1 : 0;
        result.daily_unemployment.push_back(
            state.citizens.empty() ? 0.0 : static_cast<double>(unemployed) / state.citizens.size());
    }

    result.cell_counts = std::move(state.crime_counter);
    for (const auto& d : grid.districts()) result.district_counts[d.id] = 0;
    for (CellIndex c = 0; c < result.cell_counts.size(); ++c)
        if (result.cell_counts[c]) result.district_counts[grid.cell(c).district] += result.cell_counts[c];
    result.events = std::move(state.events);
    return result;
}

}  // namespace crimesim::engine
