#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crimesim/crimestats.hpp"
#include "crimesim/geodata.hpp"
#include "crimesim/population.hpp"
#include "crimesim/rng.hpp"

namespace crimesim::engine {

struct SimClock {
    int day = 0;
    Slot slot = Slot::Morning;

    /// morning -> afternoon -> night -> next day's morning.
    void advance() {
        if (slot == Slot::Night) {
            slot = Slot::Morning;
            ++day;
        } else {
            slot = static_cast<Slot>(static_cast<int>(slot) + 1);
        }
    }
    bool operator==(const SimClock&) const = default;
};

struct PoliceUnit {
    Slot shift = Slot::Morning;
    CellIndex work_cell = 0;
    std::optional<CellIndex> current_cell;

    bool operator==(const PoliceUnit&) const = default;
};

/// Day-level police presence per cell over a trailing window (30 days by
/// default). Day d's flag lives in ring slot d % window and accumulates the
/// presence of every slot of that day.
class PoliceLedger {
public:
    explicit PoliceLedger(std::size_t n_cells = 0, int window = 30);

    /// Starts day `day`: the ring slot that held day - window is cleared.
    void begin_day(int day);
    /// Clears the current-slot presence flags.
    void clear_presence();
    void mark_present(CellIndex cell);
    bool present(CellIndex cell) const { return current_[cell] != 0; }
    /// Folds the current-slot presence into today's day flag.
    void commit_slot();

    /// Days among the last `window` (today included) with any unit present in
    /// the cell; today counts if a unit was there in an earlier slot or is
    /// there now.
    int visits_in_window(CellIndex cell) const;

    int window() const noexcept { return window_; }
    std::size_t n_cells() const noexcept { return n_cells_; }

private:
    std::size_t n_cells_;
    int window_;
    int today_ = 0;
    std::vector<std::uint8_t> ring_;     // n_cells * window
    std::vector<std::uint8_t> current_;  // n_cells
    std::vector<CellIndex> marked_;
};

/// Deterrence formula. `Interpolated` (default) falls linearly from 1 + psi
/// with no recent visits to 1 - rho after a full window of visits, and is
/// 1 - rho while a unit is present. `Printed` is the alternative reading
/// 1 - (v/window)(psi + rho) - rho when present, 1 - rho otherwise.
enum class EpsilonMode { Interpolated, Printed };

struct SimParams {
    /// 0 means "sum of the district populations".
    double total_population = 572260.0;
    std::size_t n_citizens = 1000;
    std::size_t n_police_units = 0;
    double find_job_probability = 0.005;
    double lose_job_probability = 0.0022;
    double nearby_leisure_probability = 0.50;
    double downtown_leisure_probability = 0.075;
    /// Per agent and slot.
    double offense_rate = 5.39e-8;
    /// mu: relative increase of the offense rate when unemployed.
    double unemployment_related_increase_in_crime = 0.10;
    /// rho
    double police_reduction = 0.3;
    /// psi
    double increase_no_police = 0.2;
    double unemployment_rate = 0.3086;
    population::RoleMix role_mix;
    double leisure_radius = 5.0;
    std::vector<DistrictId> downtown_district_ids{1};
    int power_refresh_period = 14;
    int police_window = 30;
    int n_days = 365;
    EpsilonMode epsilon_mode = EpsilonMode::Interpolated;
    std::uint64_t seed = 0;

    /// Throws ConfigError on any violated invariant.
    void validate() const;
    /// r_c = total population / agents.
    double citizen_agent_rate(const geodata::Grid& grid) const;
    double resolved_population(const geodata::Grid& grid) const;

    bool operator==(const SimParams&) const = default;
};

struct OffenseRates {
    double unemployed = 0.0;  // r_u
    double employed = 0.0;    // r_e
};

/// r_u = r(1 + mu), r_e = r(1 - mu U / (1 - U)), so U r_u + (1 - U) r_e = r.
OffenseRates offense_rates(double offense_rate, double mu, double unemployment_rate);
OffenseRates offense_rates(const SimParams& params);

int visits_in_window(CellIndex cell, const PoliceLedger& ledger);

double epsilon_value(bool present, int visits, int window, double psi, double rho,
                     EpsilonMode mode = EpsilonMode::Interpolated);
double epsilon(CellIndex cell, const PoliceLedger& ledger, const SimParams& params,
               std::size_t n_police_configured);

/// power * r_c * eps * (r_u or r_e) / z, clamped to [0, 1].
double crime_probability(bool unemployed, double power, std::uint32_t occupancy, double eps,
                         const OffenseRates& rates, double citizen_agent_rate);

/// Units on shift sit at their work cell; the rest are off the map.
void deploy_police(std::span<PoliceUnit> units, const SimClock& clock);

/// Patrol assignment; called on every power-refresh day.
using PoliceStrategy = std::function<void(const geodata::Grid& grid, std::span<const double> power,
                                          const PoliceLedger& ledger, std::vector<PoliceUnit>& units,
                                          Rng& rng)>;

/// Built-ins: "static", "random", "top_power". Throws ConfigError otherwise.
PoliceStrategy make_strategy(std::string_view name);
void register_strategy(std::string name, PoliceStrategy strategy);
std::vector<std::string> strategy_names();

void redistribute_police_units(const PoliceStrategy& strategy, const geodata::Grid& grid,
                               std::span<const double> power, const PoliceLedger& ledger,
                               std::vector<PoliceUnit>& units, Rng& rng);

struct CrimeEvent {
    int day = 0;
    Slot slot = Slot::Morning;
    CellIndex cell = 0;

    bool operator==(const CrimeEvent&) const = default;
};

/// Test hooks. Defaults reproduce the model.
struct EngineOptions {
    /// Treat every occupied cell as holding exactly one citizen (z = 1).
    bool unit_occupancy = false;
    /// Multiplies the criminal power field after each refresh.
    double power_scale = 1.0;
};

/// Immutable per-run context.
struct World {
    World(const geodata::Grid& grid, const SimParams& params, EngineOptions options = {});

    const geodata::Grid* grid;
    SimParams params;
    OffenseRates rates;
    double citizen_agent_rate;
    population::LeisureIndex leisure;
    EngineOptions options;
};

struct SimState {
    std::vector<population::Citizen> citizens;
    std::vector<PoliceUnit> units;
    PoliceLedger ledger;
    std::vector<double> power;
    std::vector<std::uint32_t> crime_counter;
    std::vector<std::uint32_t> occupancy;
    std::vector<CellIndex> positions;
    std::vector<CrimeEvent> events;
};

/// Spawns citizens, then places each police unit (shift k mod 3) on a uniform
/// walkable cell. Power is left at 1 until the first refresh.
SimState init_state(const World& world, Rng& rng);

/// One slot: deploy police; move every citizen (employment draw at its W/J
/// slot, leisure draws when at leisure); count occupancy; one crime draw per
/// citizen in index order; commit police presence to the ledger.
void step_slot(const World& world, SimState& state, const SimClock& clock, Rng& rng);

struct SimResult {
    std::vector<std::uint32_t> cell_counts;
    /// Every grid district (ascending id), plus kNoDistrict if crimes fell
    /// in cells without a district.
    std::map<DistrictId, std::uint64_t> district_counts;
    /// Index day * 3 + slot.
    std::vector<std::uint32_t> slot_totals;
    /// Unemployed fraction at the end of each day.
    std::vector<double> daily_unemployment;
    std::vector<CrimeEvent> events;
    int refresh_count = 0;
    std::uint64_t seed = 0;
    SimParams params;

    std::uint64_t total() const { return events.size(); }
    bool operator==(const SimResult&) const = default;
};

/// Runs params.n_days days from params.seed. Power is refreshed (new alpha
/// draw) and police redistributed on every day divisible by
/// power_refresh_period.
SimResult run_year(const geodata::Grid& grid, const SimParams& params, const PoliceStrategy& strategy,
                   std::span<const crimestats::CellTrend> trends, const EngineOptions& options = {});

}  // namespace crimesim::engine
