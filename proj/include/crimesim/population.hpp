#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "crimesim/geodata.hpp"
#include "crimesim/rng.hpp"

namespace crimesim {

/// The three 8-hour periods of a day, in order.
enum class Slot : std::uint8_t { Morning = 0, Afternoon = 1, Night = 2 };
inline constexpr int kSlotsPerDay = 3;
std::string_view to_string(Slot s);

}  // namespace crimesim

namespace crimesim::population {

/// Which slot a citizen works in.
enum class Role : std::uint8_t { Morning = 0, Afternoon = 1, Night = 2 };
enum class Action : std::uint8_t { Work, SeekJob, Leisure, Rest };
enum class LeisureScope : std::uint8_t { NearHome, Downtown, AtHome };

std::string_view to_string(Role r);
std::string_view to_string(Action a);

struct RoleMix {
    double morning = 0.7;
    double afternoon = 0.2;
    double night = 0.1;

    void validate() const;
    /// Maps u in [0,1) onto a role by cumulative fractions.
    Role pick(double u) const;

    bool operator==(const RoleMix&) const = default;
};

struct Citizen {
    CellIndex home_cell = 0;
    CellIndex work_cell = 0;
    Role role = Role::Morning;
    bool unemployed = false;

    bool operator==(const Citizen&) const = default;
};

/// Homes: district drawn proportionally to population, then a uniform
/// habitable cell of that district. Work: uniform habitable cell citywide.
/// Five uniforms per citizen, in citizen order: district, home, work, role,
/// employment.
std::vector<Citizen> spawn_citizens(std::size_t n, const geodata::Grid& grid, const RoleMix& mix,
                                    double unemployment_rate, Rng& rng);

/// Daily routines: morning (W|J, L, R), afternoon (L, W, R), night (R, L, W).
Action planned_action(Role role, Slot slot, bool unemployed);

/// Slot in which `role` performs its W/J action.
constexpr Slot work_slot(Role role) { return static_cast<Slot>(role); }

/// One daily employment transition; consumes exactly one uniform.
/// Returns true if the status changed.
bool employment_step(Citizen& citizen, Rng& rng, double find_job_probability,
                     double lose_job_probability);

/// Precomputed leisure candidate sets: walkable cells within `radius`
/// (Euclidean, in cell units) of each habitable cell, and walkable cells of the
/// downtown districts. Cells that are not walkable have no near candidates.
class LeisureIndex {
public:
    LeisureIndex(const geodata::Grid& grid, double radius, std::span<const DistrictId> downtown_districts);

    std::span<const CellIndex> near(CellIndex home) const;
    std::span<const CellIndex> downtown() const noexcept { return downtown_; }

private:
    std::vector<std::size_t> offsets_;  // n_cells + 1, into near_
    std::vector<CellIndex> near_;
    std::vector<CellIndex> downtown_;
};

struct LeisureChoice {
    CellIndex cell = 0;
    LeisureScope scope = LeisureScope::AtHome;
};

/// Draws a scope with one uniform (near if u < p_near, downtown if
/// u < p_near + p_down, home otherwise), then a uniform candidate cell with a
/// second uniform. Empty candidate sets fall back to the home cell.
LeisureChoice leisure_destination(const Citizen& citizen, const LeisureIndex& index,
                                  double nearby_probability, double downtown_probability, Rng& rng);

CellIndex leisure_destination(const Citizen& citizen, const geodata::Grid& grid,
                              double nearby_probability, double downtown_probability, double radius,
                              std::span<const DistrictId> downtown_districts, Rng& rng);

}  // namespace crimesim::population
