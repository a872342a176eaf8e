#include "crimesim/population.hpp"

#include <algorithm>
#include <cmath>

#include "crimesim/error.hpp"

namespace crimesim {

std::string_view to_string(Slot s) {
    switch (s) {
        case Slot::Morning: return "morning";
        case Slot::Afternoon: return "afternoon";
        case Slot::Night: return "night";
    }
    return "?";
}

}  // namespace crimesim

namespace crimesim::population {

std::string_view to_string(Role r) { return crimesim::to_string(static_cast<Slot>(r)); }

std::string_view to_string(Action a) {
    switch (a) {
        case Action::Work: return "work";
        case Action::SeekJob: return "seek_job";
        case Action::Leisure: return "leisure";
        case Action::Rest: return "rest";
    }
    return "?";
}

void RoleMix::validate() const {
    for (double f : {morning, afternoon, night})
        if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("role_mix: fractions must lie in [0, 1]");
    if (std::abs(morning + afternoon + night - 1.0) > 1e-9)
        throw ConfigError("role_mix: fractions must sum to 1");
}

Role RoleMix::pick(double u) const {
    if (u < morning) return Role::Morning;
    if (u < morning + afternoon) return Role::Afternoon;
    return Role::Night;
}

std::vector<Citizen> spawn_citizens(std::size_t n, const geodata::Grid& grid, const RoleMix& mix,
                                    double unemployment_rate, Rng& rng) {
    mix.validate();
    if (!(unemployment_rate >= 0.0 && unemployment_rate <= 1.0))
        throw ConfigError("unemployment_rate must lie in [0, 1]");
    if (n == 0) return {};
    if (grid.habitable_cells().empty()) throw ConfigError("spawn_citizens: grid has no habitable cell");

    std::vector<std::vector<CellIndex>> homes;
    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& d : grid.districts()) {
        if (d.population == 0) continue;
        auto cells = grid.habitable_cells_of(d.id);
        if (cells.empty())
            throw ConfigError("district " + std::to_string(d.id) + " has population but no habitable cell");
        total += static_cast<double>(d.population);
        cumulative.push_back(total);
        homes.push_back(std::move(cells));
    }
    if (homes.empty()) throw ConfigError("spawn_citizens: no district has population");

    const auto work_cells = grid.habitable_cells();
    std::vector<Citizen> citizens(n);
    for (auto& c : citizens) {
        const double u = rng.uniform() * total;
        auto d = static_cast<std::size_t>(
            std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        d = std::min(d, homes.size() - 1);
        c.home_cell = homes[d][rng.index(homes[d].size())];
        c.work_cell = work_cells[rng.index(work_cells.size())];
        c.role = mix.pick(rng.uniform());
        c.unemployed = rng.uniform() < unemployment_rate;
    }
    return citizens;
}

Action planned_action(Role role, Slot slot, bool unemployed) {
    static constexpr Action kRoutine[3][3] = {
        {Action::Work, Action::Leisure, Action::Rest},   // morning citizen
        {Action::Leisure, Action::Work, Action::Rest},   // afternoon citizen
        {Action::Rest, Action::Leisure, Action::Work},   // night citizen
    };
    Action a = kRoutine[static_cast<int>(role)][static_cast<int>(slot)];
    return a == Action::Work && unemployed ? Action::SeekJob : a;
}

bool employment_step(Citizen& citizen, Rng& rng, double find_job_probability,
                     double lose_job_probability) {
    const double u = rng.uniform();
    if (citizen.unemployed) {
        if (u < find_job_probability) {
            citizen.unemployed = false;
            return true;
        }
    } else if (u < lose_job_probability) {
        citizen.unemployed = true;
        return true;
    }
    return false;
}

LeisureIndex::LeisureIndex(const geodata::Grid& grid, double radius,
                           std::span<const DistrictId> downtown_districts) {
    const auto& spec = grid.spec();
    const int reach = static_cast<int>(std::floor(std::max(radius, 0.0)));
    const double r2 = radius * radius;
    offsets_.reserve(grid.n_cells() + 1);
    offsets_.push_back(0);
    for (CellIndex i = 0; i < grid.n_cells(); ++i) {
        const auto& home = grid.cell(i);
        if (home.walkable) {
            for (int dr = -reach; dr <= reach; ++dr) {
                for (int dc = -reach; dc <= reach; ++dc) {
                    if (dr * dr + dc * dc > r2) continue;
                    const int r = home.row + dr;
                    const int c = home.col + dc;
                    if (spec.contains(r, c) && grid.cell(r, c).walkable) near_.push_back(spec.index(r, c));
                }
            }
            // Row-major order within each candidate list.
            std::sort(near_.begin() + static_cast<std::ptrdiff_t>(offsets_.back()), near_.end());
        }
        offsets_.push_back(near_.size());
    }
    for (CellIndex i : grid.walkable_cells()) {
        const auto d = grid.cell(i).district;
        if (std::find(downtown_districts.begin(), downtown_districts.end(), d) != downtown_districts.end())
            downtown_.push_back(i);
    }
}

std::span<const CellIndex> LeisureIndex::near(CellIndex home) const {
    return std::span<const CellIndex>(near_).subspan(offsets_[home], offsets_[home + 1] - offsets_[home]);
}

LeisureChoice leisure_destination(const Citizen& citizen, const LeisureIndex& index,
                                  double nearby_probability, double downtown_probability, Rng& rng) {
    const double u = rng.uniform();
    std::span<const CellIndex> candidates;
    LeisureScope scope = LeisureScope::AtHome;
    if (u < nearby_probability) {
        scope = LeisureScope::NearHome;
        candidates = index.near(citizen.home_cell);
    } else if (u < nearby_probability + downtown_probability) {
        scope = LeisureScope::Downtown;
        candidates = index.downtown();
    }
    if (scope == LeisureScope::AtHome || candidates.empty()) return {citizen.home_cell, scope};
    return {candidates[rng.index(candidates.size())], scope};
}

CellIndex leisure_destination(const Citizen& citizen, const geodata::Grid& grid,
                              double nearby_probability, double downtown_probability, double radius,
                              std::span<const DistrictId> downtown_districts, Rng& rng) {
    LeisureIndex index(grid, radius, downtown_districts);
    return leisure_destination(citizen, index, nearby_probability, downtown_probability, rng).cell;
}

}  // namespace crimesim::population
