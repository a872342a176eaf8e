#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>

#include "crimesim/engine.hpp"
#include "crimesim/error.hpp"

namespace crimesim::engine {

PoliceLedger::PoliceLedger(std::size_t n_cells, int window)
    : n_cells_(n_cells), window_(window) {
    if (window < 1) throw ConfigError("police_window must be >= 1");
    ring_.assign(n_cells * static_cast<std::size_t>(window), 0);
    current_.assign(n_cells, 0);
}

void PoliceLedger::begin_day(int day) {
    today_ = day % window_;
    for (CellIndex c = 0; c < n_cells_; ++c) ring_[c * window_ + today_] = 0;
}

void PoliceLedger::clear_presence() {
    for (CellIndex c : marked_) current_[c] = 0;
    marked_.clear();
}

void PoliceLedger::mark_present(CellIndex cell) {
    if (!current_[cell]) {
        current_[cell] = 1;
        marked_.push_back(cell);
    }
}

void PoliceLedger::commit_slot() {
    for (CellIndex c : marked_) ring_[c * window_ + today_] = 1;
}

int PoliceLedger::visits_in_window(CellIndex cell) const {
    const std::uint8_t* row = ring_.data() + cell * window_;
    int v = 0;
    for (int k = 0; k < window_; ++k)
        v += (k == today_) ? (row[k] || current_[cell]) : row[k];
    return v;
}

int visits_in_window(CellIndex cell, const PoliceLedger& ledger) { return ledger.visits_in_window(cell); }

double epsilon_value(bool present, int visits, int window, double psi, double rho, EpsilonMode mode) {
    const double share = std::clamp(static_cast<double>(visits) / window, 0.0, 1.0);
    if (mode == EpsilonMode::Printed) return present ? 1.0 - share * (psi + rho) - rho : 1.0 - rho;
    if (present) return 1.0 - rho;
    return 1.0 + psi - share * (psi + rho);
}

double epsilon(CellIndex cell, const PoliceLedger& ledger, const SimParams& params,
               std::size_t n_police_configured) {
    if (n_police_configured == 0) return 1.0;
    return epsilon_value(ledger.present(cell), ledger.visits_in_window(cell), ledger.window(),
                         params.increase_no_police, params.police_reduction, params.epsilon_mode);
}

void deploy_police(std::span<PoliceUnit> units, const SimClock& clock) {
    for (auto& u : units) {
        if (u.shift == clock.slot) u.current_cell = u.work_cell;
        else u.current_cell.reset();
    }
}

namespace {

void static_strategy(const geodata::Grid&, std::span<const double>, const PoliceLedger&,
                     std::vector<PoliceUnit>&, Rng&) {}

void random_strategy(const geodata::Grid& grid, std::span<const double>, const PoliceLedger&,
                     std::vector<PoliceUnit>& units, Rng& rng) {
    const auto cells = grid.walkable_cells();
    if (cells.empty()) return;
    for (auto& u : units) u.work_cell = cells[rng.index(cells.size())];
}

void top_power_strategy(const geodata::Grid& grid, std::span<const double> power, const PoliceLedger&,
                        std::vector<PoliceUnit>& units, Rng&) {
    std::vector<CellIndex> cells(grid.walkable_cells().begin(), grid.walkable_cells().end());
    if (cells.empty()) return;
    std::stable_sort(cells.begin(), cells.end(),
                     [&](CellIndex a, CellIndex b) { return power[a] > power[b]; });
    for (std::size_t k = 0; k < units.size(); ++k) units[k].work_cell = cells[k % cells.size()];
}

struct Registry {
    std::mutex mutex;
    std::map<std::string, PoliceStrategy, std::less<>> strategies{
        {"static", static_strategy},
        {"random", random_strategy},
        {"top_power", top_power_strategy},
    };
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

PoliceStrategy make_strategy(std::string_view name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.strategies.find(name);
    if (it == r.strategies.end()) throw ConfigError("unknown police strategy '" + std::string(name) + "'");
    return it->second;
}

void register_strategy(std::string name, PoliceStrategy strategy) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.strategies[std::move(name)] = std::move(strategy);
}

std::vector<std::string> strategy_names() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> names;
    for (const auto& [name, _] : r.strategies) names.push_back(name);
    return names;
}

void redistribute_police_units(const PoliceStrategy& strategy, const geodata::Grid& grid,
                               std::span<const double> power, const PoliceLedger& ledger,
                               std::vector<PoliceUnit>& units, Rng& rng) {
    strategy(grid, power, ledger, units, rng);
}

}  // namespace crimesim::engine
