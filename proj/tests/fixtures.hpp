#pragma once

#include <vector>

#include "crimesim/crimestats.hpp"
#include "crimesim/geodata.hpp"

namespace fixtures {

/// rows x cols grid, every cell habitable; district = 1 + col * n_districts / cols.
inline crimesim::geodata::Grid open_grid(int rows, int cols, int n_districts = 1,
                                         std::uint64_t population_per_district = 1000) {
    crimesim::geodata::GridSpec spec;
    spec.n_rows = rows;
    spec.n_cols = cols;
    std::vector<crimesim::geodata::CellAttr> attrs;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) attrs.push_back({r, c, 1 + c * n_districts / cols, true, true});
    std::vector<crimesim::geodata::DistrictInfo> ds;
    for (int d = 1; d <= n_districts; ++d) ds.push_back({d, "d" + std::to_string(d), population_per_district});
    return crimesim::geodata::build_grid(spec, attrs, ds);
}

inline std::vector<crimesim::crimestats::CellTrend> uniform_trends(std::size_t n, double prediction = 1.0) {
    return std::vector<crimesim::crimestats::CellTrend>(n, {prediction, 0.0});
}

}  // namespace fixtures
