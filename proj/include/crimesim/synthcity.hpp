#pragma once

#include <cstdint>
#include <iosfwd>
#include <set>
#include <span>
#include <vector>

#include "crimesim/geodata.hpp"
#include "crimesim/rng.hpp"

namespace crimesim::synthcity {

/// A synthetic city with per-cell intensity base + trend * (year - year_start).
struct SynthSpec {
    int n_rows = 20;
    int n_cols = 20;
    int n_districts = 4;
    DistrictId downtown = 1;
    double cell_side = 195.0;
    double origin_easting = 0.0;
    double origin_northing = 0.0;
    int year_start = 2010;
    int year_end = 2018;
    /// Row-major, one per cell. Crimes per year.
    std::vector<double> base;
    /// Row-major, one per cell. Crimes per year per year.
    std::vector<double> trend;
    /// Cells left out of the city (not walkable, zero intensity).
    std::set<geodata::RowCol> masked;
    /// Per district (id order). Empty means 1000 residents per cell.
    std::vector<std::uint64_t> populations;
    std::uint64_t seed = 0;

    void validate() const;
    geodata::GridSpec grid_spec() const;
    std::size_t n_years() const { return static_cast<std::size_t>(year_end - year_start + 1); }
};

struct SynthCity {
    geodata::GridSpec spec;
    std::vector<geodata::CellAttr> attrs;
    std::vector<geodata::DistrictInfo> districts;
    int year_start = 0;
    int year_end = 0;
    /// Cell-major: intensity[cell * n_years + (year - year_start)].
    std::vector<double> intensity;

    std::size_t n_years() const { return static_cast<std::size_t>(year_end - year_start + 1); }
    double lambda(CellIndex cell, int year) const {
        return intensity[cell * n_years() + static_cast<std::size_t>(year - year_start)];
    }
};

/// District of a cell: the grid is cut into ceil(sqrt(n)) column bands and
/// enough row bands to hold n blocks; blocks are numbered row-major from 1 and
/// trailing blocks merge into district n, so every district is a rectangle.
DistrictId district_of(const SynthSpec& spec, int row, int col);

SynthCity gen_city(const SynthSpec& spec);

/// Poisson(lambda) counts per cell and year, each crime placed uniformly inside
/// its cell. Cell-major, year-minor draw order.
std::vector<geodata::CrimeRecord> gen_crimes(const SynthCity& city, Rng& rng);

std::uint64_t poisson(double lambda, Rng& rng);

/// A default field: smooth district levels decreasing with id plus Gaussian
/// hotspots, with a small per-district linear trend.
SynthSpec hotspot_spec(int n_rows, int n_cols, int n_districts, int year_start, int year_end,
                       std::uint64_t seed);

/// `row,col,year,lambda`
void write_intensity_csv(std::ostream& out, const SynthCity& city);
/// `year,easting,northing,category,district`
void write_crimes_csv(std::ostream& out, std::span<const geodata::CrimeRecord> records);

}  // namespace crimesim::synthcity
