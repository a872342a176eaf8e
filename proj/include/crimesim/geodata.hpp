#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace crimesim {

/// Row-major cell index: row * n_cols + col.
using CellIndex = std::size_t;
using DistrictId = std::int32_t;
inline constexpr DistrictId kNoDistrict = -1;

}  // namespace crimesim

namespace crimesim::geodata {

struct RowCol {
    int row = 0;
    int col = 0;
    auto operator<=>(const RowCol&) const = default;
};

/// Placement of the square-cell grid in a planar metric CRS (e.g. EPSG:32630).
/// Row 0 is the southernmost row, column 0 the westernmost.
struct GridSpec {
    double origin_easting = 0.0;
    double origin_northing = 0.0;
    double cell_side = 195.0;
    int n_rows = 1;
    int n_cols = 1;

    void validate() const;
    std::size_t n_cells() const noexcept { return static_cast<std::size_t>(n_rows) * n_cols; }
    CellIndex index(int row, int col) const noexcept {
        return static_cast<CellIndex>(row) * n_cols + col;
    }
    CellIndex index(RowCol rc) const noexcept { return index(rc.row, rc.col); }
    RowCol row_col(CellIndex i) const noexcept {
        return {static_cast<int>(i / n_cols), static_cast<int>(i % n_cols)};
    }
    bool contains(int row, int col) const noexcept {
        return row >= 0 && row < n_rows && col >= 0 && col < n_cols;
    }
    /// Planar coordinates (easting, northing) of a cell's center.
    std::pair<double, double> center(int row, int col) const noexcept {
        return {origin_easting + (col + 0.5) * cell_side, origin_northing + (row + 0.5) * cell_side};
    }

    bool operator==(const GridSpec&) const = default;
};

struct Cell {
    int row = 0;
    int col = 0;
    DistrictId district = kNoDistrict;
    bool habitable = false;
    bool walkable = false;

    bool operator==(const Cell&) const = default;
};

struct DistrictInfo {
    DistrictId id = kNoDistrict;
    std::string name;
    std::uint64_t population = 0;

    bool operator==(const DistrictInfo&) const = default;
};

/// One row of the cell-attributes table.
struct CellAttr {
    int row = 0;
    int col = 0;
    DistrictId district = kNoDistrict;
    bool habitable = false;
    bool walkable = false;

    bool operator==(const CellAttr&) const = default;
};

/// The gridded city. Immutable once built; safe to share across threads.
class Grid {
public:
    Grid(GridSpec spec, std::vector<Cell> cells, std::vector<DistrictInfo> districts);

    const GridSpec& spec() const noexcept { return spec_; }
    std::size_t n_cells() const noexcept { return cells_.size(); }
    const Cell& cell(CellIndex i) const { return cells_[i]; }
    const Cell& cell(int row, int col) const { return cells_[spec_.index(row, col)]; }
    std::span<const Cell> cells() const noexcept { return cells_; }
    /// Sorted by ascending id.
    std::span<const DistrictInfo> districts() const noexcept { return districts_; }
    const DistrictInfo* find_district(DistrictId id) const;

    /// Row-major lists, precomputed.
    std::span<const CellIndex> habitable_cells() const noexcept { return habitable_; }
    std::span<const CellIndex> walkable_cells() const noexcept { return walkable_; }
    std::vector<CellIndex> habitable_cells_of(DistrictId id) const;

    /// Per-cell walkability mask (1 = eligible).
    std::vector<std::uint8_t> walkable_mask() const;

    bool operator==(const Grid& other) const {
        return spec_ == other.spec_ && cells_ == other.cells_ && districts_ == other.districts_;
    }

private:
    GridSpec spec_;
    std::vector<Cell> cells_;
    std::vector<DistrictInfo> districts_;
    std::vector<CellIndex> habitable_;
    std::vector<CellIndex> walkable_;
};

struct CrimeRecord {
    int year = 0;
    double easting = 0.0;
    double northing = 0.0;
    std::string category;
    std::optional<DistrictId> district;
};

enum class RowErrorPolicy { Abort, Skip };

struct CrimeParseResult {
    std::vector<CrimeRecord> records;
    std::size_t rows_read = 0;
    std::size_t dropped_category = 0;
    std::size_t malformed = 0;
    /// One "source:line: message" entry per skipped malformed row.
    std::vector<std::string> diagnostics;
};

/// Parses `year,easting,northing,category,district` rows. An empty allow-list
/// accepts every category. An empty district field means "unknown".
CrimeParseResult parse_crime_csv(std::istream& in, const std::vector<std::string>& allowed_categories,
                                 RowErrorPolicy policy, const std::string& source = "crimes.csv");

/// Cell containing a planar point, or nullopt outside the grid.
std::optional<RowCol> locate(double easting, double northing, const GridSpec& spec);
inline std::optional<RowCol> locate(const CrimeRecord& r, const GridSpec& spec) {
    return locate(r.easting, r.northing, spec);
}

/// Builds the grid. Cells without an entry are non-walkable, non-habitable and
/// belong to no district. Throws InputError on out-of-bounds or duplicate
/// entries, habitable-but-not-walkable entries, or district ids missing from a
/// non-empty `districts` list. With an empty list, districts are created from
/// the ids seen in `attrs` (population 0).
Grid build_grid(const GridSpec& spec, std::span<const CellAttr> attrs,
                std::vector<DistrictInfo> districts = {});

struct BuildingPoint {
    double easting = 0.0;
    double northing = 0.0;
    DistrictId district = kNoDistrict;
};

/// A cell is habitable iff at least one building locates in it; its district
/// is the modal building district (ties to the lowest id); it is walkable iff
/// habitable or listed in `land_mask`. Only cells that end up walkable are
/// returned, in row-major order.
std::vector<CellAttr> derive_cell_attrs(std::span<const BuildingPoint> buildings,
                                        const std::set<RowCol>& land_mask, const GridSpec& spec);

/// Per-cell yearly crime counts over an inclusive year range.
class CellYearSeries {
public:
    CellYearSeries(int year_start, int year_end, std::size_t n_cells);

    int year_start() const noexcept { return year_start_; }
    int year_end() const noexcept { return year_end_; }
    std::size_t n_years() const noexcept { return static_cast<std::size_t>(year_end_ - year_start_ + 1); }
    std::size_t n_cells() const noexcept { return n_cells_; }

    std::uint32_t at(CellIndex cell, int year) const {
        return counts_[cell * n_years() + static_cast<std::size_t>(year - year_start_)];
    }
    std::uint32_t& at(CellIndex cell, int year) {
        return counts_[cell * n_years() + static_cast<std::size_t>(year - year_start_)];
    }
    /// All years of one cell, oldest first.
    std::span<const std::uint32_t> cell(CellIndex c) const {
        return std::span<const std::uint32_t>(counts_).subspan(c * n_years(), n_years());
    }
    std::vector<int> years() const;
    /// Counts of a single year, one entry per cell.
    std::vector<double> year_slice(int year) const;
    std::uint64_t total() const;

    bool operator==(const CellYearSeries&) const = default;

private:
    int year_start_;
    int year_end_;
    std::size_t n_cells_;
    std::vector<std::uint32_t> counts_;
};

struct AggregateReport {
    std::size_t stored = 0;
    std::size_t out_of_bounds = 0;
    std::size_t out_of_range_years = 0;
};

CellYearSeries aggregate_yearly(std::span<const CrimeRecord> records, const GridSpec& spec,
                                int year_start, int year_end, AggregateReport* report = nullptr);

// File schemas. Readers throw ParseError with line numbers.
std::vector<CellAttr> read_cell_attrs(std::istream& in, const std::string& source = "cells.csv");
void write_cell_attrs(std::ostream& out, const Grid& grid);
std::vector<BuildingPoint> read_buildings(std::istream& in, const std::string& source = "buildings.csv");
std::set<RowCol> read_land_mask(std::istream& in, const std::string& source = "land_mask.csv");
std::vector<DistrictInfo> read_districts(std::istream& in, const std::string& source = "districts.csv");
void write_districts(std::ostream& out, std::span<const DistrictInfo> districts);

/// Wide layout: `row,col,<year_start>,...,<year_end>`, one line per cell.
void write_counts_by_year(std::ostream& out, const CellYearSeries& series, const GridSpec& spec);
CellYearSeries read_counts_by_year(std::istream& in, const GridSpec& spec,
                                   const std::string& source = "counts_by_year.csv");

}  // namespace crimesim::geodata
