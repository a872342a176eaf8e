#include "crimesim/geodata.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "crimesim/csv.hpp"
#include "crimesim/error.hpp"

namespace crimesim::geodata {

void GridSpec::validate() const {
    if (!(cell_side > 0.0) || !std::isfinite(cell_side))
        throw ConfigError("grid: cell_side must be > 0");
    if (n_rows < 1 || n_cols < 1) throw ConfigError("grid: n_rows and n_cols must be >= 1");
    if (!std::isfinite(origin_easting) || !std::isfinite(origin_northing))
        throw ConfigError("grid: origin must be finite");
}

Grid::Grid(GridSpec spec, std::vector<Cell> cells, std::vector<DistrictInfo> districts)
    : spec_(spec), cells_(std::move(cells)), districts_(std::move(districts)) {
    std::sort(districts_.begin(), districts_.end(),
              [](const DistrictInfo& a, const DistrictInfo& b) { return a.id < b.id; });
    for (CellIndex i = 0; i < cells_.size(); ++i) {
        if (cells_[i].habitable) habitable_.push_back(i);
        if (cells_[i].walkable) walkable_.push_back(i);
    }
}

const DistrictInfo* Grid::find_district(DistrictId id) const {
    auto it = std::lower_bound(districts_.begin(), districts_.end(), id,
                               [](const DistrictInfo& d, DistrictId v) { return d.id < v; });
    return it != districts_.end() && it->id == id ? &*it : nullptr;
}

std::vector<CellIndex> Grid::habitable_cells_of(DistrictId id) const {
    std::vector<CellIndex> out;
    for (CellIndex i : habitable_)
        if (cells_[i].district == id) out.push_back(i);
    return out;
}

std::vector<std::uint8_t> Grid::walkable_mask() const {
    std::vector<std::uint8_t> mask(cells_.size());
    for (CellIndex i = 0; i < cells_.size(); ++i) mask[i] = cells_[i].walkable ? 1 : 0;
    return mask;
}

CrimeParseResult parse_crime_csv(std::istream& in, const std::vector<std::string>& allowed_categories,
                                 RowErrorPolicy policy, const std::string& source) {
    csv::Reader reader(in, source);
    reader.expect_header({"year", "easting", "northing", "category", "district"});

    CrimeParseResult result;
    auto reject = [&](const ParseError& e) {
        if (policy == RowErrorPolicy::Abort) throw e;
        ++result.malformed;
        result.diagnostics.emplace_back(e.what());
    };
    std::vector<std::string> f;
    while (true) {
        bool got = false;
        try {
            got = reader.next(f);
        } catch (const ParseError& e) {
            ++result.rows_read;
            reject(e);
            continue;
        }
        if (!got) break;
        ++result.rows_read;
        try {
            CrimeRecord rec;
            rec.year = static_cast<int>(csv::to_int(reader, f[0], "year"));
            rec.easting = csv::to_double(reader, f[1], "easting");
            rec.northing = csv::to_double(reader, f[2], "northing");
            rec.category = f[3];
            if (!f[4].empty())
                rec.district = static_cast<DistrictId>(csv::to_int(reader, f[4], "district"));
            if (!allowed_categories.empty() &&
                std::find(allowed_categories.begin(), allowed_categories.end(), rec.category) ==
                    allowed_categories.end()) {
                ++result.dropped_category;
                continue;
            }
            result.records.push_back(std::move(rec));
        } catch (const ParseError& e) {
            reject(e);
        }
    }
    return result;
}

std::optional<RowCol> locate(double easting, double northing, const GridSpec& spec) {
    double c = std::floor((easting - spec.origin_easting) / spec.cell_side);
    double r = std::floor((northing - spec.origin_northing) / spec.cell_side);
    if (!(c >= 0.0 && c < spec.n_cols && r >= 0.0 && r < spec.n_rows)) return std::nullopt;
    return RowCol{static_cast<int>(r), static_cast<int>(c)};
}

Grid build_grid(const GridSpec& spec, std::span<const CellAttr> attrs,
                std::vector<DistrictInfo> districts) {
    spec.validate();
    std::vector<Cell> cells(spec.n_cells());
    for (int r = 0; r < spec.n_rows; ++r)
        for (int c = 0; c < spec.n_cols; ++c) cells[spec.index(r, c)] = Cell{r, c};

    std::vector<std::uint8_t> seen(spec.n_cells(), 0);
    const bool auto_districts = districts.empty();
    std::set<DistrictId> known;
    for (const auto& d : districts) {
        if (d.id == kNoDistrict) throw InputError("districts: id " + std::to_string(d.id) + " is reserved");
        if (!known.insert(d.id).second)
            throw InputError("districts: duplicate id " + std::to_string(d.id));
    }

    for (const auto& a : attrs) {
        const std::string where = "cell (" + std::to_string(a.row) + "," + std::to_string(a.col) + ")";
        if (!spec.contains(a.row, a.col)) throw InputError(where + " is outside the grid");
        CellIndex i = spec.index(a.row, a.col);
        if (seen[i]) throw InputError(where + " listed twice");
        seen[i] = 1;
        if (a.habitable && !a.walkable) throw InputError(where + " is habitable but not walkable");
        if (a.district != kNoDistrict && !known.count(a.district)) {
            if (!auto_districts)
                throw InputError(where + " references unknown district " + std::to_string(a.district));
            known.insert(a.district);
            districts.push_back(DistrictInfo{a.district, {}, 0});
        }
        cells[i] = Cell{a.row, a.col, a.district, a.habitable, a.walkable};
    }
    return Grid(spec, std::move(cells), std::move(districts));
}

std::vector<CellAttr> derive_cell_attrs(std::span<const BuildingPoint> buildings,
                                        const std::set<RowCol>& land_mask, const GridSpec& spec) {
    spec.validate();
    // Per-cell district tallies; std::map keeps ids ascending so the first
    // maximum is the lowest id.
    std::vector<std::map<DistrictId, std::size_t>> tallies(spec.n_cells());
    std::vector<std::uint8_t> habitable(spec.n_cells(), 0);
    for (const auto& b : buildings) {
        auto rc = locate(b.easting, b.northing, spec);
        if (!rc) continue;
        CellIndex i = spec.index(*rc);
        habitable[i] = 1;
        ++tallies[i][b.district];
    }

    std::vector<CellAttr> out;
    for (CellIndex i = 0; i < spec.n_cells(); ++i) {
        RowCol rc = spec.row_col(i);
        bool walkable = habitable[i] || land_mask.count(rc) > 0;
        if (!walkable) continue;
        DistrictId district = kNoDistrict;
        std::size_t best = 0;
        for (const auto& [id, n] : tallies[i]) {
            if (n > best) {
                best = n;
                district = id;
            }
        }
        out.push_back(CellAttr{rc.row, rc.col, district, habitable[i] != 0, true});
    }
    return out;
}

CellYearSeries::CellYearSeries(int year_start, int year_end, std::size_t n_cells)
    : year_start_(year_start), year_end_(year_end), n_cells_(n_cells) {
    if (year_end < year_start) throw ConfigError("year range is empty");
    counts_.assign(n_cells * n_years(), 0);
}

std::vector<int> CellYearSeries::years() const {
    std::vector<int> ys;
    for (int y = year_start_; y <= year_end_; ++y) ys.push_back(y);
    return ys;
}

std::vector<double> CellYearSeries::year_slice(int year) const {
    if (year < year_start_ || year > year_end_)
        throw ConfigError("year " + std::to_string(year) + " outside series range");
    std::vector<double> out(n_cells_);
    for (CellIndex c = 0; c < n_cells_; ++c) out[c] = at(c, year);
    return out;
}

std::uint64_t CellYearSeries::total() const {
    std::uint64_t t = 0;
    for (auto v : counts_) t += v;
    return t;
}

CellYearSeries aggregate_yearly(std::span<const CrimeRecord> records, const GridSpec& spec,
                                int year_start, int year_end, AggregateReport* report) {
    spec.validate();
    CellYearSeries series(year_start, year_end, spec.n_cells());
    AggregateReport rep;
    for (const auto& r : records) {
        if (r.year < year_start || r.year > year_end) {
            ++rep.out_of_range_years;
            continue;
        }
        auto rc = locate(r, spec);
        if (!rc) {
            ++rep.out_of_bounds;
            continue;
        }
        ++series.at(spec.index(*rc), r.year);
        ++rep.stored;
    }
    if (report) *report = rep;
    return series;
}

std::vector<CellAttr> read_cell_attrs(std::istream& in, const std::string& source) {
    csv::Reader reader(in, source);
    reader.expect_header({"row", "col", "district", "habitable", "walkable"});
    std::vector<CellAttr> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        CellAttr a;
        a.row = static_cast<int>(csv::to_int(reader, f[0], "row"));
        a.col = static_cast<int>(csv::to_int(reader, f[1], "col"));
        a.district = f[2].empty() ? kNoDistrict
                                  : static_cast<DistrictId>(csv::to_int(reader, f[2], "district"));
        a.habitable = csv::to_flag(reader, f[3], "habitable");
        a.walkable = csv::to_flag(reader, f[4], "walkable");
        out.push_back(a);
    }
    return out;
}

void write_cell_attrs(std::ostream& out, const Grid& grid) {
    out << "row,col,district,habitable,walkable\n";
    for (const auto& c : grid.cells()) {
        out << c.row << ',' << c.col << ',';
        if (c.district != kNoDistrict) out << c.district;
        out << ',' << (c.habitable ? 1 : 0) << ',' << (c.walkable ? 1 : 0) << '\n';
    }
}

std::vector<BuildingPoint> read_buildings(std::istream& in, const std::string& source) {
    csv::Reader reader(in, source);
    reader.expect_header({"easting", "northing", "district"});
    std::vector<BuildingPoint> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        BuildingPoint b;
        b.easting = csv::to_double(reader, f[0], "easting");
        b.northing = csv::to_double(reader, f[1], "northing");
        b.district = f[2].empty() ? kNoDistrict
                                  : static_cast<DistrictId>(csv::to_int(reader, f[2], "district"));
        out.push_back(b);
    }
    return out;
}

std::set<RowCol> read_land_mask(std::istream& in, const std::string& source) {
    csv::Reader reader(in, source);
    reader.expect_header({"row", "col"});
    std::set<RowCol> out;
    std::vector<std::string> f;
    while (reader.next(f))
        out.insert(RowCol{static_cast<int>(csv::to_int(reader, f[0], "row")),
                          static_cast<int>(csv::to_int(reader, f[1], "col"))});
    return out;
}

std::vector<DistrictInfo> read_districts(std::istream& in, const std::string& source) {
    csv::Reader reader(in, source);
    reader.expect_header({"id", "name", "population"});
    std::vector<DistrictInfo> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        DistrictInfo d;
        d.id = static_cast<DistrictId>(csv::to_int(reader, f[0], "id"));
        d.name = f[1];
        auto pop = csv::to_int(reader, f[2], "population");
        if (pop < 0) reader.fail("column 'population': must be nonnegative");
        d.population = static_cast<std::uint64_t>(pop);
        out.push_back(std::move(d));
    }
    return out;
}

void write_districts(std::ostream& out, std::span<const DistrictInfo> districts) {
    out << "id,name,population\n";
    for (const auto& d : districts) out << d.id << ',' << csv::escape(d.name) << ',' << d.population << '\n';
}

void write_counts_by_year(std::ostream& out, const CellYearSeries& series, const GridSpec& spec) {
    out << "row,col";
    for (int y = series.year_start(); y <= series.year_end(); ++y) out << ',' << y;
    out << '\n';
    for (CellIndex c = 0; c < series.n_cells(); ++c) {
        RowCol rc = spec.row_col(c);
        out << rc.row << ',' << rc.col;
        for (auto v : series.cell(c)) out << ',' << v;
        out << '\n';
    }
}

CellYearSeries read_counts_by_year(std::istream& in, const GridSpec& spec, const std::string& source) {
    csv::Reader reader(in, source);
    const auto& header = reader.read_header();
    if (header.size() < 3 || header[0] != "row" || header[1] != "col")
        reader.fail("expected header 'row,col,<year>,...'");
    std::vector<int> years;
    for (std::size_t i = 2; i < header.size(); ++i)
        years.push_back(static_cast<int>(csv::to_int(reader, header[i], "year header")));
    for (std::size_t i = 1; i < years.size(); ++i)
        if (years[i] != years[i - 1] + 1) reader.fail("year columns must be consecutive");

    CellYearSeries series(years.front(), years.back(), spec.n_cells());
    std::vector<std::uint8_t> seen(spec.n_cells(), 0);
    std::vector<std::string> f;
    while (reader.next(f)) {
        int r = static_cast<int>(csv::to_int(reader, f[0], "row"));
        int c = static_cast<int>(csv::to_int(reader, f[1], "col"));
        if (!spec.contains(r, c)) reader.fail("cell outside the grid");
        CellIndex i = spec.index(r, c);
        if (seen[i]++) reader.fail("cell listed twice");
        for (std::size_t k = 0; k < years.size(); ++k) {
            auto v = csv::to_int(reader, f[k + 2], "count");
            if (v < 0) reader.fail("counts must be nonnegative");
            series.at(i, years[k]) = static_cast<std::uint32_t>(v);
        }
    }
    return series;
}

}  // namespace crimesim::geodata
