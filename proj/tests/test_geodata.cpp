#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "crimesim/error.hpp"
#include "crimesim/geodata.hpp"

using namespace crimesim;
using namespace crimesim::geodata;

namespace {

GridSpec spec_2x2() {
    GridSpec s;
    s.n_rows = 2;
    s.n_cols = 2;
    return s;
}

}  // namespace

TEST_CASE("parse_crime_csv: header-only file gives no records") {
    std::istringstream in("year,easting,northing,category,district\n");
    auto r = parse_crime_csv(in, {}, RowErrorPolicy::Abort);
    CHECK(r.records.empty());
    CHECK(r.rows_read == 0);
}

TEST_CASE("parse_crime_csv: two well-formed rows, empty allow-list") {
    std::istringstream in(
        "year,easting,northing,category,district\n"
        "2015,100.5,200.25,theft,3\n"
        "2016,10,20,\"robbery, armed\",\n");
    auto r = parse_crime_csv(in, {}, RowErrorPolicy::Abort);
    REQUIRE(r.records.size() == 2);
    CHECK(r.records[0].year == 2015);
    CHECK(r.records[0].easting == 100.5);
    CHECK(r.records[0].northing == 200.25);
    CHECK(r.records[0].category == "theft");
    CHECK(r.records[0].district == 3);
    CHECK(r.records[1].category == "robbery, armed");
    CHECK_FALSE(r.records[1].district.has_value());
}

TEST_CASE("parse_crime_csv: category allow-list drops other rows") {
    std::istringstream in(
        "year,easting,northing,category,district\n"
        "2015,1,1,theft,1\n"
        "2015,1,1,fraud,1\n"
        "2015,1,1,theft,1\n");
    auto r = parse_crime_csv(in, {"theft"}, RowErrorPolicy::Abort);
    CHECK(r.records.size() == 2);
    CHECK(r.dropped_category == 1);
}

TEST_CASE("parse_crime_csv: non-numeric easting under skip policy") {
    std::istringstream in(
        "year,easting,northing,category,district\n"
        "2015,abc,1,theft,1\n"
        "2015,1,1,theft,1\n");
    auto r = parse_crime_csv(in, {}, RowErrorPolicy::Skip);
    CHECK(r.records.size() == 1);
    CHECK(r.malformed == 1);
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].find(":2") != std::string::npos);
}

TEST_CASE("parse_crime_csv: abort policy reports the line number") {
    std::istringstream in(
        "year,easting,northing,category,district\n"
        "2015,1,1,theft,1\n"
        "2015,1,x,theft,1\n");
    try {
        parse_crime_csv(in, {}, RowErrorPolicy::Abort, "c.csv");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.source() == "c.csv");
    }
}

TEST_CASE("parse_crime_csv: wrong header is rejected") {
    std::istringstream in("year,x,y,category,district\n");
    CHECK_THROWS_AS(parse_crime_csv(in, {}, RowErrorPolicy::Skip), ParseError);
}

TEST_CASE("locate") {
    GridSpec s;
    s.origin_easting = 1000;
    s.origin_northing = 2000;
    s.cell_side = 195;
    s.n_rows = 4;
    s.n_cols = 4;
    SUBCASE("origin maps to (0,0)") {
        auto rc = locate(1000, 2000, s);
        REQUIRE(rc);
        CHECK(*rc == RowCol{0, 0});
    }
    SUBCASE("195.5 m east lands in col 1") {
        auto rc = locate(1000 + 195.5, 2000, s);
        REQUIRE(rc);
        CHECK(rc->col == 1);
        CHECK(rc->row == 0);
    }
    SUBCASE("1 m west is out of bounds") { CHECK_FALSE(locate(999, 2000, s)); }
    SUBCASE("upper edges are exclusive") {
        CHECK_FALSE(locate(1000 + 4 * 195, 2000, s));
        CHECK_FALSE(locate(1000, 2000 + 4 * 195, s));
    }
}

TEST_CASE("locate of every cell center is the identity") {
    GridSpec s;
    s.origin_easting = 372000.25;
    s.origin_northing = 4055000.75;
    s.cell_side = 195;
    s.n_rows = 80;
    s.n_cols = 128;
    for (int r = 0; r < s.n_rows; ++r)
        for (int c = 0; c < s.n_cols; ++c) {
            auto [e, n] = s.center(r, c);
            auto rc = locate(e, n, s);
            REQUIRE(rc);
            CHECK(*rc == RowCol{r, c});
        }
}

TEST_CASE("GridSpec validation") {
    GridSpec s;
    s.cell_side = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.cell_side = 1;
    s.n_rows = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.n_rows = 1;
    s.n_cols = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("build_grid") {
    SUBCASE("empty attrs give non-walkable cells") {
        auto g = build_grid(spec_2x2(), std::vector<CellAttr>{});
        REQUIRE(g.n_cells() == 4);
        for (const auto& c : g.cells()) {
            CHECK_FALSE(c.habitable);
            CHECK_FALSE(c.walkable);
            CHECK(c.district == kNoDistrict);
        }
    }
    SUBCASE("single entry") {
        std::vector<CellAttr> a{{0, 0, 1, true, true}};
        auto g = build_grid(spec_2x2(), a);
        CHECK(g.cell(0, 0).habitable);
        CHECK(g.cell(0, 0).district == 1);
        CHECK_FALSE(g.cell(1, 1).walkable);
        CHECK(g.habitable_cells().size() == 1);
    }
    SUBCASE("habitable but not walkable is an error") {
        std::vector<CellAttr> a{{0, 0, 1, true, false}};
        CHECK_THROWS_AS(build_grid(spec_2x2(), a), InputError);
    }
    SUBCASE("duplicate entry is an error") {
        std::vector<CellAttr> a{{0, 0, 1, true, true}, {0, 0, 1, false, true}};
        CHECK_THROWS_AS(build_grid(spec_2x2(), a), InputError);
    }
    SUBCASE("out of bounds entry is an error") {
        std::vector<CellAttr> a{{2, 0, 1, true, true}};
        CHECK_THROWS_AS(build_grid(spec_2x2(), a), InputError);
    }
    SUBCASE("unknown district is an error when districts are given") {
        std::vector<CellAttr> a{{0, 0, 7, true, true}};
        CHECK_THROWS_AS(build_grid(spec_2x2(), a, {{1, "a", 10}}), InputError);
    }
}

TEST_CASE("build_grid is order-insensitive") {
    GridSpec s;
    s.n_rows = 6;
    s.n_cols = 7;
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<CellAttr> attrs;
        for (int r = 0; r < s.n_rows; ++r)
            for (int c = 0; c < s.n_cols; ++c) {
                if (gen() % 3 == 0) continue;
                bool hab = gen() % 2;
                bool walk = hab || gen() % 2;
                attrs.push_back({r, c, static_cast<DistrictId>(1 + gen() % 3), hab, walk});
            }
        auto reference = build_grid(s, attrs);
        std::shuffle(attrs.begin(), attrs.end(), gen);
        CHECK(build_grid(s, attrs) == reference);
    }
}

TEST_CASE("derive_cell_attrs") {
    auto s = spec_2x2();
    s.cell_side = 10;
    SUBCASE("no buildings and empty mask") {
        auto a = derive_cell_attrs({}, {}, s);
        auto g = build_grid(s, a);
        CHECK(g.habitable_cells().empty());
        CHECK(g.walkable_cells().empty());
    }
    SUBCASE("modal district") {
        std::vector<BuildingPoint> b{{1, 1, 1}, {2, 2, 1}, {3, 3, 2}};
        auto g = build_grid(s, derive_cell_attrs(b, {}, s));
        CHECK(g.cell(0, 0).habitable);
        CHECK(g.cell(0, 0).district == 1);
    }
    SUBCASE("tie breaks to the lowest id") {
        std::vector<BuildingPoint> b{{1, 1, 2}, {2, 2, 1}};
        auto g = build_grid(s, derive_cell_attrs(b, {}, s));
        CHECK(g.cell(0, 0).district == 1);
    }
    SUBCASE("land mask makes cells walkable but not habitable") {
        auto g = build_grid(s, derive_cell_attrs({}, {{1, 1}}, s));
        CHECK(g.cell(1, 1).walkable);
        CHECK_FALSE(g.cell(1, 1).habitable);
    }
    SUBCASE("points outside the grid are ignored") {
        std::vector<BuildingPoint> b{{-1, 1, 1}, {25, 1, 1}};
        auto g = build_grid(s, derive_cell_attrs(b, {}, s));
        CHECK(g.habitable_cells().empty());
    }
}

TEST_CASE("aggregate_yearly") {
    GridSpec s = spec_2x2();
    s.cell_side = 10;
    SUBCASE("no records") {
        auto series = aggregate_yearly({}, s, 2010, 2012);
        CHECK(series.total() == 0);
        CHECK(series.n_years() == 3);
    }
    SUBCASE("five records in one cell and year") {
        std::vector<CrimeRecord> rs(5, CrimeRecord{2011, 15, 5, "x", {}});
        auto series = aggregate_yearly(rs, s, 2010, 2012);
        CHECK(series.at(s.index(0, 1), 2011) == 5);
        CHECK(series.total() == 5);
    }
    SUBCASE("mixed fixture against a brute-force tally") {
        std::vector<CrimeRecord> rs{{2010, 1, 1, "a", {}},  {2010, 11, 1, "a", {}}, {2011, 1, 1, "a", {}},
                                    {2011, 1, 2, "a", {}},  {2010, 12, 3, "a", {}}, {2011, 19, 9, "a", {}},
                                    {2010, 5, 5, "a", {}}};
        auto series = aggregate_yearly(rs, s, 2010, 2011);
        for (int year : {2010, 2011})
            for (int col : {0, 1}) {
                std::uint32_t n = 0;
                for (const auto& r : rs)
                    if (r.year == year && static_cast<int>(r.easting / 10) == col && r.northing < 10) ++n;
                CHECK(series.at(s.index(0, col), year) == n);
            }
        CHECK(series.total() == 7);
    }
    SUBCASE("out-of-range years and bounds are reported, not stored") {
        std::vector<CrimeRecord> rs{{2009, 1, 1, "a", {}}, {2010, -1, 1, "a", {}}, {2010, 1, 1, "a", {}}};
        AggregateReport rep;
        auto series = aggregate_yearly(rs, s, 2010, 2011, &rep);
        CHECK(series.total() == 1);
        CHECK(rep.stored == 1);
        CHECK(rep.out_of_bounds == 1);
        CHECK(rep.out_of_range_years == 1);
    }
}

TEST_CASE("aggregate_yearly conserves located in-range records") {
    GridSpec s;
    s.cell_side = 50;
    s.n_rows = 5;
    s.n_cols = 6;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> coord(-40, 340);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<CrimeRecord> rs;
        const int n = static_cast<int>(gen() % 200);
        for (int i = 0; i < n; ++i) rs.push_back({2008 + static_cast<int>(gen() % 6), coord(gen), coord(gen), "c", {}});
        std::size_t expected = 0;
        for (const auto& r : rs)
            if (r.year >= 2009 && r.year <= 2012 && locate(r, s)) ++expected;
        AggregateReport rep;
        auto series = aggregate_yearly(rs, s, 2009, 2012, &rep);
        CHECK(series.total() == expected);
        CHECK(rep.stored + rep.out_of_bounds + rep.out_of_range_years == rs.size());
        for (CellIndex c = 0; c < s.n_cells(); ++c) CHECK(series.cell(c).size() == 4);
    }
}

TEST_CASE("cell attrs, districts and yearly counts round-trip through CSV") {
    GridSpec s;
    s.n_rows = 3;
    s.n_cols = 4;
    std::vector<CellAttr> attrs{{0, 0, 1, true, true}, {1, 2, 2, false, true}, {2, 3, 2, true, true}};
    std::vector<DistrictInfo> ds{{1, "Centro", 100}, {2, "Este, bajo", 250}};
    auto g = build_grid(s, attrs, ds);

    std::stringstream cells;
    write_cell_attrs(cells, g);
    std::stringstream dist;
    write_districts(dist, g.districts());
    auto g2 = build_grid(s, read_cell_attrs(cells), read_districts(dist));
    CHECK(g2 == g);

    std::vector<CrimeRecord> rs{{2010, 1, 1, "a", {}}, {2011, 200, 300, "a", {}}, {2011, 200, 300, "a", {}}};
    auto series = aggregate_yearly(rs, s, 2010, 2011);
    std::stringstream counts;
    write_counts_by_year(counts, series, s);
    CHECK(read_counts_by_year(counts, s) == series);
}

TEST_CASE("read_cell_attrs rejects flags other than 0/1") {
    std::istringstream in("row,col,district,habitable,walkable\n0,0,1,2,1\n");
    CHECK_THROWS_AS(read_cell_attrs(in), ParseError);
}
