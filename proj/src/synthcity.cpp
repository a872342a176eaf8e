#include "crimesim/synthcity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "crimesim/csv.hpp"
#include "crimesim/error.hpp"

namespace crimesim::synthcity {

void SynthSpec::validate() const {
    grid_spec().validate();
    if (n_districts < 1) throw ConfigError("synth: n_districts must be >= 1");
    if (year_end < year_start) throw ConfigError("synth: year range is empty");
    const auto n = static_cast<std::size_t>(n_rows) * n_cols;
    if (base.size() != n || trend.size() != n)
        throw ConfigError("synth: base and trend must have one value per cell");
    for (std::size_t c = 0; c < n; ++c) {
        if (!(base[c] >= 0.0)) throw ConfigError("synth: base intensity must be >= 0");
        if (base[c] + trend[c] * (year_end - year_start) < -1e-12)
            throw ConfigError("synth: intensity becomes negative within the year range");
    }
    if (!populations.empty() && populations.size() != static_cast<std::size_t>(n_districts))
        throw ConfigError("synth: populations must list one value per district");
}

geodata::GridSpec SynthSpec::grid_spec() const {
    return geodata::GridSpec{origin_easting, origin_northing, cell_side, n_rows, n_cols};
}

DistrictId district_of(const SynthSpec& spec, int row, int col) {
    const int bands_x = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.n_districts))));
    const int bands_y = (spec.n_districts + bands_x - 1) / bands_x;
    const int bx = std::min(col * bands_x / spec.n_cols, bands_x - 1);
    const int by = std::min(row * bands_y / spec.n_rows, bands_y - 1);
    return std::min(by * bands_x + bx, spec.n_districts - 1) + 1;
}

SynthCity gen_city(const SynthSpec& spec) {
    spec.validate();
    SynthCity city;
    city.spec = spec.grid_spec();
    city.year_start = spec.year_start;
    city.year_end = spec.year_end;

    std::vector<std::uint64_t> cells_per_district(spec.n_districts, 0);
    const std::size_t n_years = spec.n_years();
    city.intensity.assign(city.spec.n_cells() * n_years, 0.0);
    for (int r = 0; r < spec.n_rows; ++r) {
        for (int c = 0; c < spec.n_cols; ++c) {
            if (spec.masked.count({r, c})) continue;
            const DistrictId d = district_of(spec, r, c);
            city.attrs.push_back(geodata::CellAttr{r, c, d, true, true});
            ++cells_per_district[d - 1];
            const CellIndex i = city.spec.index(r, c);
            for (std::size_t y = 0; y < n_years; ++y)
                city.intensity[i * n_years + y] = std::max(spec.base[i] + spec.trend[i] * static_cast<double>(y), 0.0);
        }
    }
    for (int d = 0; d < spec.n_districts; ++d) {
        const std::uint64_t pop = spec.populations.empty() ? 1000 * cells_per_district[d] : spec.populations[d];
        city.districts.push_back({d + 1, "District " + std::to_string(d + 1), pop});
    }
    return city;
}

std::uint64_t poisson(double lambda, Rng& rng) {
    // Knuth's product method on chunks of at most 30; sums of independent
    // Poisson variables are Poisson.
    std::uint64_t total = 0;
    while (lambda > 0.0) {
        const double chunk = std::min(lambda, 30.0);
        lambda -= chunk;
        const double limit = std::exp(-chunk);
        double prod = rng.uniform();
        while (prod >= limit) {
            ++total;
            prod *= rng.uniform();
        }
    }
    return total;
}

std::vector<geodata::CrimeRecord> gen_crimes(const SynthCity& city, Rng& rng) {
    std::vector<geodata::CrimeRecord> out;
    const auto& spec = city.spec;
    std::vector<DistrictId> districts(spec.n_cells(), kNoDistrict);
    for (const auto& a : city.attrs) districts[spec.index(a.row, a.col)] = a.district;
    for (CellIndex i = 0; i < spec.n_cells(); ++i) {
        const auto rc = spec.row_col(i);
        const DistrictId district = districts[i];
        for (int year = city.year_start; year <= city.year_end; ++year) {
            const auto n = poisson(city.lambda(i, year), rng);
            for (std::uint64_t k = 0; k < n; ++k) {
                // Keep points off the cell edges so they locate back exactly.
                const double u = 0.001 + 0.998 * rng.uniform();
                const double v = 0.001 + 0.998 * rng.uniform();
                geodata::CrimeRecord rec;
                rec.year = year;
                rec.easting = spec.origin_easting + (rc.col + u) * spec.cell_side;
                rec.northing = spec.origin_northing + (rc.row + v) * spec.cell_side;
                rec.category = "synthetic";
                if (district != kNoDistrict) rec.district = district;
                out.push_back(std::move(rec));
            }
        }
    }
    return out;
}

SynthSpec hotspot_spec(int n_rows, int n_cols, int n_districts, int year_start, int year_end,
                       std::uint64_t seed) {
    SynthSpec s;
    s.n_rows = n_rows;
    s.n_cols = n_cols;
    s.n_districts = n_districts;
    s.year_start = year_start;
    s.year_end = year_end;
    s.seed = seed;
    Rng rng(seed);

    std::vector<double> level(n_districts);
    std::vector<double> growth(n_districts);
    for (int d = 0; d < n_districts; ++d) {
        level[d] = n_districts == 1 ? 1.0 : 1.0 - 0.6 * d / (n_districts - 1);
        growth[d] = rng.uniform(-0.03, 0.05);
    }

    struct Hotspot {
        double row, col, amplitude, sigma;
    };
    const int n_hot = std::max(3, n_rows * n_cols / 60);
    std::vector<Hotspot> hot;
    for (int h = 0; h < n_hot; ++h)
        hot.push_back({rng.uniform(0.0, n_rows), rng.uniform(0.0, n_cols), rng.uniform(20.0, 80.0),
                       rng.uniform(1.0, 2.0)});

    const auto n = static_cast<std::size_t>(n_rows) * n_cols;
    s.base.assign(n, 0.0);
    s.trend.assign(n, 0.0);
    for (int r = 0; r < n_rows; ++r) {
        for (int c = 0; c < n_cols; ++c) {
            double v = 2.0;
            for (const auto& h : hot) {
                const double dr = r + 0.5 - h.row, dc = c + 0.5 - h.col;
                v += h.amplitude * std::exp(-(dr * dr + dc * dc) / (2.0 * h.sigma * h.sigma));
            }
            const int d = district_of(s, r, c) - 1;
            const auto i = static_cast<std::size_t>(r) * n_cols + c;
            s.base[i] = level[d] * v;
            s.trend[i] = s.base[i] * growth[d];
        }
    }

    std::vector<std::uint64_t> cells(n_districts, 0);
    for (int r = 0; r < n_rows; ++r)
        for (int c = 0; c < n_cols; ++c) ++cells[district_of(s, r, c) - 1];
    for (int d = 0; d < n_districts; ++d)
        s.populations.push_back(static_cast<std::uint64_t>(1000.0 * cells[d] * rng.uniform(0.8, 1.2)));
    return s;
}

void write_intensity_csv(std::ostream& out, const SynthCity& city) {
    out << "row,col,year,lambda\n";
    for (CellIndex i = 0; i < city.spec.n_cells(); ++i) {
        const auto rc = city.spec.row_col(i);
        for (int y = city.year_start; y <= city.year_end; ++y)
            out << rc.row << ',' << rc.col << ',' << y << ',' << csv::format(city.lambda(i, y)) << '\n';
    }
}

void write_crimes_csv(std::ostream& out, std::span<const geodata::CrimeRecord> records) {
    out << "year,easting,northing,category,district\n";
    for (const auto& r : records) {
        out << r.year << ',' << csv::format(r.easting) << ',' << csv::format(r.northing) << ','
            << csv::escape(r.category) << ',';
        if (r.district) out << *r.district;
        out << '\n';
    }
}

}  // namespace crimesim::synthcity
