#include "crimesim/sim_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "crimesim/config.hpp"
#include "crimesim/error.hpp"

namespace crimesim::io {

void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write " + tmp.string());
        body(out);
        out.flush();
        if (!out) throw InputError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void write_events_csv(std::ostream& out, const engine::SimResult& result, const geodata::Grid& grid) {
    out << "day,slot,row,col,district\n";
    for (const auto& e : result.events) {
        const auto& c = grid.cell(e.cell);
        out << e.day << ',' << to_string(e.slot) << ',' << c.row << ',' << c.col << ',';
        if (c.district != kNoDistrict) out << c.district;
        out << '\n';
    }
}

void write_summary_json(std::ostream& out, const engine::SimResult& result, const geodata::Grid&) {
    nlohmann::ordered_json j;
    j["seed"] = result.seed;
    j["total_crimes"] = result.total();
    j["refresh_count"] = result.refresh_count;
    auto& districts = j["district_counts"] = nlohmann::ordered_json::array();
    for (const auto& [id, n] : result.district_counts)
        districts.push_back({{"district", id == kNoDistrict ? nlohmann::ordered_json(nullptr)
                                                            : nlohmann::ordered_json(id)},
                             {"crimes", n}});
    j["slot_totals"] = result.slot_totals;
    j["daily_unemployment"] = result.daily_unemployment;
    j["params"] = config::params_to_json(result.params);
    out << j.dump(2) << '\n';
}

Image render_heatmap(std::span<const double> counts, const geodata::GridSpec& spec, int block) {
    if (block < 1) throw ConfigError("heatmap block size must be >= 1");
    if (counts.size() != spec.n_cells()) throw InputError("heatmap: raster does not match the grid");
    Image img;
    img.width = spec.n_cols * block;
    img.height = spec.n_rows * block;
    img.gray.assign(static_cast<std::size_t>(img.width) * img.height, 0);
    const double max = counts.empty() ? 0.0 : *std::max_element(counts.begin(), counts.end());
    if (!(max > 0.0)) return img;
    for (int r = 0; r < spec.n_rows; ++r) {
        for (int c = 0; c < spec.n_cols; ++c) {
            const double v = std::max(counts[spec.index(r, c)], 0.0) / max;
            const auto g = static_cast<std::uint8_t>(std::lround(255.0 * v));
            const int top = (spec.n_rows - 1 - r) * block;
            for (int y = top; y < top + block; ++y)
                std::fill_n(img.gray.begin() + static_cast<std::ptrdiff_t>(y) * img.width + c * block, block, g);
        }
    }
    return img;
}

void write_ppm(std::ostream& out, const Image& image) {
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    for (auto g : image.gray) {
        const char px[3] = {static_cast<char>(g), static_cast<char>(g), static_cast<char>(g)};
        out.write(px, 3);
    }
}

}  // namespace crimesim::io
