#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>

#include "crimesim/engine.hpp"
#include "crimesim/geodata.hpp"

namespace crimesim::io {

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body);

/// `day,slot,row,col,district` with slot names (morning/afternoon/night).
void write_events_csv(std::ostream& out, const engine::SimResult& result, const geodata::Grid& grid);

/// Totals, per-district counts, per-slot series, unemployment series, seed
/// and the parameters of the run.
void write_summary_json(std::ostream& out, const engine::SimResult& result, const geodata::Grid& grid);

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> gray;  // row-major, top row first
};

/// One block x block square per cell, gray = 255 * count / max (black when the
/// raster is all zero). North (the last grid row) is at the top.
Image render_heatmap(std::span<const double> counts, const geodata::GridSpec& spec, int block = 4);

/// Binary portable pixmap (P6) with equal RGB channels.
void write_ppm(std::ostream& out, const Image& image);

}  // namespace crimesim::io
