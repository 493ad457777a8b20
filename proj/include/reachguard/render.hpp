#pragma once
// Top-down SVG views of tubes and simulation frames.

#include <filesystem>
#include <string>

#include "reachguard/occupancy.hpp"
#include "reachguard/sim.hpp"

namespace reachguard {

/// Occupied cells of a position mask, with the origin marked.
std::string mask_svg(const OccupancyGrid2D& k, const std::string& title = {});

/// Road, stop line, collision set, tube projection, vehicles and the ego's nominal path.
std::string frame_svg(const SimFrame& frame);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace reachguard
