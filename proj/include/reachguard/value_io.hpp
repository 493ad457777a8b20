#pragma once

// Binary value-function files and CSV exports.
//
// Layout, all little-endian: "FRTV1", u8 grid_scaled_l, then per axis f64 lo, f64 hi, i32 n,
// u8 periodic; f64 horizon; f64 v_start; f64[8] endpoints; f64[3] margins (position, speed,
// heading); u32 snapshot count; per snapshot f64 time; then f32 values (x-major) followed by
// each snapshot's f32 values. l is recomputed on load.

#include <filesystem>
#include <iosfwd>

#include "reachguard/occupancy.hpp"
#include "reachguard/reachability.hpp"

namespace reachguard {

void write_value_function(const std::filesystem::path& path, const ValueFunction& vf);
ValueFunction read_value_function(const std::filesystem::path& path);

void write_value_function(std::ostream& out, const ValueFunction& vf);
ValueFunction read_value_function(std::istream& in);

/// Rows "x,y,value" of the (theta, v) slice through the nearest nodes.
void write_slice_csv(const std::filesystem::path& path, const ValueFunction& vf, double theta,
                     double v);

/// First line "# origin_x,origin_y,cell,nx,ny" values, then one row per iy (x along columns).
void write_mask_csv(const std::filesystem::path& path, const OccupancyGrid2D& grid);
OccupancyGrid2D read_mask_csv(const std::filesystem::path& path);

}  // namespace reachguard
