#pragma once

#include <optional>
#include <vector>

#include "mwht/media_map.hpp"

namespace mwht::metrics {

struct PowerReport {
  double total_media = 0.0;       ///< W/m, Q dx^2 summed over tissue
  double treatment_region = 0.0;  ///< W/m, over tissue cells inside the treatment disk
  double target_cell = 0.0;       ///< W/m^3
  std::optional<double> total_ratio, treatment_ratio, target_ratio;  ///< vs baseline
};

PowerReport power_report(const ScalarGrid& q, const MediaMap& media, Cell target,
                         double treatment_radius = 0.01, const PowerReport* baseline = nullptr);

/// Q dx^2 summed over mask cells.
double region_power(const ScalarGrid& q, const MaskGrid& mask, const GridSpec& grid);

struct ContourLevel {
  enum class Mode { db, absolute } mode = Mode::db;
  double value = -3.0;  ///< dB relative to the map maximum (power quantity), or an absolute level
  static ContourLevel db(double v) { return {Mode::db, v}; }
  static ContourLevel absolute(double v) { return {Mode::absolute, v}; }
};

/// Cells at or above the level. In dB mode the maximum is taken over `within` when given,
/// and cells outside `within` are false.
MaskGrid contour_mask(const ScalarGrid& map, ContourLevel level, const MaskGrid* within = nullptr);
std::size_t mask_count(const MaskGrid& m);
/// |a and b| / |a or b|; 1 for two empty masks.
double mask_overlap(const MaskGrid& a, const MaskGrid& b);

std::vector<double> slice_row(const ScalarGrid& map, int row);
/// Row through y = 0.
std::vector<double> slice_1d(const ScalarGrid& map, const GridSpec& grid);

struct FocusError {
  Cell peak;
  double distance_cells = 0.0;
};

/// Argmax of q over `region` (tissue) and its distance to the target. Ties go to the cell
/// nearest the target, then to the first in row-major order.
FocusError focus_error(const ScalarGrid& q, const MaskGrid& region, Cell target);

}  // namespace mwht::metrics
