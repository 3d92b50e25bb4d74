#include "mwht/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mwht::metrics {

namespace {

void check_same(const ScalarGrid& q, const GridSpec& g) {
  if (q.nx() != g.nx || q.ny() != g.ny) throw DomainError("map does not match the media grid");
}

std::optional<double> ratio(double v, double base) {
  if (base > 0.0) return v / base;
  return std::nullopt;
}

}  // namespace

PowerReport power_report(const ScalarGrid& q, const MediaMap& media, Cell target, double treatment_radius,
                         const PowerReport* baseline) {
  const GridSpec& g = media.grid();
  check_same(q, g);
  if (!g.contains(target)) throw GeometryError("report target outside the grid");
  const double area = g.dx * g.dy;
  const Point tc = g.center_of(target);
  PowerReport r;
  for (int j = 0; j < g.ny; ++j) {
    double row_total = 0.0, row_treat = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      if (!media.is_tissue(i, j)) continue;
      const double v = q(i, j);
      if (v < 0.0) throw DomainError("heating potential has a negative entry");
      row_total += v;
      if (in_disk(g.center_of({i, j}), tc, treatment_radius)) row_treat += v;
    }
    r.total_media += row_total * area;
    r.treatment_region += row_treat * area;
  }
  r.target_cell = q(target.i, target.j);
  if (baseline) {
    r.total_ratio = ratio(r.total_media, baseline->total_media);
    r.treatment_ratio = ratio(r.treatment_region, baseline->treatment_region);
    r.target_ratio = ratio(r.target_cell, baseline->target_cell);
  }
  return r;
}

double region_power(const ScalarGrid& q, const MaskGrid& mask, const GridSpec& grid) {
  check_same(q, grid);
  double s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k)
    if (mask[k]) s += q[k];
  return s * grid.dx * grid.dy;
}

MaskGrid contour_mask(const ScalarGrid& map, ContourLevel level, const MaskGrid* within) {
  if (within && (within->nx() != map.nx() || within->ny() != map.ny()))
    throw DomainError("contour region does not match the map");
  MaskGrid m(map.nx(), map.ny());
  double threshold = level.value;
  if (level.mode == ContourLevel::Mode::db) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < map.size(); ++k)
      if (!within || (*within)[k]) peak = std::max(peak, map[k]);
    if (!std::isfinite(peak)) return m;
    threshold = peak * std::pow(10.0, level.value / 10.0);
    if (peak <= 0.0) threshold = peak;
  }
  for (std::size_t k = 0; k < map.size(); ++k)
    m[k] = (!within || (*within)[k]) && map[k] >= threshold ? 1 : 0;
  return m;
}

std::size_t mask_count(const MaskGrid& m) {
  return static_cast<std::size_t>(std::count_if(m.values().begin(), m.values().end(), [](unsigned char v) { return v != 0; }));
}

double mask_overlap(const MaskGrid& a, const MaskGrid& b) {
  if (a.nx() != b.nx() || a.ny() != b.ny()) throw DomainError("mask sizes differ");
  std::size_t both = 0, any = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    both += (a[k] && b[k]) ? 1 : 0;
    any += (a[k] || b[k]) ? 1 : 0;
  }
  return any == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(any);
}

std::vector<double> slice_row(const ScalarGrid& map, int row) {
  if (row < 0 || row >= map.ny()) throw DomainError("slice row outside the map");
  std::vector<double> s(static_cast<std::size_t>(map.nx()));
  for (int i = 0; i < map.nx(); ++i) s[i] = map(i, row);
  return s;
}

std::vector<double> slice_1d(const ScalarGrid& map, const GridSpec& grid) {
  check_same(map, grid);
  return slice_row(map, grid.ny / 2);
}

FocusError focus_error(const ScalarGrid& q, const MaskGrid& region, Cell target) {
  if (region.nx() != q.nx() || region.ny() != q.ny()) throw DomainError("region does not match the map");
  FocusError best;
  double best_v = -std::numeric_limits<double>::infinity();
  double best_d = std::numeric_limits<double>::infinity();
  bool found = false;
  for (int j = 0; j < q.ny(); ++j)
    for (int i = 0; i < q.nx(); ++i) {
      if (!region(i, j)) continue;
      const double v = q(i, j);
      const double d = std::hypot(i - target.i, j - target.j);
      if (v > best_v || (v == best_v && d < best_d)) {
        best_v = v;
        best_d = d;
        best.peak = {i, j};
        found = true;
      }
    }
  if (!found) throw DomainError("focus error over an empty region");
  best.distance_cells = best_d;
  return best;
}

}  // namespace mwht::metrics
