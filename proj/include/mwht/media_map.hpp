#pragma once

#include <functional>

#include "mwht/grid.hpp"
#include "mwht/tissue.hpp"

namespace mwht {

struct TissueCell {
  DebyeParams debye;
  ThermalParams thermal;
  TissueLabel label = TissueLabel::air;

  static TissueCell of(TissueLabel l) {
    return {tissues::debye_for(l), tissues::thermal_for(l), l};
  }
  friend bool operator==(const TissueCell&, const TissueCell&) = default;
};

/// Per-cell dielectric and thermal description of a 2D testbed and its immersion medium.
class MediaMap {
public:
  MediaMap() = default;
  /// Every cell starts as the immersion medium.
  MediaMap(GridSpec grid, TissueLabel immersion);

  const GridSpec& grid() const { return grid_; }
  TissueLabel immersion() const { return immersion_; }
  double boundary_h() const { return boundary_h_; }
  double ambient_temp() const { return ambient_temp_; }
  bool boundary_h_overridden() const { return h_overridden_; }

  /// Replaces the standard tissue/immersion convective coefficient.
  void override_boundary_h(double h);
  void set_ambient_temp(double t) { ambient_temp_ = t; }
  /// Restores the standard coefficient and bath temperature of `immersion`.
  void reset_immersion(TissueLabel immersion);

  const TissueCell& cell(Cell c) const { return cells_.at(c); }
  const TissueCell& cell(int i, int j) const { return cells_(i, j); }
  void set(Cell c, const TissueCell& value) { cells_.at(c) = value; }
  const Grid2D<TissueCell>& cells() const { return cells_; }
  Grid2D<TissueCell>& cells() { return cells_; }

  bool is_tissue(Cell c) const { return !is_immersion(cells_.at(c).label); }
  bool is_tissue(int i, int j) const { return !is_immersion(cells_(i, j).label); }
  MaskGrid tissue_mask() const;
  std::size_t tissue_cell_count() const;

  /// Assigns `value` to every cell whose center lies strictly inside the disk.
  void paint_disk(Point center, double radius, const TissueCell& value);
  /// Applies `fn` to every cell whose center satisfies `inside`.
  void paint_if(const std::function<bool(Point)>& inside, const TissueCell& value);

  /// Throws DomainError when an invariant is broken.
  void validate() const;

  friend bool operator==(const MediaMap&, const MediaMap&) = default;

private:
  GridSpec grid_;
  Grid2D<TissueCell> cells_;
  TissueLabel immersion_ = TissueLabel::air;
  double boundary_h_ = 0.0;
  double ambient_temp_ = 0.0;
  bool h_overridden_ = false;
};

/// Cells whose centers lie inside the disk.
MaskGrid disk_mask(const GridSpec& grid, Point center, double radius);
inline bool in_disk(Point p, Point center, double radius) {
  const double dx = p.x - center.x, dy = p.y - center.y;
  return dx * dx + dy * dy < radius * radius;
}

}  // namespace mwht
