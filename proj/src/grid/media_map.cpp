#include "mwht/media_map.hpp"

#include <string>

#include "mwht/constants.hpp"

namespace mwht {

MediaMap::MediaMap(GridSpec grid, TissueLabel immersion)
    : grid_(grid), cells_(grid.nx, grid.ny) {
  grid_.validate();
  if (!is_immersion(immersion)) throw DomainError("immersion medium must be water or air");
  cells_.fill(TissueCell::of(immersion));
  reset_immersion(immersion);
}

void MediaMap::reset_immersion(TissueLabel immersion) {
  if (!is_immersion(immersion)) throw DomainError("immersion medium must be water or air");
  immersion_ = immersion;
  h_overridden_ = false;
  if (immersion == TissueLabel::water) {
    boundary_h_ = constants::h_tissue_water;
    ambient_temp_ = constants::water_bath_temperature;
  } else {
    boundary_h_ = constants::h_tissue_air;
    ambient_temp_ = constants::room_air_temperature;
  }
}

void MediaMap::override_boundary_h(double h) {
  if (!(h >= 0.0)) throw DomainError("boundary_h must be non-negative");
  boundary_h_ = h;
  h_overridden_ = true;
}

MaskGrid MediaMap::tissue_mask() const {
  MaskGrid m(grid_.nx, grid_.ny, 0);
  for (std::size_t k = 0; k < cells_.size(); ++k) m[k] = is_immersion(cells_[k].label) ? 0 : 1;
  return m;
}

std::size_t MediaMap::tissue_cell_count() const {
  std::size_t n = 0;
  for (const auto& c : cells_.values()) n += is_immersion(c.label) ? 0 : 1;
  return n;
}

void MediaMap::paint_disk(Point center, double radius, const TissueCell& value) {
  paint_if([&](Point p) { return in_disk(p, center, radius); }, value);
}

void MediaMap::paint_if(const std::function<bool(Point)>& inside, const TissueCell& value) {
  for (int j = 0; j < grid_.ny; ++j)
    for (int i = 0; i < grid_.nx; ++i)
      if (inside(grid_.center_of({i, j}))) cells_(i, j) = value;
}

void MediaMap::validate() const {
  grid_.validate();
  if (cells_.nx() != grid_.nx || cells_.ny() != grid_.ny)
    throw DomainError("media cell array does not match the grid");
  if (!is_immersion(immersion_)) throw DomainError("immersion label must be water or air");
  if (!(boundary_h_ >= 0.0)) throw DomainError("boundary_h must be non-negative");
  if (!h_overridden_) {
    const double expected = immersion_ == TissueLabel::water ? constants::h_tissue_water
                                                             : constants::h_tissue_air;
    if (boundary_h_ != expected)
      throw DomainError("boundary_h " + std::to_string(boundary_h_) +
                        " does not match the immersion medium and was not overridden");
  }
  for (int j = 0; j < grid_.ny; ++j) {
    for (int i = 0; i < grid_.nx; ++i) {
      const auto& c = cells_(i, j);
      c.debye.validate();
      c.thermal.validate();
      if (is_immersion(c.label) && c.label != immersion_)
        throw DomainError("cell (" + std::to_string(i) + "," + std::to_string(j) +
                          ") carries a foreign immersion label");
    }
  }
}

MaskGrid disk_mask(const GridSpec& grid, Point center, double radius) {
  MaskGrid m(grid.nx, grid.ny, 0);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) m(i, j) = in_disk(grid.center_of({i, j}), center, radius);
  return m;
}

}  // namespace mwht
