#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mwht/error.hpp"

namespace mwht {

/// Integer cell address on the Yee grid. `i` runs along x, `j` along y.
struct Cell {
  int i = 0;
  int j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Physical point in meters, origin at the grid center.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Uniform square-cell 2D grid. Cell (i, j) is centered at ((i - nx/2) dx, (j - ny/2) dy),
/// so the origin always falls on a cell center; odd sizes are mirror-symmetric.
struct GridSpec {
  int nx = 400;
  int ny = 400;
  double dx = 0.5e-3;
  double dy = 0.5e-3;
  double courant = 0.7;
  int pml_thickness = 12;

  void validate() const;

  std::size_t cell_count() const { return static_cast<std::size_t>(nx) * ny; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
  std::size_t index(Cell c) const { return index(c.i, c.j); }
  bool contains(Cell c) const { return c.i >= 0 && c.i < nx && c.j >= 0 && c.j < ny; }

  double x_of(int i) const { return (i - nx / 2) * dx; }
  double y_of(int j) const { return (j - ny / 2) * dy; }
  Point center_of(Cell c) const { return {x_of(c.i), y_of(c.j)}; }

  /// Nearest cell to a physical point (round half away from zero, symmetric about the origin).
  Cell cell_at(Point p) const {
    return {static_cast<int>(std::lround(p.x / dx)) + nx / 2,
            static_cast<int>(std::lround(p.y / dy)) + ny / 2};
  }

  /// True when `c` lies at least `margin` cells inside the PML interface.
  bool inside_interior(Cell c, int margin = 0) const {
    const int m = pml_thickness + margin;
    return c.i >= m && c.i < nx - m && c.j >= m && c.j < ny - m;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Row-major 2D array: element (i, j) lives at j * nx + i.
template <class T>
class Grid2D {
public:
  Grid2D() = default;
  Grid2D(int nx, int ny, T fill = T{})
      : nx_(nx), ny_(ny), data_(static_cast<std::size_t>(nx) * ny, fill) {}

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(int i, int j) { return data_[static_cast<std::size_t>(j) * nx_ + i]; }
  const T& operator()(int i, int j) const { return data_[static_cast<std::size_t>(j) * nx_ + i]; }
  T& operator[](std::size_t k) { return data_[k]; }
  const T& operator[](std::size_t k) const { return data_[k]; }
  T& at(Cell c) { return (*this)(c.i, c.j); }
  const T& at(Cell c) const { return (*this)(c.i, c.j); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
  int nx_ = 0;
  int ny_ = 0;
  std::vector<T> data_;
};

using ScalarGrid = Grid2D<double>;
using MaskGrid = Grid2D<unsigned char>;

}  // namespace mwht
