#include <cmath>

#include "mwht/em/kernels.hpp"

namespace mwht::em::kernels {

namespace {

// One row of the E update for columns [i0, i1); `im0` is the left neighbour column of i0.
inline void e_row(FieldArrays f, const std::uint16_t* material, const EMaterial* table,
                  double inv_dx, std::size_t row, std::size_t row_below, int i0, int i1) {
  double* __restrict ez = f.ez + row;
  double* __restrict jp = f.jp + row;
  const double* __restrict hy = f.hy + row;
  const double* __restrict hx = f.hx + row;
  const double* __restrict hx_below = f.hx + row_below;
  const std::uint16_t* __restrict mat = material + row;
  for (int i = i0; i < i1; ++i) {
    const EMaterial& m = table[mat[i]];
    const double curl = (hy[i] - hy[i - 1]) * inv_dx - (hx[i] - hx_below[i]) * inv_dx;
    const double e_old = ez[i];
    const double e_new = m.ca * e_old + m.cb * (curl - m.jp_mix * jp[i]);
    jp[i] = m.ka * jp[i] + m.kb * (e_new - e_old);
    ez[i] = e_new;
  }
}

inline void e_cell(FieldArrays f, const std::uint16_t* material, const EMaterial* table,
                   double inv_dx, std::size_t k, std::size_t k_left, std::size_t k_below) {
  const EMaterial& m = table[material[k]];
  const double curl =
      (f.hy[k] - f.hy[k_left]) * inv_dx - (f.hx[k] - f.hx[k_below]) * inv_dx;
  const double e_old = f.ez[k];
  const double e_new = m.ca * e_old + m.cb * (curl - m.jp_mix * f.jp[k]);
  f.jp[k] = m.ka * f.jp[k] + m.kb * (e_new - e_old);
  f.ez[k] = e_new;
}

}  // namespace

void update_h_omp(const Layout& l, FieldArrays f, double coef) {
  const int nx = l.nx, ny = l.ny;
  const int jmax = l.periodic_y ? ny : ny - 1;
  const bool px = l.periodic_x;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const double* __restrict ez = f.ez + row;
    if (j < jmax) {
      const double* __restrict ez_up = f.ez + static_cast<std::size_t>((j + 1) % ny) * nx;
      double* __restrict hx = f.hx + row;
      for (int i = 0; i < nx; ++i) hx[i] -= coef * (ez_up[i] - ez[i]);
    }
    double* __restrict hy = f.hy + row;
    for (int i = 0; i < nx - 1; ++i) hy[i] += coef * (ez[i + 1] - ez[i]);
    if (px) hy[nx - 1] += coef * (ez[0] - ez[nx - 1]);
  }
}

void update_e_omp(const Layout& l, FieldArrays f, const std::uint16_t* material,
                  const EMaterial* table, double inv_dx) {
  const int nx = l.nx, ny = l.ny;
  const int j0 = l.periodic_y ? 0 : 1, j1 = l.periodic_y ? ny : ny - 1;
  const bool px = l.periodic_x;
#pragma omp parallel for schedule(static)
  for (int j = j0; j < j1; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    const std::size_t below = static_cast<std::size_t>((j + ny - 1) % ny) * nx;
    if (px) e_cell(f, material, table, inv_dx, row, row + nx - 1, below);
    e_row(f, material, table, inv_dx, row, below, 1, nx - 1);
    if (px) e_cell(f, material, table, inv_dx, row + nx - 1, row + nx - 2, below + nx - 1);
  }
}

void accumulate_square_omp(std::size_t n, const double* ez, double* sum_sq) {
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) sum_sq[k] += ez[k] * ez[k];
}

bool all_finite_omp(std::size_t n, const double* v) {
  const auto count = static_cast<std::ptrdiff_t>(n);
  int bad = 0;
#pragma omp parallel for schedule(static) reduction(| : bad)
  for (std::ptrdiff_t k = 0; k < count; ++k) bad |= !std::isfinite(v[k]);
  return bad == 0;
}

}  // namespace mwht::em::kernels
