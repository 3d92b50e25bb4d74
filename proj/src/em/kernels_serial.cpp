// Reference kernels: plain loops with explicit wrap handling. The OpenMP versions in
// kernels_omp.cpp must reproduce these bit for bit.
#include <cmath>

#include "mwht/em/kernels.hpp"

namespace mwht::em::kernels {

namespace {

inline std::size_t at(const Layout& l, int i, int j) {
  return static_cast<std::size_t>(j) * l.nx + i;
}

}  // namespace

void update_h_serial(const Layout& l, FieldArrays f, double coef) {
  const int jmax = l.periodic_y ? l.ny : l.ny - 1;
  for (int j = 0; j < jmax; ++j) {
    const int jp = (j + 1) % l.ny;
    for (int i = 0; i < l.nx; ++i) f.hx[at(l, i, j)] -= coef * (f.ez[at(l, i, jp)] - f.ez[at(l, i, j)]);
  }
  const int imax = l.periodic_x ? l.nx : l.nx - 1;
  for (int j = 0; j < l.ny; ++j) {
    for (int i = 0; i < imax; ++i) {
      const int ip = (i + 1) % l.nx;
      f.hy[at(l, i, j)] += coef * (f.ez[at(l, ip, j)] - f.ez[at(l, i, j)]);
    }
  }
}

void update_e_serial(const Layout& l, FieldArrays f, const std::uint16_t* material,
                     const EMaterial* table, double inv_dx) {
  const int i0 = l.periodic_x ? 0 : 1, i1 = l.periodic_x ? l.nx : l.nx - 1;
  const int j0 = l.periodic_y ? 0 : 1, j1 = l.periodic_y ? l.ny : l.ny - 1;
  for (int j = j0; j < j1; ++j) {
    const int jm = (j + l.ny - 1) % l.ny;
    for (int i = i0; i < i1; ++i) {
      const int im = (i + l.nx - 1) % l.nx;
      const std::size_t k = at(l, i, j);
      const EMaterial& m = table[material[k]];
      const double curl = (f.hy[k] - f.hy[at(l, im, j)]) * inv_dx -
                          (f.hx[k] - f.hx[at(l, i, jm)]) * inv_dx;
      const double e_old = f.ez[k];
      const double e_new = m.ca * e_old + m.cb * (curl - m.jp_mix * f.jp[k]);
      f.jp[k] = m.ka * f.jp[k] + m.kb * (e_new - e_old);
      f.ez[k] = e_new;
    }
  }
}

void accumulate_square_serial(std::size_t n, const double* ez, double* sum_sq) {
  for (std::size_t k = 0; k < n; ++k) sum_sq[k] += ez[k] * ez[k];
}

bool all_finite_serial(std::size_t n, const double* v) {
  for (std::size_t k = 0; k < n; ++k)
    if (!std::isfinite(v[k])) return false;
  return true;
}

}  // namespace mwht::em::kernels
