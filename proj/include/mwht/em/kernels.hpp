#pragma once

#include <cstddef>
#include <cstdint>

namespace mwht::em::kernels {

/// Per-material E-update coefficients for the Debye ADE scheme.
///
///   e_new = ca * e_old + cb * (curl_h - jp_mix * jp)
///   jp    = ka * jp + kb * (e_new - e_old)
struct EMaterial {
  double ca = 1.0;
  double cb = 0.0;
  double ka = 0.0;
  double kb = 0.0;
  double jp_mix = 0.0;
};

struct Layout {
  int nx = 0;
  int ny = 0;
  bool periodic_x = false;
  bool periodic_y = false;
};

struct FieldArrays {
  double* ez;
  double* hx;
  double* hy;
  double* jp;
};

/// H half-step: hx -= coef (ez[j+1] - ez[j]), hy += coef (ez[i+1] - ez[i]).
/// Without periodic wrap the last hx row and last hy column stay untouched (PEC edge).
void update_h_serial(const Layout& l, FieldArrays f, double coef);
void update_h_omp(const Layout& l, FieldArrays f, double coef);

/// E full-step with Debye polarization current. Outermost cells stay zero unless periodic.
void update_e_serial(const Layout& l, FieldArrays f, const std::uint16_t* material,
                     const EMaterial* table, double inv_dx);
void update_e_omp(const Layout& l, FieldArrays f, const std::uint16_t* material,
                  const EMaterial* table, double inv_dx);

/// sum_sq[k] += ez[k]^2 over the whole grid.
void accumulate_square_serial(std::size_t n, const double* ez, double* sum_sq);
void accumulate_square_omp(std::size_t n, const double* ez, double* sum_sq);

/// True when every value is finite.
bool all_finite_serial(std::size_t n, const double* v);
bool all_finite_omp(std::size_t n, const double* v);

}  // namespace mwht::em::kernels
