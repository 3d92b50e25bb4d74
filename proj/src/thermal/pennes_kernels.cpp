#include <algorithm>
#include <cmath>

#include "mwht/thermal/pennes.hpp"

namespace mwht::thermal::kernels {

namespace {

inline double rate_at(int nx, std::size_t k, const double* t, const double* q, double scale,
                      const PennesModel::Coeffs& c) {
  const double tk = t[k];
  double r = c.ce[k] * (t[k + 1] - tk);
  r += c.cw[k] * (t[k - 1] - tk);
  r += c.cn[k] * (t[k + nx] - tk);
  r += c.cs[k] * (t[k - nx] - tk);
  r += c.src[k];
  r += c.qk[k] * (scale * q[k]);
  r -= c.bk[k] * tk;
  return r;
}

}  // namespace

// Tissue never touches the outermost ring (the model rejects it), so the stencil
// runs over interior cells only.
double pennes_serial(int nx, int ny, const double* t, double* t_new, const double* q, double scale,
                     double dt, const PennesModel::Coeffs& c, const unsigned char* mask, long monitor) {
  double worst = 0.0;
  std::copy(t, t + static_cast<std::size_t>(nx) * ny, t_new);
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (!mask[k]) continue;
      const double r = rate_at(nx, k, t, q, scale, c);
      t_new[k] = t[k] + dt * r;
      if (monitor < 0 || static_cast<long>(k) == monitor) worst = std::max(worst, std::abs(r));
    }
  return worst;
}

double pennes_omp(int nx, int ny, const double* t, double* t_new, const double* q, double scale,
                  double dt, const PennesModel::Coeffs& c, const unsigned char* mask, long monitor) {
  double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
  for (int j = 0; j < ny; ++j) {
    const std::size_t row = static_cast<std::size_t>(j) * nx;
    std::copy(t + row, t + row + nx, t_new + row);
    if (j == 0 || j == ny - 1) continue;
    for (int i = 1; i < nx - 1; ++i) {
      const std::size_t k = row + i;
      if (!mask[k]) continue;
      const double r = rate_at(nx, k, t, q, scale, c);
      t_new[k] = t[k] + dt * r;
      if (monitor < 0 || static_cast<long>(k) == monitor) worst = std::max(worst, std::abs(r));
    }
  }
  return worst;
}

}  // namespace mwht::thermal::kernels
