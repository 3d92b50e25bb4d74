#include "mwht/em/fdtd.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <map>
#include <string>

#include "mwht/constants.hpp"

namespace mwht::em {

using constants::eps0;
using constants::mu0;

TimeStep choose_time_step(const GridSpec& grid, double frequency) {
  if (!(frequency > 0.0)) throw DomainError("carrier frequency must be positive");
  const double dt_courant = grid.courant * grid.dx / (constants::c0 * std::sqrt(2.0));
  const double period = 1.0 / frequency;
  const double ratio = period / dt_courant;
  int n = static_cast<int>(std::ceil(ratio));
  if (n - ratio > 1.0 - 1e-12) n -= 1;  // ratio already integral up to rounding
  n = std::max(n, 2);
  return {period / n, n};
}

kernels::EMaterial debye_update_coefficients(const DebyeParams& p, double dt) {
  // tau dJp/dt + Jp = eps0 d_eps dE/dt, trapezoidal in time (bilinear; stable for any tau/dt).
  kernels::EMaterial m;
  m.ka = (2.0 * p.tau - dt) / (2.0 * p.tau + dt);
  m.kb = 2.0 * eps0 * p.delta_eps / (2.0 * p.tau + dt);
  m.jp_mix = 0.5 * (1.0 + m.ka);
  const double c_e = eps0 * p.eps_inf / dt;
  const double denom = c_e + 0.5 * p.sigma_s + 0.5 * m.kb;
  m.ca = (c_e - 0.5 * p.sigma_s + 0.5 * m.kb) / denom;
  m.cb = 1.0 / denom;
  return m;
}

FdtdEngine::FdtdEngine(const MediaMap& media, SolverOptions options)
    : grid_(media.grid()), options_(options) {
  grid_.validate();
  const auto ts = choose_time_step(grid_, options_.frequency);
  dt_ = ts.dt;
  steps_per_period_ = ts.steps_per_period;
  coef_h_ = dt_ / (mu0 * grid_.dx);
  inv_dx_ = 1.0 / grid_.dx;
  layout_ = {grid_.nx, grid_.ny, options_.x_boundary == Boundary::periodic,
             options_.y_boundary == Boundary::periodic};

  const int L = grid_.pml_thickness;
  if ((!layout_.periodic_x && 2 * (L + 1) + 1 > grid_.nx) ||
      (!layout_.periodic_y && 2 * (L + 1) + 1 > grid_.ny))
    throw DomainError("grid too small for the requested PML thickness");

  // Intern distinct Debye media; scenario maps only carry a handful.
  std::map<std::array<std::uint64_t, 4>, std::uint16_t> ids;
  material_.resize(grid_.cell_count());
  eps_cell_.resize(grid_.cell_count());
  const auto& cells = media.cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto& d = cells[k].debye;
    const std::array<std::uint64_t, 4> key{
        std::bit_cast<std::uint64_t>(d.eps_inf), std::bit_cast<std::uint64_t>(d.delta_eps),
        std::bit_cast<std::uint64_t>(d.sigma_s), std::bit_cast<std::uint64_t>(d.tau)};
    auto it = ids.find(key);
    if (it == ids.end()) {
      if (table_.size() >= 65535) throw DomainError("too many distinct media (max 65535)");
      d.validate();
      it = ids.emplace(key, static_cast<std::uint16_t>(table_.size())).first;
      table_.push_back(debye_update_coefficients(d, dt_));
    }
    material_[k] = it->second;
    eps_cell_[k] = eps0 * d.eps_inf;
  }

  const double eps_edge = debye_complex_permittivity(cells(0, 0).debye, options_.frequency).real();
  const int m = options_.pml.grading_order;
  const double sigma_max = options_.pml.sigma_factor * 0.8 * (m + 1) /
                           (constants::eta0 * grid_.dx * std::sqrt(std::max(1.0, eps_edge)));
  build_axis(ax_, grid_.nx, options_.x_boundary, sigma_max, options_.pml.alpha_max);
  build_axis(ay_, grid_.ny, options_.y_boundary, sigma_max, options_.pml.alpha_max);
}

void FdtdEngine::build_axis(Axis& axis, int n, Boundary boundary, double sigma_max,
                            double alpha_max) const {
  axis.n = n;
  axis.b_int.assign(n, 1.0);
  axis.a_int.assign(n, 0.0);
  axis.b_half.assign(n, 1.0);
  axis.a_half.assign(n, 0.0);
  if (boundary == Boundary::periodic) {
    axis.width = 0;
    return;
  }
  const int L = grid_.pml_thickness;
  axis.width = L + 1;
  const double m = options_.pml.grading_order;
  // Depth into the layer in cells, mirror-symmetric between the two sides.
  auto depth = [&](double p) {
    const double low = L - p;
    const double high = p - (n - 1 - L);
    return std::max(0.0, std::max(low, high));
  };
  auto coeffs = [&](double d, double& b, double& a) {
    if (d <= 0.0) {
      b = 1.0;
      a = 0.0;
      return;
    }
    const double x = std::min(1.0, d / L);
    const double sigma = sigma_max * std::pow(x, m);
    const double alpha = alpha_max * (1.0 - x);
    b = std::exp(-(sigma + alpha) * dt_ / eps0);
    a = sigma > 0.0 ? sigma / (sigma + alpha) * (b - 1.0) : 0.0;
  };
  for (int i = 0; i < n; ++i) {
    coeffs(depth(i), axis.b_int[i], axis.a_int[i]);
    coeffs(depth(i + 0.5), axis.b_half[i], axis.a_half[i]);
  }
}

FieldState FdtdEngine::make_state() const {
  FieldState s;
  s.ez = ScalarGrid(grid_.nx, grid_.ny);
  s.hx = ScalarGrid(grid_.nx, grid_.ny);
  s.hy = ScalarGrid(grid_.nx, grid_.ny);
  s.jp = ScalarGrid(grid_.nx, grid_.ny);
  const std::size_t xs = static_cast<std::size_t>(2 * ax_.width) * grid_.ny;
  const std::size_t ys = static_cast<std::size_t>(2 * ay_.width) * grid_.nx;
  s.psi_ez_x.assign(xs, 0.0);
  s.psi_hy_x.assign(xs, 0.0);
  s.psi_ez_y.assign(ys, 0.0);
  s.psi_hx_y.assign(ys, 0.0);
  s.dt = dt_;
  return s;
}

void FdtdEngine::apply_pml_h(FieldState& s) const {
  const int nx = grid_.nx, ny = grid_.ny;
  const double c = dt_ / mu0;
  const double inv = inv_dx_;
  const bool par = parallel();
  if (ax_.width > 0) {
    const int w2 = 2 * ax_.width;
#pragma omp parallel for schedule(static) if (par)
    for (int j = 0; j < ny; ++j) {
      for (int side = 0; side < 2; ++side) {
        const int i0 = side == 0 ? 0 : nx - ax_.width;
        const int i1 = side == 0 ? ax_.width : nx - 1;
        for (int i = i0; i < i1; ++i) {
          const std::size_t k = grid_.index(i, j);
          double& psi = s.psi_hy_x[static_cast<std::size_t>(j) * w2 + ax_.local(i)];
          psi = ax_.b_half[i] * psi + ax_.a_half[i] * ((s.ez[k + 1] - s.ez[k]) * inv);
          s.hy[k] += c * psi;
        }
      }
    }
  }
  if (ay_.width > 0) {
#pragma omp parallel for schedule(static) if (par)
    for (int j = 0; j < ny - 1; ++j) {
      if (!ay_.in_strip(j)) continue;
      const std::size_t prow = static_cast<std::size_t>(ay_.local(j)) * nx;
      for (int i = 0; i < nx; ++i) {
        const std::size_t k = grid_.index(i, j);
        double& psi = s.psi_hx_y[prow + i];
        psi = ay_.b_half[j] * psi + ay_.a_half[j] * ((s.ez[k + nx] - s.ez[k]) * inv);
        s.hx[k] -= c * psi;
      }
    }
  }
}

void FdtdEngine::apply_pml_e(FieldState& s) const {
  const int nx = grid_.nx, ny = grid_.ny;
  const double inv = inv_dx_;
  const bool par = parallel();
  const int j0 = layout_.periodic_y ? 0 : 1, j1 = layout_.periodic_y ? ny : ny - 1;
  if (ax_.width > 0) {
    const int w2 = 2 * ax_.width;
#pragma omp parallel for schedule(static) if (par)
    for (int j = j0; j < j1; ++j) {
      for (int side = 0; side < 2; ++side) {
        const int i0 = side == 0 ? 1 : nx - ax_.width;
        const int i1 = side == 0 ? ax_.width : nx - 1;
        for (int i = i0; i < i1; ++i) {
          const std::size_t k = grid_.index(i, j);
          double& psi = s.psi_ez_x[static_cast<std::size_t>(j) * w2 + ax_.local(i)];
          psi = ax_.b_int[i] * psi + ax_.a_int[i] * ((s.hy[k] - s.hy[k - 1]) * inv);
          const auto& m = table_[material_[k]];
          const double de = m.cb * psi;
          s.ez[k] += de;
          s.jp[k] += m.kb * de;
        }
      }
    }
  }
  if (ay_.width > 0) {
    const int i0 = layout_.periodic_x ? 0 : 1, i1 = layout_.periodic_x ? nx : nx - 1;
#pragma omp parallel for schedule(static) if (par)
    for (int j = 1; j < ny - 1; ++j) {
      if (!ay_.in_strip(j)) continue;
      const std::size_t prow = static_cast<std::size_t>(ay_.local(j)) * nx;
      for (int i = i0; i < i1; ++i) {
        const std::size_t k = grid_.index(i, j);
        double& psi = s.psi_ez_y[prow + i];
        psi = ay_.b_int[j] * psi + ay_.a_int[j] * ((s.hx[k] - s.hx[k - nx]) * inv);
        const auto& m = table_[material_[k]];
        const double de = -(m.cb * psi);
        s.ez[k] += de;
        s.jp[k] += m.kb * de;
      }
    }
  }
}

void FdtdEngine::check_finite(const FieldState& s) const {
  const bool ok = parallel() ? kernels::all_finite_omp(s.ez.size(), s.ez.data())
                             : kernels::all_finite_serial(s.ez.size(), s.ez.data());
  if (!ok) throw NumericalInstability(s.n, "non-finite Ez");
}

void FdtdEngine::step(FieldState& s, std::span<const SourceSample> sources) const {
  kernels::FieldArrays f{s.ez.data(), s.hx.data(), s.hy.data(), s.jp.data()};
  if (parallel())
    kernels::update_h_omp(layout_, f, coef_h_);
  else
    kernels::update_h_serial(layout_, f, coef_h_);
  apply_pml_h(s);

  if (parallel())
    kernels::update_e_omp(layout_, f, material_.data(), table_.data(), inv_dx_);
  else
    kernels::update_e_serial(layout_, f, material_.data(), table_.data(), inv_dx_);
  apply_pml_e(s);

  for (const auto& src : sources) {
    const auto& m = table_[material_[src.index]];
    const double de = -(m.cb * src.current);
    s.ez[src.index] += de;
    s.jp[src.index] += m.kb * de;
  }
  ++s.n;
  const int every = std::max(1, options_.stability_check_interval);
  if (s.n % every == 0) check_finite(s);
}

double FdtdEngine::field_energy(const FieldState& s) const {
  double total = 0.0;
  for (int j = 0; j < grid_.ny; ++j) {
    double row = 0.0;
    for (int i = 0; i < grid_.nx; ++i) {
      const std::size_t k = grid_.index(i, j);
      row += eps_cell_[k] * s.ez[k] * s.ez[k] + mu0 * (s.hx[k] * s.hx[k] + s.hy[k] * s.hy[k]);
    }
    total += row;
  }
  return 0.5 * total * grid_.dx * grid_.dy;
}

}  // namespace mwht::em
