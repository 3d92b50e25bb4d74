#include "mwht/thermal/pennes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

namespace mwht::thermal {

void HeatScaling::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("heat scale must be positive");
}

PennesModel::PennesModel(const MediaMap& media, ThermalOptions options)
    : grid_(media.grid()), options_(options), ambient_(media.ambient_temp()) {
  media.validate();
  const int nx = grid_.nx, ny = grid_.ny;
  const std::size_t n = grid_.cell_count();
  const double dx = grid_.dx;
  const double h = media.boundary_h();
  tissue_ = media.tissue_mask();
  for (int i = 0; i < nx; ++i)
    if (tissue_(i, 0) || tissue_(i, ny - 1)) throw GeometryError("tissue touches the grid edge");
  for (int j = 0; j < ny; ++j)
    if (tissue_(0, j) || tissue_(nx - 1, j)) throw GeometryError("tissue touches the grid edge");

  rho_cp_.assign(n, 0.0);
  a0_.assign(n, 0.0);
  b_.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!tissue_[k]) continue;
    const auto& p = media.cells()[k].thermal;
    p.validate();
    rho_cp_[k] = p.rho * p.cp;
    a0_[k] = p.a0;
    b_[k] = p.b;
  }

  // Face conductance per unit cell area, W/(m^3 C). face_e_[k] couples k and k+1, face_n_[k]
  // couples k and k+nx. Faces between two immersion cells stay zero.
  face_e_.assign(n, 0.0);
  face_n_.assign(n, 0.0);
  boundary_g_.assign(n, 0.0);
  auto k_of = [&](std::size_t k) { return media.cells()[k].thermal.k; };
  auto face = [&](std::size_t a, std::size_t b) {
    const bool ta = tissue_[a], tb = tissue_[b];
    if (ta && tb) {
      const double ka = k_of(a), kb = k_of(b);
      return 2.0 * ka * kb / (ka + kb) / (dx * dx);
    }
    if (ta != tb) {
      if (h <= 0.0) return 0.0;
      const double kt = k_of(ta ? a : b);
      return 1.0 / (dx * dx / (2.0 * kt) + dx / h);
    }
    return 0.0;
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = grid_.index(i, j);
      if (i + 1 < nx) face_e_[k] = face(k, k + 1);
      if (j + 1 < ny) face_n_[k] = face(k, k + nx);
    }

  c_.ce.assign(n, 0.0);
  c_.cw.assign(n, 0.0);
  c_.cn.assign(n, 0.0);
  c_.cs.assign(n, 0.0);
  c_.src.assign(n, 0.0);
  c_.qk.assign(n, 0.0);
  c_.bk.assign(n, 0.0);
  double bound = std::numeric_limits<double>::infinity();
  double local = std::numeric_limits<double>::infinity();
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) {
      const std::size_t k = grid_.index(i, j);
      if (!tissue_[k]) continue;
      const double inv = 1.0 / rho_cp_[k];
      c_.ce[k] = face_e_[k] * inv;
      c_.cw[k] = face_e_[k - 1] * inv;
      c_.cn[k] = face_n_[k] * inv;
      c_.cs[k] = face_n_[k - nx] * inv;
      c_.src[k] = (a0_[k] + b_[k] * blood_ref_) * inv;
      c_.qk[k] = inv;
      c_.bk[k] = b_[k] * inv;
      for (std::size_t nb : {k + 1, k - 1, k + nx, k - nx})
        if (!tissue_[nb]) boundary_g_[k] += (nb == k + 1 || nb == k - 1)
                                               ? face_e_[std::min(k, nb)]
                                               : face_n_[std::min(k, nb)];
      const double kk = k_of(k);
      bound = std::min(bound, rho_cp_[k] / (4.0 * kk / (dx * dx) + b_[k]));
      const double sum = face_e_[k] + face_e_[k - 1] + face_n_[k] + face_n_[k - nx];
      local = std::min(local, rho_cp_[k] / (sum + b_[k]));
    }
  if (!std::isfinite(bound)) throw GeometryError("media map contains no tissue");
  bound_ = bound;
  const double limit = std::min(bound, local);
  if (options_.dt > 0.0) {
    if (options_.dt > limit)
      throw ConfigError("thermal dt " + std::to_string(options_.dt) + " s exceeds the stability bound " +
                        std::to_string(limit) + " s");
    dt_ = options_.dt;
  } else {
    if (!(options_.safety > 0.0 && options_.safety <= 1.0)) throw ConfigError("thermal safety must lie in (0, 1]");
    dt_ = options_.safety * limit;
  }
}

TemperatureField PennesModel::initial_field(double blood_temp) const {
  if (blood_temp != blood_ref_) throw ConfigError("blood temperature other than 37 C is not supported");
  TemperatureField f;
  f.t = ScalarGrid(grid_.nx, grid_.ny);
  for (std::size_t k = 0; k < f.t.size(); ++k) f.t[k] = tissue_[k] ? blood_temp : ambient_;
  f.dt_thermal = dt_;
  f.blood_temp = blood_temp;
  f.ambient = ambient_;
  return f;
}

double PennesModel::step(TemperatureField& f, const ScalarGrid& q, double scale,
                         std::optional<std::size_t> monitor) const {
  if (q.size() != f.t.size() || f.t.size() != grid_.cell_count())
    throw DomainError("temperature/heating grids do not match the thermal model");
  ScalarGrid next(grid_.nx, grid_.ny);
  const long mon = monitor ? static_cast<long>(*monitor) : -1;
  const double r = options_.execution == em::Execution::parallel
                       ? kernels::pennes_omp(grid_.nx, grid_.ny, f.t.data(), next.data(), q.data(), scale,
                                             dt_, c_, tissue_.data(), mon)
                       : kernels::pennes_serial(grid_.nx, grid_.ny, f.t.data(), next.data(), q.data(),
                                                scale, dt_, c_, tissue_.data(), mon);
  if (!std::isfinite(r)) throw NumericalInstability(static_cast<std::int64_t>(f.time / dt_), "thermal rate");
  f.t = std::move(next);
  f.time += dt_;
  f.dt_thermal = dt_;
  return r;
}

ScalarGrid PennesModel::steady_state(const ScalarGrid& q, double scale, double blood_temp) const {
  if (q.size() != grid_.cell_count()) throw DomainError("heating grid does not match the thermal model");
  const std::size_t n = grid_.cell_count();
  std::vector<int> id(n, -1);
  int m = 0;
  for (std::size_t k = 0; k < n; ++k)
    if (tissue_[k]) id[k] = m++;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * 5);
  Eigen::VectorXd rhs(m);
  const int nx = grid_.nx;
  for (std::size_t k = 0; k < n; ++k) {
    if (id[k] < 0) continue;
    const int r = id[k];
    double diag = b_[k];
    double b = a0_[k] + scale * q[k] + b_[k] * blood_temp;
    const std::pair<std::size_t, double> nbs[4] = {
        {k + 1, face_e_[k]}, {k - 1, face_e_[k - 1]}, {k + nx, face_n_[k]}, {k - nx, face_n_[k - nx]}};
    for (const auto& [nb, g] : nbs) {
      if (g == 0.0) continue;
      diag += g;
      if (id[nb] >= 0)
        trip.emplace_back(r, id[nb], -g);
      else
        b += g * ambient_;
    }
    trip.emplace_back(r, r, diag);
    rhs[r] = b;
  }
  Eigen::SparseMatrix<double> a(m, m);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success)
    throw NumericalInstability(0, "steady-state system is singular (no perfusion and insulated boundary?)");
  const Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !x.allFinite())
    throw NumericalInstability(0, "steady-state solve failed");
  ScalarGrid t(grid_.nx, grid_.ny);
  for (std::size_t k = 0; k < n; ++k) t[k] = id[k] >= 0 ? x[id[k]] : ambient_;
  return t;
}

std::pair<double, double> PennesModel::energy_balance(const ScalarGrid& t, const ScalarGrid& q, double scale,
                                                      double blood_temp) const {
  const double area = grid_.dx * grid_.dy;
  double source = 0.0, outflow = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!tissue_[k]) continue;
    source += (a0_[k] + scale * q[k] - b_[k] * (t[k] - blood_temp)) * area;
    outflow += boundary_g_[k] * (t[k] - ambient_) * area;
  }
  return {source, outflow};
}

SteadyResult run_to_steady(TemperatureField field, const PennesModel& model, const ScalarGrid& q,
                           const HeatScaling& scaling, const SteadyOptions& o) {
  if (!(o.tol > 0.0)) throw ConfigError("steady-state tolerance must be positive");
  if (!(o.max_time >= 0.0)) throw ConfigError("max_time must be non-negative");
  if (!(scaling.scale >= 0.0)) throw ConfigError("heat scale must be non-negative");
  const GridSpec& g = model.grid();
  std::optional<std::size_t> mon;
  if (o.monitor) {
    if (!g.contains(*o.monitor)) throw GeometryError("steady-state monitor outside the grid");
    mon = g.index(o.monitor->i, o.monitor->j);
  }
  std::optional<std::size_t> rec;
  if (o.record) {
    if (!g.contains(*o.record)) throw GeometryError("recorded cell outside the grid");
    rec = g.index(o.record->i, o.record->j);
  }
  const int every = std::max(1, static_cast<int>(std::lround(o.record_interval / model.dt())));

  SteadyResult r;
  std::int64_t n = 0;
  if (rec) r.history.emplace_back(field.time, field.t[*rec]);
  while (true) {
    TemperatureField next = field;
    const double rate = model.step(next, q, scaling.scale, mon);
    if (rate < o.tol) {
      r.reached = true;
      r.steady_time = field.time;
      break;
    }
    field = std::move(next);
    ++n;
    if (rec && n % every == 0) r.history.emplace_back(field.time, field.t[*rec]);
    if (field.time >= o.max_time) {
      r.steady_time = field.time;
      break;
    }
  }
  if (rec && (r.history.empty() || r.history.back().first != field.time))
    r.history.emplace_back(field.time, field.t[*rec]);
  r.field = std::move(field);
  return r;
}

HeatScaling calibrate_scale(const PennesModel& model, const ScalarGrid& q, double target_temp,
                            Cell target_cell, const CalibrationOptions& o) {
  const GridSpec& g = model.grid();
  if (!g.contains(target_cell) || !model.tissue().at(target_cell))
    throw CalibrationError("calibration target is not a tissue cell");
  const std::size_t k = g.index(target_cell.i, target_cell.j);
  const ScalarGrid f0 = model.steady_state(q, 0.0);
  const ScalarGrid f1 = model.steady_state(q, 1.0);
  double rise = 0.0;
  for (std::size_t j = 0; j < f0.size(); ++j) rise = std::max(rise, f1[j] - f0[j]);
  const double t0 = f0[k];
  const double slope = f1[k] - t0;
  // Q is in arbitrary drive units, so "negligible" is judged against the largest rise.
  if (!(rise > 0.0) || !(slope > 1e-9 * rise))
    throw CalibrationError("heating potential does not raise the target temperature");
  const double s = (target_temp - t0) / slope;
  if (!(s > 0.0)) throw CalibrationError("target temperature is at or below the unheated steady state");

  HeatScaling out;
  out.target_temp = target_temp;
  out.target_cell = target_cell;
  out.scale = s;
  if (std::abs(model.steady_state(q, s)[k] - target_temp) <= o.tolerance) return out;

  // Secant estimate missed (should not happen for the linear model): bisect.
  double lo = 0.0, hi = std::max(1.0, 2.0 * s);
  while (model.steady_state(q, hi)[k] < target_temp) {
    hi *= 2.0;
    if (hi > 1e30) throw CalibrationError("target temperature unreachable");
  }
  for (int it = 0; it < o.max_bisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double tm = model.steady_state(q, mid)[k];
    if (std::abs(tm - target_temp) <= o.tolerance) {
      out.scale = mid;
      return out;
    }
    (tm < target_temp ? lo : hi) = mid;
  }
  throw CalibrationError("bisection did not converge");
}

std::optional<double> time_to_temperature(const std::vector<std::pair<double, double>>& h, double threshold) {
  if (h.empty()) return std::nullopt;
  if (h.front().second >= threshold) return h.front().first;
  for (std::size_t k = 1; k < h.size(); ++k) {
    const auto [ta, ya] = h[k - 1];
    const auto [tb, yb] = h[k];
    if (yb >= threshold) return ta + (threshold - ya) / (yb - ya) * (tb - ta);
  }
  return std::nullopt;
}

void save_history_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& h) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  os << "time_s,temp_c\n" << std::setprecision(17);
  for (const auto& [t, y] : h) os << t << ',' << y << '\n';
}

MaskGrid threshold_mask(const ScalarGrid& t, double threshold) {
  MaskGrid m(t.nx(), t.ny());
  for (std::size_t k = 0; k < t.size(); ++k) m[k] = t[k] >= threshold ? 1 : 0;
  return m;
}

}  // namespace mwht::thermal
