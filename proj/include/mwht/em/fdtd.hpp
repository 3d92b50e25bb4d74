#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mwht/em/kernels.hpp"
#include "mwht/media_map.hpp"

namespace mwht::em {

enum class Boundary { pml, periodic };
enum class Execution { serial, parallel };

/// Graded absorbing layer in stretched-coordinate (convolutional) form. With alpha_max = 0
/// the stretch is s = 1 + sigma / (j w eps0), i.e. the uniaxial PML tensor.
struct PmlOptions {
  int grading_order = 3;
  /// Multiplies sigma_opt = 0.8 (m + 1) / (eta0 dx sqrt(eps_r)) of the edge medium.
  double sigma_factor = 1.0;
  double alpha_max = 0.0;  ///< S/m, complex-frequency shift at the PML interface
};

struct SolverOptions {
  double frequency = 2.5e9;  ///< dt is reduced so that the carrier period is an integer step count
  Boundary x_boundary = Boundary::pml;
  Boundary y_boundary = Boundary::pml;
  PmlOptions pml;
  Execution execution = Execution::parallel;
  int stability_check_interval = 64;
};

/// Complete TMz state of one simulation run.
struct FieldState {
  ScalarGrid ez, hx, hy;
  ScalarGrid jp;  ///< Debye polarization current, co-located with ez
  std::vector<double> psi_ez_x, psi_ez_y, psi_hy_x, psi_hx_y;  ///< PML auxiliaries (strips)
  std::int64_t n = 0;  ///< completed steps; ez holds E at t = n dt
  double dt = 0.0;
};

/// Soft electric current injected at one cell during a step (A/m^2 at t = (n + 1/2) dt).
struct SourceSample {
  std::size_t index = 0;
  double current = 0.0;
};

/// Time step that honours the Courant factor and divides the carrier period exactly.
struct TimeStep {
  double dt = 0.0;
  int steps_per_period = 0;
};
TimeStep choose_time_step(const GridSpec& grid, double frequency);

/// Precomputed update coefficients for one media map; steps any FieldState built by it.
class FdtdEngine {
public:
  FdtdEngine(const MediaMap& media, SolverOptions options = {});

  const GridSpec& grid() const { return grid_; }
  const SolverOptions& options() const { return options_; }
  double dt() const { return dt_; }
  int steps_per_period() const { return steps_per_period_; }
  double frequency() const { return options_.frequency; }
  std::size_t material_count() const { return table_.size(); }

  FieldState make_state() const;

  /// Advances H then E by one step and injects the soft sources.
  /// Throws NumericalInstability when a non-finite value is detected.
  void step(FieldState& state, std::span<const SourceSample> sources = {}) const;

  /// Discrete electromagnetic energy per unit length (J/m) from the current E and H samples.
  double field_energy(const FieldState& state) const;

  /// Update coefficient cb at one cell (used to scale source currents).
  double cb_at(std::size_t index) const { return table_[material_[index]].cb; }

private:
  struct Axis {
    int n = 0;
    int width = 0;  ///< cells per side covered by the auxiliary strips (0 = periodic)
    // Coefficients at integer positions (E) and half positions (H), indexed by cell.
    std::vector<double> b_int, a_int, b_half, a_half;
    int local(int i) const { return i < width ? i : i - (n - width) + width; }
    bool in_strip(int i) const { return width > 0 && (i < width || i >= n - width); }
  };

  void build_axis(Axis& axis, int n, Boundary boundary, double sigma_max, double alpha_max) const;
  void apply_pml_h(FieldState& s) const;
  void apply_pml_e(FieldState& s) const;
  void check_finite(const FieldState& s) const;
  bool parallel() const { return options_.execution == Execution::parallel; }

  GridSpec grid_;
  SolverOptions options_;
  double dt_ = 0.0;
  int steps_per_period_ = 0;
  double coef_h_ = 0.0;
  double inv_dx_ = 0.0;
  kernels::Layout layout_;
  std::vector<std::uint16_t> material_;
  std::vector<kernels::EMaterial> table_;
  std::vector<double> eps_cell_;  ///< eps0 * eps_inf per cell (energy diagnostics)
  Axis ax_, ay_;
};

/// Coefficients of the ADE update for one Debye medium at time step dt.
kernels::EMaterial debye_update_coefficients(const DebyeParams& p, double dt);

}  // namespace mwht::em
