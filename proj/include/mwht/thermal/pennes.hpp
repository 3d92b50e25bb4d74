#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "mwht/em/fdtd.hpp"
#include "mwht/media_map.hpp"

namespace mwht::thermal {

struct TemperatureField {
  ScalarGrid t;  ///< deg C
  double time = 0.0;
  double dt_thermal = 0.0;
  double blood_temp = 37.0;
  double ambient = 15.0;
};

struct HeatScaling {
  double scale = 1.0;
  double target_temp = 45.0;
  Cell target_cell;
  void validate() const;
};

struct ThermalOptions {
  double dt = 0.0;        ///< 0 picks safety x the stability bound
  double safety = 0.9;
  em::Execution execution = em::Execution::parallel;
};

/// Per-cell rate coefficients of the explicit Pennes update on the media grid.
///
///   dT/dt = sum_f c_f (T_f - T) + (A0 + B T_B)/(rho Cp) + s Q/(rho Cp) - B T/(rho Cp)
///
/// Faces between tissue cells use the harmonic-mean conductivity; faces towards immersion
/// cells use the half-cell conduction in series with the convective film H. Immersion cells
/// keep the ambient temperature.
class PennesModel {
public:
  PennesModel(const MediaMap& media, ThermalOptions options = {});

  const GridSpec& grid() const { return grid_; }
  double dt() const { return dt_; }
  /// min over tissue cells of rho Cp / (4 K / dx^2 + B).
  double stability_bound() const { return bound_; }
  double ambient() const { return ambient_; }
  const MaskGrid& tissue() const { return tissue_; }

  TemperatureField initial_field(double blood_temp = 37.0) const;

  /// One explicit step; returns max |dT/dt| over tissue (or at `monitor`) of the input state.
  double step(TemperatureField& f, const ScalarGrid& q, double scale,
              std::optional<std::size_t> monitor = {}) const;

  /// Direct solve of the steady state for heat scale `scale` (symmetric sparse LDL^T).
  ScalarGrid steady_state(const ScalarGrid& q, double scale, double blood_temp = 37.0) const;

  /// Volume integral of A0 + sQ - B (T - T_B) and the convective outflow through the tissue
  /// boundary, both per unit length (W/m).
  std::pair<double, double> energy_balance(const ScalarGrid& t, const ScalarGrid& q, double scale,
                                           double blood_temp = 37.0) const;

  struct Coeffs {
    std::vector<double> ce, cw, cn, cs;  ///< 1/s
    std::vector<double> src;             ///< (A0 + B T_B)/(rho Cp), deg C/s
    std::vector<double> qk;              ///< 1/(rho Cp)
    std::vector<double> bk;              ///< B/(rho Cp)
  };
  const Coeffs& coeffs() const { return c_; }

private:
  GridSpec grid_;
  ThermalOptions options_;
  double dt_ = 0.0;
  double bound_ = 0.0;
  double ambient_ = 0.0;
  MaskGrid tissue_;
  Coeffs c_;
  std::vector<double> rho_cp_, a0_, b_, face_e_, face_n_;  ///< face conductances, W/(m^3 C)
  std::vector<double> boundary_g_;  ///< total conductance towards the bath per cell
  double blood_ref_ = 37.0;
};

namespace kernels {
// T_new = T + dt * rate(T); returns max |rate| over cells with mask != 0 (or the monitor cell).
double pennes_serial(int nx, int ny, const double* t, double* t_new, const double* q, double scale,
                     double dt, const PennesModel::Coeffs& c, const unsigned char* mask, long monitor);
double pennes_omp(int nx, int ny, const double* t, double* t_new, const double* q, double scale,
                  double dt, const PennesModel::Coeffs& c, const unsigned char* mask, long monitor);
}  // namespace kernels

struct SteadyOptions {
  double max_time = 3600.0;  ///< s
  double tol = 1e-4;         ///< deg C / s
  std::optional<Cell> monitor;  ///< steady criterion at one cell instead of the whole tissue
  std::optional<Cell> record;   ///< cell whose history is kept
  double record_interval = 1.0; ///< s between history samples (the step count is rounded)
};

struct SteadyResult {
  TemperatureField field;
  bool reached = false;
  double steady_time = 0.0;
  std::vector<std::pair<double, double>> history;  ///< (time s, temperature C) at `record`
};

SteadyResult run_to_steady(TemperatureField field, const PennesModel& model, const ScalarGrid& q,
                           const HeatScaling& scaling, const SteadyOptions& options = {});

struct CalibrationOptions {
  double tolerance = 0.1;  ///< deg C at the target cell
  int max_bisections = 60;
};

/// Finds the heat scale whose steady state puts `target_cell` at `target_temp`.
/// Two steady solves (scale 0 and 1) give the secant estimate; a third verifies it.
HeatScaling calibrate_scale(const PennesModel& model, const ScalarGrid& q, double target_temp,
                            Cell target_cell, const CalibrationOptions& options = {});

/// First time the series reaches `threshold`, linearly interpolated; none if it never does.
std::optional<double> time_to_temperature(const std::vector<std::pair<double, double>>& history,
                                          double threshold);

/// Writes "time_s,temp_c" lines.
void save_history_csv(const std::filesystem::path& path, const std::vector<std::pair<double, double>>& h);

/// Cells at or above each threshold (deg C), as 0/1 masks.
MaskGrid threshold_mask(const ScalarGrid& t, double threshold);

}  // namespace mwht::thermal
