#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "mwht/constants.hpp"
#include "mwht/em/fdtd.hpp"

namespace mwht::em {

/// Gaussian-modulated sinusoid. The -3 dB bandwidth of the envelope spectrum sets sigma.
struct PulseShape {
  double carrier = constants::carrier_frequency;
  double bandwidth = constants::pulse_bandwidth;

  void validate() const;
  double sigma() const;                        ///< envelope standard deviation in seconds
  double delay() const { return 4.0 * sigma(); }  ///< envelope peak time
  double end() const { return 8.0 * sigma(); }    ///< source switched off after this
  double current(double t) const;
};

struct PulseOptions {
  PulseShape pulse;
  /// Hard step limit; 0 picks the pulse length plus 400 carrier periods.
  std::int64_t max_steps = 0;
  /// Stop once the last-period probe maximum falls below decay_tol x overall probe peak.
  double decay_tol = 1e-4;
  /// Probes whose peak is below noise_floor x source-cell peak are flagged.
  double noise_floor = 1e-9;
  SolverOptions solver;
};

/// Time series of ez at probe cells. series[p][k] is sampled at t = (k + 1) dt.
struct ProbeRecording {
  std::vector<Cell> probes;
  std::vector<std::vector<double>> series;
  double dt = 0.0;
  int steps_per_period = 0;
  std::int64_t steps = 0;
  double source_peak = 0.0;
  std::vector<bool> below_noise_floor;
  bool any_below_noise_floor() const;
  bool decayed = false;  ///< stopped by the decay criterion rather than the step limit
};

/// Index of the first sample with |x| >= fraction * max|x|; none for an all-zero series.
std::optional<std::size_t> first_arrival(std::span<const double> series, double fraction);

/// sum_k x[k] exp(-j 2 pi f t_k) dt with t_k = (k + 1) dt, over k >= start.
std::complex<double> single_frequency_dft(std::span<const double> series, double dt, double f,
                                          std::size_t start = 0);

/// Pulsed excitation at `focus`, ez recorded at every probe until the fields decay.
/// Throws GeometryError when the focus or a probe is outside the grid or inside the PML.
ProbeRecording run_pulse(const MediaMap& media, Cell focus, std::span<const Cell> probes,
                         const PulseOptions& options = {});

/// Running per-cell sum of ez^2 over whole carrier periods.
class PeriodAccumulator {
public:
  PeriodAccumulator() = default;
  PeriodAccumulator(std::size_t cells, int steps_per_period, bool parallel = true);

  void add(std::span<const double> ez);
  std::int64_t samples() const { return samples_; }
  int steps_per_period() const { return steps_per_period_; }
  bool whole_periods() const { return samples_ % steps_per_period_ == 0; }
  const std::vector<double>& sum_sq() const { return sum_sq_; }

private:
  std::vector<double> sum_sq_;
  std::int64_t samples_ = 0;
  int steps_per_period_ = 1;
  bool parallel_ = true;
};

struct CwOptions {
  /// Ceiling on the settle phase, in carrier periods (includes the ramp).
  int settle_periods = 40;
  int observe_periods = 1;
  int ramp_periods = 3;
  /// Steady once the per-period rms at the monitor changes by less than this, twice in a row.
  double steady_tol = 5e-3;
  std::optional<Cell> monitor;  ///< defaults to the grid center
  SolverOptions solver;
};

struct CwResult {
  FieldState state;
  PeriodAccumulator accumulator;
  double frequency = 0.0;
  int steps_per_period = 0;
  int settle_periods_used = 0;
  bool steady = false;
  std::vector<double> monitor_rms;  ///< per completed period, settle + observe
};

/// Drives antenna k with ramp(t) |w_k| cos(w t + arg w_k) and accumulates the observe window.
CwResult run_cw(const MediaMap& media, std::span<const std::complex<double>> weights,
                std::span<const Cell> antennas, const CwOptions& options = {});

/// Q = sigma_eff * mean(ez^2) over the accumulated periods (W/m^3).
/// Throws InsufficientDataError when fewer than one whole period was accumulated.
ScalarGrid heating_potential(const PeriodAccumulator& acc, const MediaMap& media, double frequency);
inline ScalarGrid heating_potential(const CwResult& r, const MediaMap& media) {
  return heating_potential(r.accumulator, media, r.frequency);
}

/// Same estimator for one cell's sampled history; uses the last whole periods only.
double heating_potential(std::span<const double> history, double sigma_eff, int steps_per_period);

}  // namespace mwht::em
