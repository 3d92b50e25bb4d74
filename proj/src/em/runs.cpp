#include "mwht/em/runs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mwht/debye.hpp"

namespace mwht::em {

namespace {

void check_placement(const GridSpec& g, const SolverOptions& o, Cell c, const char* what) {
  const int m = g.pml_thickness + 1;
  const bool x_ok = o.x_boundary == Boundary::periodic ? (c.i >= 0 && c.i < g.nx)
                                                       : (c.i >= m && c.i < g.nx - m);
  const bool y_ok = o.y_boundary == Boundary::periodic ? (c.j >= 0 && c.j < g.ny)
                                                       : (c.j >= m && c.j < g.ny - m);
  if (!x_ok || !y_ok)
    throw GeometryError(std::string(what) + " cell (" + std::to_string(c.i) + ", " +
                        std::to_string(c.j) + ") is outside the grid interior");
}

double raised_cosine(double t, double ramp) {
  if (ramp <= 0.0 || t >= ramp) return 1.0;
  return 0.5 * (1.0 - std::cos(constants::pi * t / ramp));
}

}  // namespace

void PulseShape::validate() const {
  if (!(carrier > 0.0)) throw DomainError("pulse carrier must be positive");
  if (!(bandwidth > 0.0 && bandwidth < 2.0 * carrier))
    throw DomainError("pulse bandwidth must lie in (0, 2 f_c)");
}

double PulseShape::sigma() const {
  // |envelope spectrum| = exp(-(2 pi df sigma)^2 / 2) drops to 1/sqrt(2) at df = bandwidth / 2.
  return std::sqrt(std::log(2.0)) / (constants::pi * bandwidth);
}

double PulseShape::current(double t) const {
  if (t < 0.0 || t > end()) return 0.0;
  const double s = sigma();
  const double u = (t - delay()) / s;
  return std::exp(-0.5 * u * u) * std::sin(2.0 * constants::pi * carrier * (t - delay()));
}

bool ProbeRecording::any_below_noise_floor() const {
  return std::any_of(below_noise_floor.begin(), below_noise_floor.end(), [](bool b) { return b; });
}

std::optional<std::size_t> first_arrival(std::span<const double> series, double fraction) {
  double peak = 0.0;
  for (double v : series) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return std::nullopt;
  const double level = fraction * peak;
  for (std::size_t k = 0; k < series.size(); ++k)
    if (std::abs(series[k]) >= level) return k;
  return std::nullopt;
}

std::complex<double> single_frequency_dft(std::span<const double> series, double dt, double f,
                                          std::size_t start) {
  const double w = 2.0 * constants::pi * f;
  double re = 0.0, im = 0.0;
  for (std::size_t k = start; k < series.size(); ++k) {
    const double ph = w * static_cast<double>(k + 1) * dt;
    re += series[k] * std::cos(ph);
    im -= series[k] * std::sin(ph);
  }
  return {re * dt, im * dt};
}

ProbeRecording run_pulse(const MediaMap& media, Cell focus, std::span<const Cell> probes,
                         const PulseOptions& options) {
  options.pulse.validate();
  const GridSpec& g = media.grid();
  check_placement(g, options.solver, focus, "focus");
  for (const Cell& p : probes) check_placement(g, options.solver, p, "probe");

  SolverOptions so = options.solver;
  so.frequency = options.pulse.carrier;
  FdtdEngine engine(media, so);
  FieldState state = engine.make_state();
  const double dt = engine.dt();
  const int np = engine.steps_per_period();

  ProbeRecording rec;
  rec.probes.assign(probes.begin(), probes.end());
  rec.series.resize(probes.size());
  rec.dt = dt;
  rec.steps_per_period = np;

  const auto pulse_steps = static_cast<std::int64_t>(std::ceil(options.pulse.end() / dt));
  const std::int64_t limit =
      options.max_steps > 0 ? options.max_steps : pulse_steps + 400 * static_cast<std::int64_t>(np);
  for (auto& s : rec.series) s.reserve(static_cast<std::size_t>(std::min<std::int64_t>(limit, 1 << 20)));

  std::vector<std::size_t> probe_index;
  for (const Cell& p : probes) probe_index.push_back(g.index(p.i, p.j));
  const std::size_t focus_index = g.index(focus.i, focus.j);

  SourceSample src{focus_index, 0.0};
  double overall_peak = 0.0, period_peak = 0.0;
  for (std::int64_t n = 0; n < limit; ++n) {
    src.current = options.pulse.current((static_cast<double>(n) + 0.5) * dt);
    engine.step(state, std::span<const SourceSample>(&src, 1));
    rec.source_peak = std::max(rec.source_peak, std::abs(state.ez[focus_index]));
    for (std::size_t p = 0; p < probe_index.size(); ++p) {
      const double v = state.ez[probe_index[p]];
      rec.series[p].push_back(v);
      period_peak = std::max(period_peak, std::abs(v));
    }
    overall_peak = std::max(overall_peak, period_peak);
    if ((n + 1) % np == 0) {
      if (n + 1 > pulse_steps && overall_peak > 0.0 && period_peak < options.decay_tol * overall_peak) {
        rec.steps = n + 1;
        rec.decayed = true;
        break;
      }
      period_peak = 0.0;
    }
    rec.steps = n + 1;
  }

  rec.below_noise_floor.resize(probes.size());
  for (std::size_t p = 0; p < probes.size(); ++p) {
    double peak = 0.0;
    for (double v : rec.series[p]) peak = std::max(peak, std::abs(v));
    rec.below_noise_floor[p] = !(peak > options.noise_floor * rec.source_peak);
  }
  return rec;
}

PeriodAccumulator::PeriodAccumulator(std::size_t cells, int steps_per_period, bool parallel)
    : sum_sq_(cells, 0.0), steps_per_period_(steps_per_period), parallel_(parallel) {
  if (steps_per_period < 1) throw DomainError("steps per period must be positive");
}

void PeriodAccumulator::add(std::span<const double> ez) {
  if (ez.size() != sum_sq_.size()) throw DomainError("accumulator size mismatch");
  if (parallel_)
    kernels::accumulate_square_omp(ez.size(), ez.data(), sum_sq_.data());
  else
    kernels::accumulate_square_serial(ez.size(), ez.data(), sum_sq_.data());
  ++samples_;
}

CwResult run_cw(const MediaMap& media, std::span<const std::complex<double>> weights,
                std::span<const Cell> antennas, const CwOptions& options) {
  if (weights.size() != antennas.size())
    throw ConfigError("run_cw needs one weight per antenna (" + std::to_string(weights.size()) +
                      " weights, " + std::to_string(antennas.size()) + " antennas)");
  if (antennas.empty()) throw ConfigError("run_cw needs at least one antenna");
  if (options.observe_periods < 1) throw ConfigError("observe_periods must be >= 1");
  if (options.settle_periods < 1) throw ConfigError("settle_periods must be >= 1");
  const GridSpec& g = media.grid();
  for (const Cell& a : antennas) check_placement(g, options.solver, a, "antenna");
  const Cell monitor = options.monitor.value_or(Cell{g.nx / 2, g.ny / 2});
  if (!g.contains(monitor)) throw GeometryError("monitor cell outside the grid");

  FdtdEngine engine(media, options.solver);
  CwResult r;
  r.state = engine.make_state();
  r.frequency = engine.frequency();
  r.steps_per_period = engine.steps_per_period();
  const int np = r.steps_per_period;
  const double dt = engine.dt();
  const double w = 2.0 * constants::pi * r.frequency;
  const double ramp = options.ramp_periods / r.frequency;
  const bool par = options.solver.execution == Execution::parallel;
  r.accumulator = PeriodAccumulator(g.cell_count(), np, par);

  std::vector<SourceSample> src(antennas.size());
  for (std::size_t k = 0; k < antennas.size(); ++k) src[k].index = g.index(antennas[k].i, antennas[k].j);
  const std::size_t mon = g.index(monitor.i, monitor.j);

  auto drive = [&](std::int64_t n) {
    const double t = (static_cast<double>(n) + 0.5) * dt;
    const double env = raised_cosine(t, ramp);
    for (std::size_t k = 0; k < src.size(); ++k) {
      const auto& c = weights[k];
      // Re(w e^{jwt}) = Re(w) cos(wt) - Im(w) sin(wt)
      src[k].current = env * (c.real() * std::cos(w * t) - c.imag() * std::sin(w * t));
    }
  };

  std::int64_t n = 0;
  int calm = 0;
  const int min_settle = options.ramp_periods + 2;
  for (int period = 0; period < options.settle_periods; ++period) {
    double ss = 0.0;
    for (int k = 0; k < np; ++k, ++n) {
      drive(n);
      engine.step(r.state, src);
      ss += r.state.ez[mon] * r.state.ez[mon];
    }
    const double rms = std::sqrt(ss / np);
    r.settle_periods_used = period + 1;
    if (!r.monitor_rms.empty() && period >= options.ramp_periods) {
      const double prev = r.monitor_rms.back();
      const double change = prev > 0.0 ? std::abs(rms - prev) / prev : (rms > 0.0 ? 1.0 : 0.0);
      calm = change < options.steady_tol ? calm + 1 : 0;
    }
    r.monitor_rms.push_back(rms);
    if (calm >= 2 && r.settle_periods_used >= min_settle) {
      r.steady = true;
      break;
    }
  }

  for (int period = 0; period < options.observe_periods; ++period) {
    double ss = 0.0;
    for (int k = 0; k < np; ++k, ++n) {
      drive(n);
      engine.step(r.state, src);
      r.accumulator.add(r.state.ez.span());
      ss += r.state.ez[mon] * r.state.ez[mon];
    }
    r.monitor_rms.push_back(std::sqrt(ss / np));
  }
  return r;
}

ScalarGrid heating_potential(const PeriodAccumulator& acc, const MediaMap& media, double frequency) {
  if (acc.samples() < acc.steps_per_period())
    throw InsufficientDataError("heating potential needs at least one full carrier period of samples");
  if (!acc.whole_periods())
    throw InsufficientDataError("heating potential history must span whole carrier periods");
  const GridSpec& g = media.grid();
  if (acc.sum_sq().size() != g.cell_count()) throw DomainError("accumulator does not match media grid");
  ScalarGrid q(g.nx, g.ny);
  const double inv = 1.0 / static_cast<double>(acc.samples());
  const auto& cells = media.cells();
  // sigma_eff is evaluated once per distinct medium.
  std::vector<std::pair<DebyeParams, double>> cache;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const DebyeParams& d = cells[k].debye;
    double s = -1.0;
    for (const auto& [p, v] : cache)
      if (p == d) { s = v; break; }
    if (s < 0.0) {
      s = effective_conductivity(d, frequency);
      if (cache.size() < 64) cache.emplace_back(d, s);
    }
    q[k] = s * acc.sum_sq()[k] * inv;
  }
  return q;
}

double heating_potential(std::span<const double> history, double sigma_eff, int steps_per_period) {
  if (steps_per_period < 1) throw DomainError("steps per period must be positive");
  if (history.size() < static_cast<std::size_t>(steps_per_period))
    throw InsufficientDataError("heating potential needs at least one full carrier period of samples");
  const std::size_t whole = history.size() / steps_per_period * steps_per_period;
  double ss = 0.0;
  for (std::size_t k = history.size() - whole; k < history.size(); ++k) ss += history[k] * history[k];
  return sigma_eff * ss / static_cast<double>(whole);
}

}  // namespace mwht::em
