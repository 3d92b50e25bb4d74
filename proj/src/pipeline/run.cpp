#include "mwht/pipeline/run.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "mwht/em/runs.hpp"
#include "mwht/hfgm.hpp"
#include "mwht/metrics/metrics.hpp"
#include "mwht/pipeline/io.hpp"
#include "mwht/thermal/pennes.hpp"

namespace mwht::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double preview_db_range = 30.0;

std::string step_name(int step) {
  char b[16];
  std::snprintf(b, sizeof b, "step_%02d", step);
  return b;
}

json cell_json(Cell c) { return json::array({c.i, c.j}); }

json cells_json(const std::vector<Cell>& cells) {
  json a = json::array();
  for (const auto& c : cells) a.push_back(cell_json(c));
  return a;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json report_json(const metrics::PowerReport& r) {
  return {{"total_media", r.total_media},
          {"treatment_region", r.treatment_region},
          {"target_cell", r.target_cell},
          {"total_ratio", opt_json(r.total_ratio)},
          {"treatment_ratio", opt_json(r.treatment_ratio)},
          {"target_ratio", opt_json(r.target_ratio)}};
}

double to_db(double ratio) { return ratio > 0.0 ? 10.0 * std::log10(ratio) : -std::numeric_limits<double>::infinity(); }

double max_over(const ScalarGrid& v, const MaskGrid& m) {
  double best = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (m[k]) best = std::max(best, v[k]);
  return best;
}

MaskGrid mask_and(const MaskGrid& a, const MaskGrid& b) {
  MaskGrid r(a.nx(), a.ny(), 0);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = (a[k] && b[k]) ? 1 : 0;
  return r;
}

struct Job {
  std::string mode;
  int antennas = 0;
  int step = 0;
  std::string dir;  ///< relative to the bundle root
};

/// Per antenna count: ring, null cells (planned once on the base media) and the static channel.
struct Array {
  std::vector<Cell> antennas;
  std::vector<Cell> nulls;
  std::optional<bf::ChannelMatrix> static_channel;
};

struct Shared {
  const ScenarioConfig& cfg;
  fs::path out;
  MediaMap base;
  std::optional<phantoms::ScenarioSchedule> schedule;
  Cell target;
  std::vector<Cell> focus;
  std::vector<MaskGrid> regions;  ///< auto null regions, tissue cells only
  em::Execution exec = em::Execution::parallel;
  std::map<int, Array> arrays;
  std::map<std::string, metrics::PowerReport> baselines;  ///< key mode/n, step 0
  std::optional<double> first_scale;
  std::mutex mu;
  json timings = json::object();

  Shared(const ScenarioConfig& c, fs::path o) : cfg(c), out(std::move(o)) {}

  bf::DesignOptions design_options() const {
    bf::DesignOptions d;
    d.acquire.reference_antenna = cfg.antennas.reference;
    d.acquire.pulse.pulse.bandwidth = cfg.em.pulse_bandwidth;
    d.acquire.pulse.decay_tol = cfg.em.decay_tol;
    d.acquire.pulse.solver.pml.sigma_factor = cfg.em.pml_sigma_factor;
    d.acquire.pulse.solver.execution = exec;
    d.lcmp.phase_only = cfg.phase_only;
    return d;
  }

  em::CwOptions cw_options() const {
    em::CwOptions o;
    o.settle_periods = cfg.em.settle_periods;
    o.observe_periods = cfg.em.observe_periods;
    o.monitor = target;
    o.solver.pml.sigma_factor = cfg.em.pml_sigma_factor;
    o.solver.execution = exec;
    return o;
  }

  MediaMap media_at(int step) const {
    return schedule ? phantoms::apply_scenario(base, *schedule, step) : base;
  }

  std::vector<Cell> objectives(int n) const {
    auto o = focus;
    const auto& nulls = arrays.at(n).nulls;
    o.insert(o.end(), nulls.begin(), nulls.end());
    return o;
  }
};

/// Tracks the running stage for error reports and its wall time for timings.json.
class StageClock {
public:
  explicit StageClock(std::string* stage) : stage_(stage) {}
  void begin(const std::string& name) {
    end();
    *stage_ = name;
    t0_ = std::chrono::steady_clock::now();
    open_ = true;
  }
  void end() {
    if (!open_) return;
    times_[*stage_] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    open_ = false;
  }
  json times() const { return times_; }

private:
  std::string* stage_;
  std::chrono::steady_clock::time_point t0_;
  bool open_ = false;
  json times_ = json::object();
};

struct Cw {
  ScalarGrid q;
  int settle_periods = 0;
  bool steady = false;
};

Cw drive(const Shared& sh, const MediaMap& media, const bf::BeamformerWeights& w, const std::vector<Cell>& antennas) {
  const auto weights = w.as_vector();
  const auto r = em::run_cw(media, weights, antennas, sh.cw_options());
  return {em::heating_potential(r, media), r.settle_periods_used, r.steady};
}

json weights_json(const bf::BeamformerWeights& w) {
  return {{"phase_only", w.phase_only},
          {"residual_pre", w.residual_pre},
          {"residual_post", w.residual_post},
          {"projection_iterations", w.projection_iterations}};
}

/// Thermal products of one Q map. Writes under `dir` with file prefix `prefix`.
json thermal_run(Shared& sh, const MediaMap& media, const ScalarGrid& q, const fs::path& dir,
                 const std::string& prefix, bool first_job, StageClock& clock) {
  const auto& tc = sh.cfg.thermal;
  const thermal::PennesModel model(media, {0.0, 0.9, sh.exec});

  clock.begin(prefix + "calibrate_scale");
  thermal::HeatScaling scaling{1.0, tc.target_temp, sh.target};
  std::string scale_source;
  if (tc.scale) {
    scaling.scale = *tc.scale;
    scale_source = "fixed";
  } else if (tc.calibrate_on == "each" || first_job) {
    scaling = thermal::calibrate_scale(model, q, tc.target_temp, sh.target);
    scale_source = "calibrated";
    if (first_job && tc.calibrate_on == "first") sh.first_scale = scaling.scale;
  } else {
    scaling.scale = *sh.first_scale;
    scale_source = "first";
  }

  clock.begin(prefix + "steady_state");
  const ScalarGrid steady = model.steady_state(q, scaling.scale);
  hfgm::save_plane(dir / (prefix + "temperature_steady.hfgm"), steady, media.grid(), hfgm::PlaneKind::temperature);

  clock.begin(prefix + "run_to_steady");
  thermal::SteadyOptions so;
  so.max_time = tc.max_time;
  so.tol = tc.tol;
  if (tc.monitor == "target") so.monitor = sh.target;
  so.record = sh.target;
  so.record_interval = tc.record_interval;
  const auto res = thermal::run_to_steady(model.initial_field(), model, q, scaling, so);
  hfgm::save_plane(dir / (prefix + "temperature.hfgm"), res.field.t, media.grid(), hfgm::PlaneKind::temperature);
  save_ppm(dir / (prefix + "temperature.ppm"), res.field.t);
  thermal::save_history_csv(dir / (prefix + "history.csv"), res.history);

  json thresholds = json::array();
  const MaskGrid tissue = media.tissue_mask();
  for (const double th : tc.thresholds) {
    const MaskGrid m = mask_and(thermal::threshold_mask(res.field.t, th), tissue);
    char name[64];
    std::snprintf(name, sizeof name, "%smask_%gC.hfgm", prefix.c_str(), th);
    ScalarGrid plane(m.nx(), m.ny());
    for (std::size_t k = 0; k < m.size(); ++k) plane[k] = m[k];
    hfgm::save_plane(dir / name, plane, media.grid(), hfgm::PlaneKind::mask);
    thresholds.push_back({{"threshold", th},
                          {"cells", metrics::mask_count(m)},
                          {"time_to_reach", opt_json(thermal::time_to_temperature(res.history, th))}});
  }
  json regions = json::array();
  for (const auto& r : sh.regions) regions.push_back({{"peak_steady", max_over(steady, r)}, {"peak", max_over(res.field.t, r)}});

  return {{"scale", scaling.scale},
          {"scale_source", scale_source},
          {"target_steady", steady.at(sh.target)},
          {"peak_steady", max_over(steady, tissue)},
          {"target_final", res.field.t.at(sh.target)},
          {"peak_final", max_over(res.field.t, tissue)},
          {"reached_steady", res.reached},
          {"steady_time", res.reached ? json(res.steady_time) : json(nullptr)},
          {"final_time", res.field.time},
          {"thresholds", thresholds},
          {"regions", regions}};
}

json run_job(Shared& sh, const Job& job, bool first_job, std::string* stage) {
  const auto& cfg = sh.cfg;
  const fs::path dir = sh.out / job.dir;
  fs::create_directories(dir);
  StageClock clock(stage);
  const Array& arr = sh.arrays.at(job.antennas);
  const auto mode = bf::parse_design_mode(job.mode);

  clock.begin("media");
  const MediaMap media = sh.media_at(job.step);
  const MaskGrid tissue = media.tissue_mask();

  clock.begin("acquire");
  const auto objectives = sh.objectives(job.antennas);
  bf::ChannelMatrix channel;
  const auto dopt = sh.design_options();
  switch (mode) {
    case bf::DesignMode::static_baseline:
      channel = *arr.static_channel;
      break;
    case bf::DesignMode::ideal:
      channel = bf::acquire_channel(media, objectives, arr.antennas, dopt.acquire);
      break;
    case bf::DesignMode::partial_knowledge:
      channel = bf::acquire_channel(bf::spatial_average_media(media, tissue), objectives, arr.antennas, dopt.acquire);
      break;
  }
  bf::save_channel_csv(dir / "channel.csv", channel);

  clock.begin("design");
  const int nf = static_cast<int>(sh.focus.size());
  const int nn = static_cast<int>(arr.nulls.size());
  const auto weights = bf::weights_from_channel(channel, bf::ObjectiveVector::focus_then_nulls(nn), dopt.lcmp, mode);
  bf::save_weights_csv(dir / "weights.csv", weights);
  std::optional<bf::BeamformerWeights> single;
  if (nn > 0) {
    bf::ChannelMatrix c1 = channel;
    c1.entries = channel.entries.leftCols(nf);
    c1.objectives.resize(nf);
    single = bf::weights_from_channel(c1, bf::ObjectiveVector{std::vector<double>(nf, 1.0)}, dopt.lcmp, mode);
    bf::save_weights_csv(dir / "single_weights.csv", *single);
  }

  clock.begin("run_cw");
  const Cw cw = drive(sh, media, weights, arr.antennas);
  std::optional<Cw> cw1;
  if (single) cw1 = drive(sh, media, *single, arr.antennas);

  clock.begin("heating_potential");
  hfgm::save_plane(dir / "q.hfgm", cw.q, media.grid(), hfgm::PlaneKind::heating_potential);
  save_ppm(dir / "q.ppm", cw.q, preview_db_range);
  if (cw1) {
    hfgm::save_plane(dir / "single_q.hfgm", cw1->q, media.grid(), hfgm::PlaneKind::heating_potential);
    save_ppm(dir / "single_q.ppm", cw1->q, preview_db_range);
  }

  clock.begin("power_report");
  const std::string key = job.mode + "/" + std::to_string(job.antennas);
  const metrics::PowerReport* base = nullptr;
  {
    std::lock_guard lock(sh.mu);
    if (job.step == 0)
      sh.baselines.emplace(key, metrics::power_report(cw.q, media, sh.target, cfg.treatment_radius));
    auto it = sh.baselines.find(key);
    if (it != sh.baselines.end()) base = &it->second;
  }
  const auto report = metrics::power_report(cw.q, media, sh.target, cfg.treatment_radius, base);

  clock.begin("metrics");
  json r;
  r["mode"] = job.mode;
  r["antennas"] = job.antennas;
  r["step"] = job.step;
  r["dir"] = job.dir;
  r["objectives"] = cells_json(objectives);
  r["weights"] = weights_json(weights);
  r["em"] = {{"settle_periods", cw.settle_periods}, {"steady", cw.steady}};
  r["report"] = report_json(report);
  if (cfg.normalization == "focus" && report.target_cell > 0.0)
    r["normalized"] = {{"total_media", report.total_media / report.target_cell},
                       {"treatment_region", report.treatment_region / report.target_cell},
                       {"target_cell", 1.0}};
  else
    r["normalized"] = {{"total_media", opt_json(report.total_ratio)},
                       {"treatment_region", opt_json(report.treatment_ratio)},
                       {"target_cell", opt_json(report.target_ratio)}};
  const auto fe = metrics::focus_error(cw.q, tissue, sh.target);
  r["focus_error"] = {{"peak", cell_json(fe.peak)}, {"distance_cells", fe.distance_cells}};
  r["contour_3db_cells"] = metrics::mask_count(metrics::contour_mask(cw.q, metrics::ContourLevel::db(-3.0), &tissue));
  if (cw1) {
    const auto rep1 = metrics::power_report(cw1->q, media, sh.target, cfg.treatment_radius);
    r["single"] = {{"weights", weights_json(*single)},
                   {"em", {{"settle_periods", cw1->settle_periods}, {"steady", cw1->steady}}},
                   {"report", report_json(rep1)},
                   {"target_ratio_vs_single", rep1.target_cell > 0.0 ? json(report.target_cell / rep1.target_cell)
                                                                    : json(nullptr)}};
    json nulls = json::array();
    for (const auto& c : arr.nulls)
      nulls.push_back({{"cell", cell_json(c)},
                       {"q", cw.q.at(c)},
                       {"q_single", cw1->q.at(c)},
                       {"change_db", to_db(cw.q.at(c) / cw1->q.at(c))}});
    r["nulls"] = nulls;
  }
  json regions = json::array();
  for (std::size_t k = 0; k < sh.regions.size(); ++k) {
    json e = {{"power", metrics::region_power(cw.q, sh.regions[k], media.grid())},
              {"peak_q", max_over(cw.q, sh.regions[k])}};
    if (cw1) {
      const double p1 = metrics::region_power(cw1->q, sh.regions[k], media.grid());
      e["power_single"] = p1;
      e["power_ratio"] = p1 > 0.0 ? json(e["power"].get<double>() / p1) : json(nullptr);
      e["peak_q_single"] = max_over(cw1->q, sh.regions[k]);
    }
    regions.push_back(e);
  }
  r["regions"] = regions;

  if (cfg.thermal.enabled) {
    r["thermal"] = thermal_run(sh, media, cw.q, dir, "", first_job, clock);
    if (cw1) r["single"]["thermal"] = thermal_run(sh, media, cw1->q, dir, "single_", false, clock);
  }
  clock.end();
  write_text(dir / "report.json", r.dump(2) + "\n");

  std::lock_guard lock(sh.mu);
  sh.timings[job.dir] = clock.times();
  return r;
}

/// Runs jobs on up to `workers` threads. Returns per-job results; the first failure (in job
/// order) is rethrown after all threads finish, with error.json written for it.
void run_jobs(Shared& sh, const std::vector<Job>& jobs, std::vector<json>& results, int workers, bool first_phase) {
  std::vector<std::exception_ptr> errors(jobs.size());
  std::vector<std::string> stages(jobs.size());
  std::atomic<std::size_t> next{0};
  results.assign(jobs.size(), json());
  auto body = [&] {
    for (std::size_t k; (k = next++) < jobs.size();) {
      try {
        results[k] = run_job(sh, jobs[k], first_phase && k == 0, &stages[k]);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (n == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n; ++t) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    if (!errors[k]) continue;
    json e = {{"mode", jobs[k].mode}, {"antennas", jobs[k].antennas}, {"step", jobs[k].step},
              {"dir", jobs[k].dir}, {"stage", stages[k]}};
    try {
      std::rethrow_exception(errors[k]);
    } catch (const Error& ex) {
      e["kind"] = static_cast<int>(ex.kind());
      e["message"] = ex.what();
      write_text(sh.out / "error.json", e.dump(2) + "\n");
      throw Error(ex.kind(), "stage '" + stages[k] + "' of " + jobs[k].dir + ": " + ex.what());
    } catch (const std::exception& ex) {
      e["message"] = ex.what();
      write_text(sh.out / "error.json", e.dump(2) + "\n");
      throw;
    }
  }
}

/// Null cells from the single-objective hotspot of each auto region, plus explicit nulls.
std::vector<Cell> plan_nulls(Shared& sh, const std::vector<Cell>& antennas, std::string* stage) {
  const auto& o = sh.cfg.objectives;
  std::vector<Cell> nulls;
  for (const auto& p : o.nulls) {
    const auto c = bf::null_cluster(sh.base.grid().cell_at(p), o.nulls_per_hotspot, o.null_spacing);
    nulls.insert(nulls.end(), c.begin(), c.end());
  }
  if (sh.regions.empty()) return nulls;
  *stage = "plan_nulls";
  const auto dopt = sh.design_options();
  const auto d = bf::design(bf::DesignMode::ideal, sh.base, sh.base, sh.focus,
                            bf::ObjectiveVector{std::vector<double>(sh.focus.size(), 1.0)}, antennas, dopt);
  const Cw cw = drive(sh, sh.base, d.weights, antennas);
  for (const auto& region : sh.regions) {
    const auto fe = metrics::focus_error(cw.q, region, sh.target);
    const auto c = bf::null_cluster(fe.peak, o.nulls_per_hotspot, o.null_spacing);
    nulls.insert(nulls.end(), c.begin(), c.end());
  }
  return nulls;
}

void write_failure(const fs::path& out, const std::string& stage, const std::exception& ex) {
  json e = {{"stage", stage}, {"message", ex.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&ex)) e["kind"] = static_cast<int>(err->kind());
  write_text(out / "error.json", e.dump(2) + "\n");
}

}  // namespace

json write_manifest(const fs::path& dir, const std::string& config_hash) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).generic_string();
    if (rel == "manifest.json" || rel == "timings.json") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const auto& f : files)
    list.push_back({{"path", f}, {"sha256", sha256_file(dir / f)}, {"bytes", fs::file_size(dir / f)}});
  json m = {{"version", toolkit_version}, {"config_sha256", config_hash}, {"files", list}};
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return m;
}

bool verify_manifest(const fs::path& dir, std::string* problem) {
  auto fail = [&](const std::string& p) {
    if (problem) *problem = p;
    return false;
  };
  json m;
  try {
    m = json::parse(read_text(dir / "manifest.json"));
  } catch (const std::exception& e) {
    return fail(std::string("manifest unreadable: ") + e.what());
  }
  for (const auto& f : m.at("files")) {
    const fs::path p = dir / f.at("path").get<std::string>();
    if (!fs::exists(p)) return fail("missing " + p.string());
    if (fs::file_size(p) != f.at("bytes").get<std::uintmax_t>()) return fail("size mismatch " + p.string());
    if (sha256_file(p) != f.at("sha256").get<std::string>()) return fail("hash mismatch " + p.string());
  }
  return true;
}

json run_scenario(const ScenarioConfig& cfg, const fs::path& out, const RunOptions& options) {
  cfg.validate();
  fs::create_directories(out);
  fs::remove(out / "error.json");
  const auto t0 = std::chrono::steady_clock::now();

  Shared sh(cfg, out);
  sh.exec = options.workers > 1 ? em::Execution::serial : em::Execution::parallel;
  const std::string config_text = to_json(cfg).dump(2) + "\n";
  write_text(out / "config.json", config_text);
  const std::string config_hash = sha256_hex(config_text);

  std::string stage = "build_phantom";
  std::vector<int> steps{0};
  try {
    sh.base = build_phantom(cfg);
    hfgm::save_media(out / "phantom.hfgm", sh.base);
    ScalarGrid eps(sh.base.grid().nx, sh.base.grid().ny);
    for (std::size_t k = 0; k < eps.size(); ++k) eps[k] = sh.base.cells()[k].debye.eps_inf + sh.base.cells()[k].debye.delta_eps;
    save_ppm(out / "phantom_eps.ppm", eps);

    stage = "schedule";
    sh.schedule = config_schedule(cfg);
    if (sh.schedule) {
      if (cfg.schedule.steps.empty()) {
        steps.clear();
        for (int s = 0; s < sh.schedule->steps(); ++s) steps.push_back(s);
      } else {
        steps = cfg.schedule.steps;
        for (const int s : steps)
          if (s < 0 || s >= sh.schedule->steps()) throw ConfigError("schedule step " + std::to_string(s) + " out of range");
        if (std::find(steps.begin(), steps.end(), 0) == steps.end()) steps.insert(steps.begin(), 0);
        std::sort(steps.begin(), steps.end());
        steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
      }
      fs::create_directories(out / "media");
      for (const int s : steps) hfgm::save_media(out / "media" / (step_name(s) + ".hfgm"), sh.media_at(s));
    }

    stage = "objectives";
    const GridSpec& g = sh.base.grid();
    for (const auto& p : cfg.objectives.focus) sh.focus.push_back(g.cell_at(p));
    sh.target = sh.focus.front();
    const MaskGrid tissue = sh.base.tissue_mask();
    for (const auto& [c, rad] : cfg.objectives.auto_null_regions) sh.regions.push_back(mask_and(disk_mask(g, c, rad), tissue));

    for (const int n : cfg.antennas.counts()) {
      stage = "antennas";
      Array a;
      a.antennas = bf::ring_antennas(g, n, cfg.antennas.radius);
      a.nulls = plan_nulls(sh, a.antennas, &stage);
      sh.arrays[n] = std::move(a);
      if (std::find(cfg.modes.begin(), cfg.modes.end(), "static") != cfg.modes.end()) {
        stage = "acquire_static";
        sh.arrays[n].static_channel =
            bf::acquire_channel(sh.base, sh.objectives(n), sh.arrays[n].antennas, sh.design_options().acquire);
      }
    }
  } catch (const std::exception& ex) {
    write_failure(out, stage, ex);
    write_manifest(out, config_hash);
    if (const auto* err = dynamic_cast<const Error*>(&ex))
      throw Error(err->kind(), "stage '" + stage + "': " + ex.what());
    throw;
  }

  // Step 0 runs first: it is the baseline of every later step and, with calibrate_on = first,
  // the first job fixes the heat scale.
  const bool sweep = !cfg.antennas.sweep.empty();
  std::vector<Job> phase0, phase1, phase2;
  for (const int n : cfg.antennas.counts())
    for (const auto& m : cfg.modes)
      for (const int s : steps) {
        Job j{m, n, s, m + (sweep ? "_n" + std::to_string(n) : std::string()) + "/" + step_name(s)};
        if (s == 0 && phase0.empty()) phase0.push_back(j);
        else if (s == 0) phase1.push_back(j);
        else phase2.push_back(j);
      }

  std::vector<json> r0, r1, r2;
  try {
    run_jobs(sh, phase0, r0, 1, true);
    run_jobs(sh, phase1, r1, options.workers, false);
    run_jobs(sh, phase2, r2, options.workers, false);
  } catch (...) {
    write_manifest(out, config_hash);
    write_text(out / "timings.json", sh.timings.dump(2) + "\n");
    throw;
  }

  std::map<std::tuple<std::string, int, int>, json> ordered;
  for (auto* v : {&r0, &r1, &r2})
    for (auto& r : *v) {
      const std::tuple key{r["mode"].get<std::string>(), r["antennas"].get<int>(), r["step"].get<int>()};
      ordered[key] = std::move(r);
    }
  json runs = json::array();
  for (const int n : cfg.antennas.counts())
    for (const auto& m : cfg.modes)
      for (const int s : steps) runs.push_back(ordered.at({m, n, s}));

  json arrays = json::object();
  for (const auto& [n, a] : sh.arrays) arrays[std::to_string(n)] = {{"antennas", cells_json(a.antennas)}, {"nulls", cells_json(a.nulls)}};
  const GridSpec& g = sh.base.grid();
  json summary = {{"version", toolkit_version},
                  {"config_sha256", config_hash},
                  {"grid", {{"nx", g.nx}, {"ny", g.ny}, {"dx", g.dx}, {"dy", g.dy}}},
                  {"target", cell_json(sh.target)},
                  {"treatment_radius", cfg.treatment_radius},
                  {"normalization", cfg.normalization},
                  {"steps", steps},
                  {"arrays", arrays},
                  {"runs", runs}};
  write_text(out / "summary.json", summary.dump(2) + "\n");
  write_manifest(out, config_hash);
  sh.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(out / "timings.json", sh.timings.dump(2) + "\n");
  return summary;
}

namespace {

json load_summary(const fs::path& dir) {
  try {
    return json::parse(read_text(dir / "summary.json"));
  } catch (const json::exception& e) {
    throw ParseError(0, "summary.json in " + dir.string() + ": " + e.what());
  }
}

double ratio_or_null(const json& a, const json& b, const char* key) {
  const double x = a.at(key).get<double>(), y = b.at(key).get<double>();
  return x > 0.0 ? y / x : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

json compare_runs(const fs::path& run_a, const fs::path& run_b) {
  const json a = load_summary(run_a), b = load_summary(run_b);
  if (a.at("grid") != b.at("grid")) throw ComparisonError("bundles use different grids");
  if (a.at("target") != b.at("target")) throw ComparisonError("bundles use different targets");

  // Pair runs by (mode, antennas, step); bundles holding a single mode each pair by (antennas, step).
  auto index = [](const json& s, bool with_mode) {
    std::map<std::string, const json*> m;
    for (const auto& r : s.at("runs")) {
      std::string k = std::to_string(r.at("antennas").get<int>()) + "/" + std::to_string(r.at("step").get<int>());
      if (with_mode) k = r.at("mode").get<std::string>() + "/" + k;
      if (!m.emplace(k, &r).second) throw ComparisonError("ambiguous run key " + k);
    }
    return m;
  };
  std::map<std::string, const json*> ia, ib;
  try {
    ia = index(a, true);
    ib = index(b, true);
  } catch (const ComparisonError&) {
  }
  bool common = false;
  for (const auto& [k, v] : ia) common = common || ib.count(k);
  if (!common) {
    ia = index(a, false);
    ib = index(b, false);
  }
  for (const auto& [k, v] : ia)
    if (!ib.count(k)) throw ComparisonError("run " + k + " has no counterpart in " + run_b.string());
  for (const auto& [k, v] : ib)
    if (!ia.count(k)) throw ComparisonError("run " + k + " has no counterpart in " + run_a.string());

  const MediaMap media = hfgm::load_media(run_a / "phantom.hfgm");
  const MaskGrid tissue = media.tissue_mask();
  json pairs = json::array();
  for (const auto& [k, ra] : ia) {
    const json& rb = *ib.at(k);
    const auto qa = hfgm::load_plane(run_a / ra->at("dir").get<std::string>() / "q.hfgm").values;
    const auto qb = hfgm::load_plane(run_b / rb.at("dir").get<std::string>() / "q.hfgm").values;
    if (qa.nx() != qb.nx() || qa.ny() != qb.ny()) throw ComparisonError("Q maps of " + k + " differ in size");
    const auto ca = metrics::contour_mask(qa, metrics::ContourLevel::db(-3.0), &tissue);
    const auto cb = metrics::contour_mask(qb, metrics::ContourLevel::db(-3.0), &tissue);
    const auto& pa = ra->at("report");
    const auto& pb = rb.at("report");
    const double fa = ra->at("focus_error").at("distance_cells").get<double>();
    const double fb = rb.at("focus_error").at("distance_cells").get<double>();
    pairs.push_back({{"key", k},
                     {"a", ra->at("dir")},
                     {"b", rb.at("dir")},
                     {"total_ratio", ratio_or_null(pa, pb, "total_media")},
                     {"treatment_ratio", ratio_or_null(pa, pb, "treatment_region")},
                     {"target_ratio", ratio_or_null(pa, pb, "target_cell")},
                     {"focus_error_a", fa},
                     {"focus_error_b", fb},
                     {"focus_error_diff", fb - fa},
                     {"contour_overlap", metrics::mask_overlap(ca, cb)}});
  }
  return {{"a", run_a.string()}, {"b", run_b.string()}, {"pairs", pairs}};
}

}  // namespace mwht::pipeline
