// mwht: config-driven runner for the hyperthermia planning toolkit.
//
//   mwht run-scenario --config configs/scenario_b.json --out runs/b --workers 2
//   mwht compare runs/b_static runs/b_ideal
//
// Exit codes: 0 ok, 2 config/geometry/comparison error, 3 numerical error, 4 I/O or parse error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mwht/beamformer/beamformer.hpp"
#include "mwht/em/runs.hpp"
#include "mwht/hfgm.hpp"
#include "mwht/metrics/metrics.hpp"
#include "mwht/pipeline/config.hpp"
#include "mwht/pipeline/io.hpp"
#include "mwht/pipeline/run.hpp"
#include "mwht/thermal/pennes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mwht;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::config:
    case ErrorKind::domain:
    case ErrorKind::geometry:
    case ErrorKind::comparison:
      return 2;
    case ErrorKind::numerical:
    case ErrorKind::acquisition:
    case ErrorKind::degenerate_channel:
    case ErrorKind::ill_conditioned:
    case ErrorKind::calibration:
    case ErrorKind::insufficient_data:
      return 3;
    case ErrorKind::io:
    case ErrorKind::parse:
      return 4;
  }
  return 1;
}

struct Common {
  std::string config;
  std::string out;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  bool print_config = false;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "scenario config (JSON); defaults apply when omitted");
  sub->add_option("--out", c.out, "output path (not needed with --print-effective-config)");
  sub->add_option("--workers", c.workers, "concurrent scenario steps")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "overrides the config seed");
  sub->add_flag("--print-effective-config", c.print_config, "print the resolved config and exit");
}

pipeline::ScenarioConfig resolve(const Common& c) {
  pipeline::ScenarioConfig cfg = c.config.empty() ? pipeline::ScenarioConfig{} : pipeline::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

/// True when the caller only wanted the effective config. Otherwise --out must be set.
bool maybe_print(const Common& c, const pipeline::ScenarioConfig& cfg) {
  if (!c.print_config) {
    if (c.out.empty()) throw ConfigError("--out is required");
    return false;
  }
  std::cout << pipeline::to_json(cfg).dump(2) << "\n";
  return true;
}

MediaMap media_for(const pipeline::ScenarioConfig& cfg, const std::string& media_path) {
  return media_path.empty() ? pipeline::build_phantom(cfg) : hfgm::load_media(media_path);
}

std::vector<Cell> objective_cells(const pipeline::ScenarioConfig& cfg, const GridSpec& g) {
  std::vector<Cell> o;
  for (const auto& p : cfg.objectives.focus) o.push_back(g.cell_at(p));
  for (const auto& p : cfg.objectives.nulls)
    for (const auto& c : bf::null_cluster(g.cell_at(p), cfg.objectives.nulls_per_hotspot, cfg.objectives.null_spacing))
      o.push_back(c);
  return o;
}

bf::DesignOptions design_options(const pipeline::ScenarioConfig& cfg) {
  bf::DesignOptions d;
  d.acquire.reference_antenna = cfg.antennas.reference;
  d.acquire.pulse.pulse.bandwidth = cfg.em.pulse_bandwidth;
  d.acquire.pulse.decay_tol = cfg.em.decay_tol;
  d.acquire.pulse.solver.pml.sigma_factor = cfg.em.pml_sigma_factor;
  d.lcmp.phase_only = cfg.phase_only;
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microwave hyperthermia planning: FDTD focusing, LCMP nulls, Pennes heating"};
  app.require_subcommand(1);
  Common c;

  std::string media_path, channel_path, weights_path, q_path, mode = "ideal";
  std::string run_a, run_b, input;
  double db_range = 0.0;

  auto* build = app.add_subcommand("build-phantom", "write the configured phantom as HFGM plus a PPM preview");
  add_common(build, c);

  auto* acquire = app.add_subcommand("acquire", "time-reversal channel acquisition to channel.csv");
  add_common(acquire, c);
  acquire->add_option("--media", media_path, "HFGM media instead of the configured phantom");

  auto* design = app.add_subcommand("design", "beamformer weights (conjugate or LCMP) to weights.csv");
  add_common(design, c);
  design->add_option("--channel", channel_path, "channel CSV; acquired from the media when omitted");
  design->add_option("--media", media_path, "HFGM media instead of the configured phantom");
  design->add_option("--mode", mode, "static | ideal | partial-knowledge");

  auto* em_cmd = app.add_subcommand("simulate-em", "CW drive with given weights; writes Q map and report");
  add_common(em_cmd, c);
  em_cmd->add_option("--weights", weights_path, "weights CSV")->required();
  em_cmd->add_option("--media", media_path, "HFGM media instead of the configured phantom");

  auto* th_cmd = app.add_subcommand("simulate-thermal", "Pennes run for a Q map; writes temperature products");
  add_common(th_cmd, c);
  th_cmd->add_option("--q", q_path, "heating potential HFGM plane")->required();
  th_cmd->add_option("--media", media_path, "HFGM media instead of the configured phantom");

  auto* run = app.add_subcommand("run-scenario", "full pipeline over modes and schedule steps");
  add_common(run, c);

  auto* cmp = app.add_subcommand("compare", "power ratios, focus error and contour overlap of two bundles");
  cmp->add_option("run_a", run_a)->required();
  cmp->add_option("run_b", run_b)->required();
  cmp->add_option("--out", c.out, "write the report here instead of stdout");

  auto* exp = app.add_subcommand("export", "convert an HFGM plane or media file to PPM or CSV");
  exp->add_option("input", input)->required();
  exp->add_option("--out", c.out, "*.ppm or *.csv")->required();
  exp->add_option("--db-range", db_range, "log color scale over this many dB (PPM only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors count as configuration errors; --help exits 0.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*build) {
      const auto cfg = resolve(c);
      if (maybe_print(c, cfg)) return 0;
      const auto media = pipeline::build_phantom(cfg);
      hfgm::save_media(c.out, media);
      ScalarGrid eps(media.grid().nx, media.grid().ny);
      for (std::size_t k = 0; k < eps.size(); ++k) eps[k] = media.cells()[k].debye.eps_inf + media.cells()[k].debye.delta_eps;
      pipeline::save_ppm(fs::path(c.out).replace_extension(".ppm"), eps);
      std::printf("%s: %d x %d, %zu tissue cells\n", c.out.c_str(), media.grid().nx, media.grid().ny,
                  media.tissue_cell_count());
    } else if (*acquire) {
      const auto cfg = resolve(c);
      if (maybe_print(c, cfg)) return 0;
      const auto media = media_for(cfg, media_path);
      const auto antennas = bf::ring_antennas(media.grid(), cfg.antennas.count, cfg.antennas.radius);
      const auto ch = bf::acquire_channel(media, objective_cells(cfg, media.grid()), antennas, design_options(cfg).acquire);
      bf::save_channel_csv(c.out, ch);
      std::printf("%s: %d antennas x %d objectives\n", c.out.c_str(), ch.antennas(), ch.columns());
    } else if (*design) {
      const auto cfg = resolve(c);
      if (maybe_print(c, cfg)) return 0;
      const auto dm = bf::parse_design_mode(mode);
      bf::ChannelMatrix ch;
      if (!channel_path.empty()) {
        std::ifstream in(channel_path);
        if (!in) throw IoError("cannot read " + channel_path);
        ch = bf::read_channel_csv(in);
      } else {
        const auto media = media_for(cfg, media_path);
        const auto antennas = bf::ring_antennas(media.grid(), cfg.antennas.count, cfg.antennas.radius);
        const auto cells = objective_cells(cfg, media.grid());
        const auto g = bf::ObjectiveVector::focus_then_nulls(static_cast<int>(cells.size() - cfg.objectives.focus.size()));
        ch = bf::design(dm, media, media, cells, g, antennas, design_options(cfg)).channel;
      }
      const int nulls = ch.columns() - static_cast<int>(cfg.objectives.focus.size());
      if (nulls < 0) throw ConfigError("channel has fewer columns than focus points");
      const auto w = bf::weights_from_channel(ch, bf::ObjectiveVector::focus_then_nulls(nulls), design_options(cfg).lcmp, dm);
      bf::save_weights_csv(c.out, w);
      std::printf("%s: residual %.3g (pre-projection %.3g)\n", c.out.c_str(), w.residual_post, w.residual_pre);
    } else if (*em_cmd) {
      const auto cfg = resolve(c);
      if (maybe_print(c, cfg)) return 0;
      const auto media = media_for(cfg, media_path);
      const auto antennas = bf::ring_antennas(media.grid(), cfg.antennas.count, cfg.antennas.radius);
      const auto w = bf::load_weights_csv(weights_path);
      if (w.w.size() != static_cast<Eigen::Index>(antennas.size()))
        throw ConfigError("weights have " + std::to_string(w.w.size()) + " entries for " +
                          std::to_string(antennas.size()) + " antennas");
      const Cell target = media.grid().cell_at(cfg.objectives.focus.front());
      em::CwOptions o;
      o.settle_periods = cfg.em.settle_periods;
      o.observe_periods = cfg.em.observe_periods;
      o.monitor = target;
      o.solver.pml.sigma_factor = cfg.em.pml_sigma_factor;
      const auto weights = w.as_vector();
      const auto r = em::run_cw(media, weights, antennas, o);
      const auto q = em::heating_potential(r, media);
      fs::create_directories(c.out);
      hfgm::save_plane(fs::path(c.out) / "q.hfgm", q, media.grid(), hfgm::PlaneKind::heating_potential);
      pipeline::save_ppm(fs::path(c.out) / "q.ppm", q, 30.0);
      const auto rep = metrics::power_report(q, media, target, cfg.treatment_radius);
      const auto fe = metrics::focus_error(q, media.tissue_mask(), target);
      const json j = {{"total_media", rep.total_media}, {"treatment_region", rep.treatment_region},
                      {"target_cell", rep.target_cell}, {"steady", r.steady},
                      {"settle_periods", r.settle_periods_used},
                      {"focus_error", {{"peak", {fe.peak.i, fe.peak.j}}, {"distance_cells", fe.distance_cells}}}};
      pipeline::write_text(fs::path(c.out) / "report.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
    } else if (*th_cmd) {
      const auto cfg = resolve(c);
      if (maybe_print(c, cfg)) return 0;
      const auto media = media_for(cfg, media_path);
      const auto q = hfgm::load_plane(q_path).values;
      if (q.nx() != media.grid().nx || q.ny() != media.grid().ny) throw ConfigError("Q map and media differ in size");
      const Cell target = media.grid().cell_at(cfg.objectives.focus.front());
      const thermal::PennesModel model(media);
      thermal::HeatScaling s{1.0, cfg.thermal.target_temp, target};
      if (cfg.thermal.scale) s.scale = *cfg.thermal.scale;
      else s = thermal::calibrate_scale(model, q, cfg.thermal.target_temp, target);
      thermal::SteadyOptions so;
      so.max_time = cfg.thermal.max_time;
      so.tol = cfg.thermal.tol;
      if (cfg.thermal.monitor == "target") so.monitor = target;
      so.record = target;
      so.record_interval = cfg.thermal.record_interval;
      const auto res = thermal::run_to_steady(model.initial_field(), model, q, s, so);
      fs::create_directories(c.out);
      hfgm::save_plane(fs::path(c.out) / "temperature.hfgm", res.field.t, media.grid(), hfgm::PlaneKind::temperature);
      pipeline::save_ppm(fs::path(c.out) / "temperature.ppm", res.field.t);
      thermal::save_history_csv(fs::path(c.out) / "history.csv", res.history);
      json thresholds = json::object();
      for (const double th : cfg.thermal.thresholds) {
        const auto t = thermal::time_to_temperature(res.history, th);
        thresholds[std::to_string(th)] = t ? json(*t) : json(nullptr);
      }
      const json j = {{"scale", s.scale}, {"reached_steady", res.reached}, {"steady_time", res.steady_time},
                      {"final_time", res.field.time}, {"target_temp", res.field.t.at(target)},
                      {"time_to_threshold", thresholds}};
      pipeline::write_text(fs::path(c.out) / "thermal.json", j.dump(2) + "\n");
      std::cout << j.dump(2) << "\n";
    } else if (*run) {
      const auto cfg = resolve(c);
      if (maybe_print(c, cfg)) return 0;
      const auto summary = pipeline::run_scenario(cfg, c.out, {c.workers});
      for (const auto& r : summary.at("runs")) {
        const auto& rep = r.at("report");
        std::printf("%-40s target %.4g  ratio %s  focus error %.2f cells\n", r.at("dir").get<std::string>().c_str(),
                    rep.at("target_cell").get<double>(), rep.at("target_ratio").dump().c_str(),
                    r.at("focus_error").at("distance_cells").get<double>());
      }
    } else if (*cmp) {
      const auto j = pipeline::compare_runs(run_a, run_b);
      if (c.out.empty()) std::cout << j.dump(2) << "\n";
      else pipeline::write_text(c.out, j.dump(2) + "\n");
    } else if (*exp) {
      ScalarGrid values;
      std::ifstream probe(input, std::ios::binary);
      char magic[4] = {};
      probe.read(magic, 4);
      if (std::equal(magic, magic + 4, hfgm::media_magic)) {
        const auto media = hfgm::load_media(input);
        values = ScalarGrid(media.grid().nx, media.grid().ny);
        for (std::size_t k = 0; k < values.size(); ++k)
          values[k] = media.cells()[k].debye.eps_inf + media.cells()[k].debye.delta_eps;
      } else {
        values = hfgm::load_plane(input).values;
      }
      const auto ext = fs::path(c.out).extension().string();
      if (ext == ".ppm") pipeline::save_ppm(c.out, values, db_range);
      else if (ext == ".csv") hfgm::save_plane_csv(c.out, values);
      else throw ConfigError("export target must end in .ppm or .csv");
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "mwht: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "mwht: %s\n", e.what());
    return 1;
  }
  return 0;
}
