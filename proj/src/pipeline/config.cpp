#include "mwht/pipeline/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace mwht::pipeline {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
}

Point point(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw ConfigError("points are [x, y] in meters");
  return {v[0], v[1]};
}

json point_json(Point p) { return json::array({p.x, p.y}); }

template <class T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void ScenarioConfig::validate() const {
  grid.validate();
  const auto counts = antennas.counts();
  const int min_count = *std::min_element(counts.begin(), counts.end());
  if (min_count < 2) throw ConfigError("antenna count must be >= 2");
  if (!(antennas.radius > 0.0)) throw ConfigError("antenna radius must be positive");
  if (antennas.reference < 0 || antennas.reference >= min_count)
    throw ConfigError("reference antenna out of range");
  if (objectives.focus.empty()) throw ConfigError("at least one focus is required");
  if (objectives.nulls_per_hotspot < 1 || objectives.null_spacing < 1)
    throw ConfigError("nulls_per_hotspot and null_spacing must be >= 1");
  const std::size_t m = objectives.focus.size() +
                        (objectives.nulls.size() + objectives.auto_null_regions.size()) *
                            static_cast<std::size_t>(objectives.nulls_per_hotspot);
  if (m > static_cast<std::size_t>(min_count - 1))
    throw ConfigError("objective count " + std::to_string(m) + " exceeds antenna count - 1 (" +
                      std::to_string(min_count - 1) + ")");
  for (const auto& p : objectives.focus)
    if (!grid.contains(grid.cell_at(p))) throw ConfigError("focus point outside the grid");
  for (const auto& p : objectives.nulls)
    if (!grid.contains(grid.cell_at(p))) throw ConfigError("null point outside the grid");
  if (modes.empty()) throw ConfigError("at least one beamformer mode is required");
  for (const auto& s : modes) bf::parse_design_mode(s);
  if (phantom.builder != "homogeneous" && phantom.builder != "two_inclusion" &&
      phantom.builder != "scattered" && phantom.builder != "file")
    throw ConfigError("unknown phantom builder '" + phantom.builder + "'");
  if (phantom.builder == "file" && phantom.path.empty()) throw ConfigError("phantom.path is required for builder 'file'");
  if (!schedule.builtin.empty() && !schedule.path.empty())
    throw ConfigError("give either schedule.builtin or schedule.path, not both");
  if (em.settle_periods < 1 || em.observe_periods < 1) throw ConfigError("em periods must be >= 1");
  if (thermal.calibrate_on != "first" && thermal.calibrate_on != "each")
    throw ConfigError("thermal.calibrate_on must be 'first' or 'each'");
  if (thermal.monitor != "field" && thermal.monitor != "target")
    throw ConfigError("thermal.monitor must be 'field' or 'target'");
  if (!(thermal.tol > 0.0) || !(thermal.max_time > 0.0)) throw ConfigError("thermal tol and max_time must be positive");
  if (normalization != "baseline" && normalization != "focus")
    throw ConfigError("normalization must be 'baseline' or 'focus'");
  if (!(treatment_radius > 0.0)) throw ConfigError("treatment_radius must be positive");
}

ScenarioConfig parse_config(const json& j) {
  ScenarioConfig c;
  try {
    only_keys(j, {"phantom", "grid", "antennas", "objectives", "modes", "phase_only", "schedule", "em",
                  "thermal", "normalization", "treatment_radius", "seed"},
              "config");
    if (j.contains("phantom")) {
      const auto& p = j.at("phantom");
      only_keys(p, {"builder", "tissue", "radius", "immersion", "path", "boundary_h"}, "phantom");
      get_if(p, "builder", c.phantom.builder);
      get_if(p, "tissue", c.phantom.tissue);
      get_if(p, "radius", c.phantom.radius);
      get_if(p, "immersion", c.phantom.immersion);
      get_if(p, "path", c.phantom.path);
      if (p.contains("boundary_h")) c.phantom.boundary_h = p.at("boundary_h").get<double>();
    }
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      only_keys(g, {"nx", "ny", "dx", "courant", "pml_thickness"}, "grid");
      get_if(g, "nx", c.grid.nx);
      get_if(g, "ny", c.grid.ny);
      if (g.contains("dx")) c.grid.dx = c.grid.dy = g.at("dx").get<double>();
      get_if(g, "courant", c.grid.courant);
      get_if(g, "pml_thickness", c.grid.pml_thickness);
    }
    if (j.contains("antennas")) {
      const auto& a = j.at("antennas");
      only_keys(a, {"count", "radius", "reference", "sweep"}, "antennas");
      get_if(a, "sweep", c.antennas.sweep);
      get_if(a, "count", c.antennas.count);
      get_if(a, "radius", c.antennas.radius);
      get_if(a, "reference", c.antennas.reference);
    }
    if (j.contains("objectives")) {
      const auto& o = j.at("objectives");
      only_keys(o, {"focus", "nulls", "nulls_per_hotspot", "null_spacing", "auto_null_regions"}, "objectives");
      if (o.contains("focus")) {
        c.objectives.focus.clear();
        for (const auto& p : o.at("focus")) c.objectives.focus.push_back(point(p));
      }
      if (o.contains("nulls"))
        for (const auto& p : o.at("nulls")) c.objectives.nulls.push_back(point(p));
      get_if(o, "nulls_per_hotspot", c.objectives.nulls_per_hotspot);
      get_if(o, "null_spacing", c.objectives.null_spacing);
      if (o.contains("auto_null_regions"))
        for (const auto& r : o.at("auto_null_regions")) {
          only_keys(r, {"center", "radius"}, "auto_null_regions entry");
          c.objectives.auto_null_regions.emplace_back(point(r.at("center")), r.at("radius").get<double>());
        }
    }
    if (j.contains("modes")) {
      const auto& m = j.at("modes");
      c.modes = m.is_string() ? std::vector<std::string>{m.get<std::string>()} : m.get<std::vector<std::string>>();
    }
    get_if(j, "phase_only", c.phase_only);
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      only_keys(s, {"builtin", "path", "steps"}, "schedule");
      get_if(s, "builtin", c.schedule.builtin);
      get_if(s, "path", c.schedule.path);
      get_if(s, "steps", c.schedule.steps);
    }
    if (j.contains("em")) {
      const auto& e = j.at("em");
      only_keys(e, {"settle_periods", "observe_periods", "pulse_bandwidth", "decay_tol", "pml_sigma_factor"}, "em");
      get_if(e, "settle_periods", c.em.settle_periods);
      get_if(e, "observe_periods", c.em.observe_periods);
      get_if(e, "pulse_bandwidth", c.em.pulse_bandwidth);
      get_if(e, "decay_tol", c.em.decay_tol);
      get_if(e, "pml_sigma_factor", c.em.pml_sigma_factor);
    }
    if (j.contains("thermal")) {
      const auto& t = j.at("thermal");
      only_keys(t, {"enabled", "target_temp", "scale", "calibrate_on", "max_time", "tol", "monitor", "thresholds",
                    "record_interval"},
                "thermal");
      get_if(t, "enabled", c.thermal.enabled);
      get_if(t, "target_temp", c.thermal.target_temp);
      if (t.contains("scale") && !t.at("scale").is_null()) c.thermal.scale = t.at("scale").get<double>();
      get_if(t, "calibrate_on", c.thermal.calibrate_on);
      get_if(t, "max_time", c.thermal.max_time);
      get_if(t, "tol", c.thermal.tol);
      get_if(t, "monitor", c.thermal.monitor);
      get_if(t, "thresholds", c.thermal.thresholds);
      get_if(t, "record_interval", c.thermal.record_interval);
    }
    get_if(j, "normalization", c.normalization);
    get_if(j, "treatment_radius", c.treatment_radius);
    get_if(j, "seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  ScenarioConfig c = parse_config(j);
  // Relative file references are taken relative to the config file.
  const auto base = path.parent_path();
  auto fix = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
  };
  fix(c.schedule.path);
  fix(c.phantom.path);
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["phantom"] = {{"builder", c.phantom.builder}, {"tissue", c.phantom.tissue}, {"radius", c.phantom.radius},
                  {"immersion", c.phantom.immersion}, {"path", c.phantom.path}};
  if (c.phantom.boundary_h) j["phantom"]["boundary_h"] = *c.phantom.boundary_h;
  j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"dx", c.grid.dx}, {"courant", c.grid.courant},
               {"pml_thickness", c.grid.pml_thickness}};
  j["antennas"] = {{"count", c.antennas.count}, {"radius", c.antennas.radius}, {"reference", c.antennas.reference},
                    {"sweep", c.antennas.sweep}};
  json focus = json::array(), nulls = json::array(), regions = json::array();
  for (const auto& p : c.objectives.focus) focus.push_back(point_json(p));
  for (const auto& p : c.objectives.nulls) nulls.push_back(point_json(p));
  for (const auto& [p, r] : c.objectives.auto_null_regions) regions.push_back({{"center", point_json(p)}, {"radius", r}});
  j["objectives"] = {{"focus", focus}, {"nulls", nulls}, {"nulls_per_hotspot", c.objectives.nulls_per_hotspot},
                     {"null_spacing", c.objectives.null_spacing}, {"auto_null_regions", regions}};
  j["modes"] = c.modes;
  j["phase_only"] = c.phase_only;
  j["schedule"] = {{"builtin", c.schedule.builtin}, {"path", c.schedule.path}, {"steps", c.schedule.steps}};
  j["em"] = {{"settle_periods", c.em.settle_periods}, {"observe_periods", c.em.observe_periods},
             {"pulse_bandwidth", c.em.pulse_bandwidth}, {"decay_tol", c.em.decay_tol},
             {"pml_sigma_factor", c.em.pml_sigma_factor}};
  j["thermal"] = {{"enabled", c.thermal.enabled}, {"target_temp", c.thermal.target_temp},
                  {"scale", c.thermal.scale ? json(*c.thermal.scale) : json(nullptr)},
                  {"calibrate_on", c.thermal.calibrate_on}, {"max_time", c.thermal.max_time},
                  {"tol", c.thermal.tol}, {"monitor", c.thermal.monitor}, {"thresholds", c.thermal.thresholds},
                  {"record_interval", c.thermal.record_interval}};
  j["normalization"] = c.normalization;
  j["treatment_radius"] = c.treatment_radius;
  j["seed"] = c.seed;
  return j;
}

namespace {

TissueLabel label(const std::string& s) {
  const auto l = parse_tissue_label(s);
  if (!l) throw ConfigError("unknown tissue label '" + s + "'");
  return *l;
}

}  // namespace

MediaMap build_phantom(const ScenarioConfig& c) {
  MediaMap m;
  const TissueLabel imm = label(c.phantom.immersion);
  if (c.phantom.builder == "homogeneous") {
    m = phantoms::build_homogeneous(label(c.phantom.tissue), c.phantom.radius, imm, c.grid);
  } else if (c.phantom.builder == "two_inclusion") {
    m = phantoms::build_two_inclusion(c.grid, imm);
  } else if (c.phantom.builder == "scattered") {
    m = phantoms::generate_scattered_fibroglandular(c.seed, c.grid);
  } else if (c.phantom.builder == "file") {
    m = phantoms::load_realistic(c.phantom.path, c.grid);
  } else {
    throw ConfigError("unknown phantom builder '" + c.phantom.builder + "'");
  }
  if (c.phantom.boundary_h) m.override_boundary_h(*c.phantom.boundary_h);
  return m;
}

std::optional<phantoms::ScenarioSchedule> config_schedule(const ScenarioConfig& c) {
  if (!c.schedule.builtin.empty()) return phantoms::builtin_schedule(c.schedule.builtin);
  if (!c.schedule.path.empty()) return phantoms::load_schedule(c.schedule.path);
  return std::nullopt;
}

}  // namespace mwht::pipeline
