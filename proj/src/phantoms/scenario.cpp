#include <cmath>
#include <fstream>

#include "mwht/debye.hpp"
#include "mwht/phantoms/phantoms.hpp"

namespace mwht::phantoms {

namespace {

void check_fractions(const std::vector<double>& f, const std::string& region, int steps) {
  if (f.empty()) return;
  if (static_cast<int>(f.size()) != steps)
    throw ConfigError("region '" + region + "' has " + std::to_string(f.size()) + " fractions, expected " +
                      std::to_string(steps));
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (!(f[k] > 0.0 && f[k] <= 1.0))
      throw ConfigError("region '" + region + "' fraction at step " + std::to_string(k) + " is outside (0, 1]");
    if (k > 0 && f[k] > f[k - 1])
      throw ConfigError("region '" + region + "' fractions increase at step " + std::to_string(k));
  }
}

bool disks_overlap(Point a, double ra, Point b, double rb) {
  return std::hypot(a.x - b.x, a.y - b.y) < ra + rb;
}

double at(const std::vector<double>& f, int step) { return f.empty() ? 1.0 : f[step]; }

std::vector<double> read_fractions(const nlohmann::json& r, int steps, const std::string& region) {
  if (r.contains("fractions")) return r.at("fractions").get<std::vector<double>>();
  if (r.contains("reduction_per_step")) {
    const double d = r.at("reduction_per_step").get<double>();
    if (steps < 1) throw ConfigError("'steps' is required with reduction_per_step");
    std::vector<double> f(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) f[k] = 1.0 - d * k;
    return f;
  }
  throw ConfigError("region '" + region + "' needs 'fractions' or 'reduction_per_step'");
}

Point read_point(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 2) throw ConfigError("points are [x, y] in meters");
  return {v[0], v[1]};
}

}  // namespace

int ScenarioSchedule::steps() const {
  std::size_t n = std::max(treatment.size(), surrounding.size());
  for (const auto& h : hotspots) n = std::max(n, h.fractions.size());
  return static_cast<int>(n);
}

void ScenarioSchedule::validate() const {
  const int n = steps();
  if (n < 1) throw ConfigError("schedule '" + name + "' has no steps");
  if (!(treatment_radius > 0.0)) throw ConfigError("treatment radius must be positive");
  check_fractions(treatment, "treatment", n);
  check_fractions(surrounding, "surrounding", n);
  for (const auto& h : hotspots) {
    if (!(h.radius > 0.0)) throw ConfigError("hotspot '" + h.name + "' radius must be positive");
    check_fractions(h.fractions, h.name, n);
  }
}

MediaMap apply_scenario(const MediaMap& base, const ScenarioSchedule& s, int step) {
  s.validate();
  if (step < 0 || step >= s.steps())
    throw ConfigError("scenario step " + std::to_string(step) + " outside [0, " + std::to_string(s.steps() - 1) + "]");
  for (std::size_t a = 0; a < s.hotspots.size(); ++a) {
    if (disks_overlap(s.hotspots[a].center, s.hotspots[a].radius, s.target, s.treatment_radius))
      throw GeometryError("hotspot '" + s.hotspots[a].name + "' overlaps the treatment region");
    for (std::size_t b = a + 1; b < s.hotspots.size(); ++b)
      if (disks_overlap(s.hotspots[a].center, s.hotspots[a].radius, s.hotspots[b].center, s.hotspots[b].radius))
        throw GeometryError("hotspots '" + s.hotspots[a].name + "' and '" + s.hotspots[b].name + "' overlap");
  }

  MediaMap out = base;
  const GridSpec& g = base.grid();
  const double fs = at(s.surrounding, step), ft = at(s.treatment, step);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (!base.is_tissue(i, j)) continue;
      const Point p = g.center_of({i, j});
      double f = fs;
      for (const auto& h : s.hotspots)
        if (in_disk(p, h.center, h.radius)) f = at(h.fractions, step);
      if (in_disk(p, s.target, s.treatment_radius)) f = ft;
      if (f != 1.0) {
        auto& c = out.cells()(i, j);
        c.debye = scale_debye(c.debye, f);
      }
    }
  return out;
}

ScenarioSchedule parse_schedule(const nlohmann::json& j) {
  try {
    ScenarioSchedule s;
    s.name = j.value("name", std::string("custom"));
    if (j.contains("target")) s.target = read_point(j.at("target"));
    s.treatment_radius = j.value("treatment_radius", 0.01);
    const int steps = j.value("steps", 0);
    if (j.contains("treatment")) s.treatment = read_fractions(j.at("treatment"), steps, "treatment");
    if (j.contains("surrounding")) s.surrounding = read_fractions(j.at("surrounding"), steps, "surrounding");
    if (j.contains("hotspots"))
      for (const auto& h : j.at("hotspots")) {
        Hotspot hs;
        hs.name = h.value("name", "hotspot" + std::to_string(s.hotspots.size()));
        hs.center = read_point(h.at("center"));
        hs.radius = h.value("radius", 0.01);
        hs.fractions = read_fractions(h, steps, hs.name);
        s.hotspots.push_back(std::move(hs));
      }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
}

nlohmann::json to_json(const ScenarioSchedule& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["target"] = {s.target.x, s.target.y};
  j["treatment_radius"] = s.treatment_radius;
  if (!s.treatment.empty()) j["treatment"]["fractions"] = s.treatment;
  if (!s.surrounding.empty()) j["surrounding"]["fractions"] = s.surrounding;
  j["hotspots"] = nlohmann::json::array();
  for (const auto& h : s.hotspots)
    j["hotspots"].push_back(
        {{"name", h.name}, {"center", {h.center.x, h.center.y}}, {"radius", h.radius}, {"fractions", h.fractions}});
  return j;
}

ScenarioSchedule load_schedule(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read schedule " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("schedule " + path.string() + ": " + e.what());
  }
  return parse_schedule(j);
}

ScenarioSchedule builtin_schedule(const std::string& name) {
  const bool short_form = name.size() == 2 && name[1] == '7';
  const int steps = short_form ? 7 : 13;
  const char kind = name.empty() ? '?' : name[0];
  if ((name.size() != 1 && !short_form) || (kind != 'a' && kind != 'b' && kind != 'c'))
    throw ConfigError("unknown built-in schedule '" + name + "' (use a, b, c, a7, b7, c7)");
  nlohmann::json j;
  j["name"] = std::string("scenario-") + name;
  j["steps"] = steps;
  j["target"] = {-0.03, 0.0};
  j["treatment"]["reduction_per_step"] = 0.05;
  if (kind != 'a') j["surrounding"]["reduction_per_step"] = 0.02;
  if (kind == 'c')
    j["hotspots"] = {
        {{"name", "A"}, {"center", {0.015, 0.03}}, {"radius", 0.01}, {"reduction_per_step", 0.01}},
        {{"name", "B"}, {"center", {0.03, -0.015}}, {"radius", 0.01}, {"reduction_per_step", 0.03}},
        {{"name", "C"}, {"center", {-0.01, -0.035}}, {"radius", 0.01}, {"reduction_per_step", 0.04}},
    };
  return parse_schedule(j);
}

}  // namespace mwht::phantoms
