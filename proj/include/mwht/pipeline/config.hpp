#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwht/beamformer/beamformer.hpp"
#include "mwht/phantoms/phantoms.hpp"

namespace mwht::pipeline {

/// Resolved experiment description. Every field has a default; `to_json` emits all of them.
struct ScenarioConfig {
  struct Phantom {
    std::string builder = "homogeneous";  ///< homogeneous | two_inclusion | scattered | file
    std::string tissue = "fibroglandular";
    double radius = 0.06;
    std::string immersion = "water";
    std::string path;               ///< HFGM file for builder = file
    std::optional<double> boundary_h;  ///< overrides the immersion default
  } phantom;
  GridSpec grid;
  struct Antennas {
    int count = 16;
    double radius = 0.07;
    int reference = 0;
    /// Element-count sweep; when non-empty each count is run and `count` is ignored.
    std::vector<int> sweep;
    std::vector<int> counts() const { return sweep.empty() ? std::vector<int>{count} : sweep; }
  } antennas;
  struct Objectives {
    std::vector<Point> focus{{-0.03, 0.0}};
    std::vector<Point> nulls;
    /// Each null point expands to this many cells spaced null_spacing cells apart along y.
    int nulls_per_hotspot = 1;
    int null_spacing = 2;
    /// Secondary-region disks; the single-objective hotspot in each gets a null cluster.
    std::vector<std::pair<Point, double>> auto_null_regions;
  } objectives;
  std::vector<std::string> modes{"ideal"};
  bool phase_only = true;
  struct Schedule {
    std::string builtin;  ///< a | b | c | a7 | b7 | c7, or empty
    std::string path;     ///< JSON schedule file, or empty
    std::vector<int> steps;  ///< subset to run; empty = all
  } schedule;
  struct Em {
    int settle_periods = 40;
    int observe_periods = 1;
    double pulse_bandwidth = 750e6;
    double decay_tol = 1e-4;
    double pml_sigma_factor = 1.0;
  } em;
  struct Thermal {
    bool enabled = false;
    double target_temp = 45.0;
    std::optional<double> scale;  ///< fixed heat scale; otherwise calibrated
    std::string calibrate_on = "first";  ///< first (step 0 of the first mode) | each
    double max_time = 1200.0;
    double tol = 1e-4;
    std::string monitor = "field";  ///< field | target
    std::vector<double> thresholds{37.0, 40.0, 42.0, 45.0};
    double record_interval = 5.0;
  } thermal;
  std::string normalization = "baseline";  ///< baseline | focus
  double treatment_radius = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& c);

/// Builds the phantom described by the config (seeded for the scattered generator).
MediaMap build_phantom(const ScenarioConfig& c);
/// Schedule from the config, or none.
std::optional<phantoms::ScenarioSchedule> config_schedule(const ScenarioConfig& c);

}  // namespace mwht::pipeline
