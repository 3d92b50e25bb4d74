#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwht/media_map.hpp"

namespace mwht::phantoms {

/// Disk of `tissue` (fat or fibroglandular) centered at the origin, rest immersion.
MediaMap build_homogeneous(TissueLabel tissue, double radius = 0.06,
                           TissueLabel immersion = TissueLabel::water, const GridSpec& grid = {});

/// 6 cm fat disk with 2 cm fibroglandular inclusions at (-3 cm, 0) and (3 cm, 0).
MediaMap build_two_inclusion(const GridSpec& grid = {}, TissueLabel immersion = TissueLabel::water);

struct Hotspot {
  std::string name;
  Point center;
  double radius = 0.01;
  std::vector<double> fractions;
};

/// Per-step Debye scaling fractions. Index 0 is the unheated baseline.
struct ScenarioSchedule {
  std::string name;
  Point target{-0.03, 0.0};
  double treatment_radius = 0.01;
  std::vector<double> treatment;    ///< empty = region untouched
  std::vector<double> surrounding;  ///< all tissue outside the other regions
  std::vector<Hotspot> hotspots;

  int steps() const;  ///< number of schedule entries, baseline included
  /// Fractions in (0, 1], equal lengths, non-increasing per region.
  void validate() const;
};

/// Scales the base media region by region: surrounding first, then hotspots, then the
/// treatment disk. Throws GeometryError for overlapping disks.
MediaMap apply_scenario(const MediaMap& base, const ScenarioSchedule& schedule, int step);

/// JSON schedule. Each region gives either "fractions": [...] or "reduction_per_step": r
/// (fraction at step k is 1 - r k, k = 0..steps).
ScenarioSchedule parse_schedule(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioSchedule& s);
ScenarioSchedule load_schedule(const std::filesystem::path& path);

/// Built-in schedules: "a", "b", "c" (13 steps) and "a7", "b7", "c7" (7 steps).
ScenarioSchedule builtin_schedule(const std::string& name);

/// Reads a realistic phantom in the HFGM media format and enforces water immersion.
/// When `expected` is given the grid dimensions must match.
MediaMap load_realistic(const std::filesystem::path& path, const std::optional<GridSpec>& expected = {});

struct ScatteredOptions {
  double semi_x = 0.055;
  double semi_y = 0.050;
  double skin_thickness = 0.002;
  double min_fraction = 0.20;  ///< fibroglandular share of breast cells
  double max_fraction = 0.35;
};

/// Procedural breast slice: perturbed elliptical outline, skin rim, fatty interior with
/// fibroglandular elliptic blobs, water immersion. Deterministic for a given seed.
MediaMap generate_scattered_fibroglandular(std::uint64_t seed, const GridSpec& grid = {},
                                           const ScatteredOptions& options = {});

/// Share of fibroglandular cells among non-immersion cells.
double fibroglandular_fraction(const MediaMap& media);

}  // namespace mwht::phantoms
