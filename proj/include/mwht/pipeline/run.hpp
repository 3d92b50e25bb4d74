#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mwht/pipeline/config.hpp"

namespace mwht::pipeline {

inline constexpr const char* toolkit_version = "0.3.0";

struct RunOptions {
  int workers = 1;
  bool quiet = true;
};

/// Runs acquire -> design -> CW -> heating potential -> report (-> thermal) for every
/// configured mode and schedule step and writes the bundle under `out`:
///
///   config.json, phantom.hfgm, phantom_eps.ppm, summary.json, manifest.json, timings.json
///   <mode>/step_NN/{media.hfgm, channel.csv, weights.csv, q.hfgm, q.ppm, report.json, ...}
///
/// manifest.json lists every other file with its SHA-256 (timings.json is excluded so that
/// identical inputs give identical bundles). On a stage failure error.json records the stage
/// and the exception is rethrown.
nlohmann::json run_scenario(const ScenarioConfig& config, const std::filesystem::path& out,
                            const RunOptions& options = {});

/// Rewrites manifest.json for the files present under `dir`.
nlohmann::json write_manifest(const std::filesystem::path& dir, const std::string& config_hash);
/// True when every manifest entry exists and its hash matches.
bool verify_manifest(const std::filesystem::path& dir, std::string* problem = nullptr);

/// Per-step power ratios (b over a), focus error difference and -3 dB contour overlap of two
/// bundles. Throws ComparisonError for mismatched grids or step sets.
nlohmann::json compare_runs(const std::filesystem::path& run_a, const std::filesystem::path& run_b);

}  // namespace mwht::pipeline
