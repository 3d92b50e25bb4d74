#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "mwht/hfgm.hpp"
#include "mwht/pipeline/config.hpp"
#include "mwht/pipeline/io.hpp"
#include "mwht/pipeline/run.hpp"

using namespace mwht;
using namespace mwht::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "mwht_test_pipeline";
  fs::create_directories(dir);
  return dir;
}

// 18 mm fibroglandular disk on a 121 grid, 8 elements, one null, a two-step schedule.
json small_config() {
  const fs::path sched = scratch() / "sched.json";
  write_text(sched, json({{"name", "tiny"},
                          {"target", {-0.006, 0.0}},
                          {"treatment_radius", 0.004},
                          {"treatment", {{"fractions", {1.0, 0.8}}}},
                          {"surrounding", {{"fractions", {1.0, 0.95}}}}})
                        .dump());
  return {{"phantom", {{"builder", "homogeneous"}, {"radius", 0.018}}},
          {"grid", {{"nx", 121}, {"ny", 121}}},
          {"antennas", {{"count", 8}, {"radius", 0.022}}},
          {"objectives", {{"focus", {{-0.006, 0.0}}}, {"nulls", {{0.008, 0.004}}}}},
          {"modes", {"static", "ideal"}},
          {"schedule", {{"path", sched.string()}}},
          {"thermal", {{"enabled", true}, {"max_time", 20.0}, {"monitor", "target"}, {"tol", 1e-3}}},
          {"treatment_radius", 0.004}};
}

/// One bundle per worker count, shared by the tests below.
const fs::path& bundle(int workers) {
  static std::map<int, fs::path> done;
  auto it = done.find(workers);
  if (it != done.end()) return it->second;
  const fs::path out = scratch() / ("run_w" + std::to_string(workers));
  fs::remove_all(out);
  RunOptions o;
  o.workers = workers;
  run_scenario(parse_config(small_config()), out, o);
  return done.emplace(workers, out).first->second;
}

json read_json(const fs::path& p) { return json::parse(read_text(p)); }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config defaults") {
  const ScenarioConfig c = parse_config(json::object());
  CHECK(c.grid.nx == 400);
  CHECK(c.grid.dx == 0.5e-3);
  CHECK(c.antennas.count == 16);
  CHECK(c.antennas.counts() == std::vector<int>{16});
  CHECK(c.phantom.builder == "homogeneous");
  CHECK(c.phantom.immersion == "water");
  CHECK(c.modes == std::vector<std::string>{"ideal"});
  CHECK(c.objectives.focus.size() == 1);
  CHECK(c.objectives.focus[0].x == -0.03);
  CHECK_FALSE(c.thermal.enabled);
  CHECK(c.thermal.tol == 1e-4);
  CHECK(c.normalization == "baseline");
  CHECK(c.treatment_radius == 0.01);
}

TEST_CASE("config round trips through JSON") {
  const ScenarioConfig c = parse_config(small_config());
  const json j = to_json(c);
  CHECK(to_json(parse_config(j)) == j);
  CHECK(c.antennas.radius == 0.022);
  CHECK(c.objectives.nulls.size() == 1);
  CHECK(c.modes.size() == 2);
}

TEST_CASE("config rejects bad input") {
  CHECK_THROWS_AS(parse_config({{"antenas", {{"count", 8}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"antennas", {{"count", 8}, {"radiu", 0.05}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"antennas", {{"count", "eight"}}}}), ConfigError);
  // 1 focus + 3 null cells = 4 objectives for 4 elements: M must stay below N.
  CHECK_THROWS_AS(parse_config({{"antennas", {{"count", 4}}},
                                {"objectives", {{"nulls", {{0.03, 0.0}}}, {"nulls_per_hotspot", 3}}}}),
                  ConfigError);
  CHECK_NOTHROW(parse_config({{"antennas", {{"count", 5}}},
                              {"objectives", {{"nulls", {{0.03, 0.0}}}, {"nulls_per_hotspot", 3}}}}));
  CHECK_THROWS_AS(parse_config({{"antennas", {{"sweep", {16, 3}}}},
                                {"objectives", {{"nulls", {{0.03, 0.0}}}, {"nulls_per_hotspot", 3}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config({{"modes", {"oracle"}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"modes", json::array()}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"schedule", {{"builtin", "a"}, {"path", "x.json"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"thermal", {{"monitor", "peak"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"normalization", "max"}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"grid", {{"courant", 0.8}}}}), DomainError);
}

TEST_CASE("relative paths resolve against the config file") {
  const fs::path dir = scratch() / "cfgdir";
  fs::create_directories(dir / "sub");
  write_text(dir / "sub" / "s.json", phantoms::to_json(phantoms::builtin_schedule("a7")).dump());
  write_text(dir / "c.json", json({{"schedule", {{"path", "sub/s.json"}}}}).dump());
  const ScenarioConfig c = load_config(dir / "c.json");
  CHECK(fs::equivalent(c.schedule.path, dir / "sub" / "s.json"));
  const auto s = config_schedule(c);
  REQUIRE(s.has_value());
  CHECK(s->steps() == 8);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);
  write_text(dir / "broken.json", "{ \"grid\": ");
  CHECK_THROWS_AS(load_config(dir / "broken.json"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  const fs::path dir = fs::path(MWHT_SOURCE_DIR) / "configs";
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(e.path()));
    ++n;
  }
  CHECK(n >= 8);
}

TEST_CASE("scenario bundle layout and manifest") {
  const fs::path& out = bundle(1);
  for (const char* f : {"config.json", "phantom.hfgm", "phantom_eps.ppm", "summary.json", "manifest.json",
                        "timings.json", "media/step_00.hfgm", "media/step_01.hfgm", "ideal/step_01/q.hfgm",
                        "ideal/step_01/report.json", "ideal/step_01/weights.csv", "ideal/step_01/channel.csv",
                        "ideal/step_01/temperature.hfgm", "ideal/step_01/history.csv", "static/step_00/q.ppm"})
    CHECK_MESSAGE(fs::exists(out / f), f);
  CHECK_FALSE(fs::exists(out / "error.json"));

  const json summary = read_json(out / "summary.json");
  CHECK(summary["runs"].size() == 4);
  CHECK(summary["steps"] == json({0, 1}));
  CHECK(summary["arrays"]["8"]["nulls"].size() == 1);
  CHECK(summary["config_sha256"] == sha256_hex(read_text(out / "config.json")));

  std::string problem;
  CHECK(verify_manifest(out, &problem));
  const json manifest = read_json(out / "manifest.json");
  CHECK(manifest["version"] == toolkit_version);
  for (const auto& f : manifest["files"]) {
    CHECK(f["path"] != "manifest.json");
    CHECK(f["path"] != "timings.json");
  }
}

TEST_CASE("report values match the stored maps") {
  const fs::path& out = bundle(1);
  const json summary = read_json(out / "summary.json");
  const MediaMap media = hfgm::load_media(out / "phantom.hfgm");
  CHECK(media == build_phantom(parse_config(small_config())));
  for (const auto& r : summary["runs"]) {
    const auto plane = hfgm::load_plane(out / r["dir"].get<std::string>() / "q.hfgm");
    const Cell t{summary["target"][0].get<int>(), summary["target"][1].get<int>()};
    CHECK(plane.values.at(t) == r["report"]["target_cell"].get<double>());
    CHECK(r["weights"]["phase_only"] == true);
  }
  // Step 0 is the baseline of its own mode.
  const json& s0 = summary["runs"][0];
  CHECK(s0["step"] == 0);
  CHECK(s0["normalized"]["target_cell"].get<double>() == 1.0);
}

TEST_CASE("static and ideal agree on the unchanged media") {
  const json summary = read_json(bundle(1) / "summary.json");
  std::map<std::string, const json*> by;
  for (const auto& r : summary["runs"]) by[r["dir"].get<std::string>()] = &r;
  const json& a = *by.at("static/step_00");
  const json& b = *by.at("ideal/step_00");
  CHECK(a["report"]["target_cell"] == b["report"]["target_cell"]);
  CHECK(a["report"]["total_media"] == b["report"]["total_media"]);
}

TEST_CASE("worker count does not change any output") {
  const fs::path& a = bundle(1);
  const fs::path& b = bundle(2);
  CHECK(read_json(a / "manifest.json") == read_json(b / "manifest.json"));
}

TEST_CASE("tampering is detected") {
  const fs::path copy = scratch() / "tampered";
  fs::remove_all(copy);
  fs::copy(bundle(1), copy, fs::copy_options::recursive);
  std::string problem;
  REQUIRE(verify_manifest(copy, &problem));
  {
    std::fstream f(copy / "ideal" / "step_01" / "q.hfgm", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(100);
    f.put('\x7f');
  }
  CHECK_FALSE(verify_manifest(copy, &problem));
  CHECK(problem.find("q.hfgm") != std::string::npos);
  fs::remove(copy / "ideal" / "step_01" / "weights.csv");
  CHECK_FALSE(verify_manifest(copy, &problem));
}

TEST_CASE("comparing a bundle with itself") {
  const json c = compare_runs(bundle(1), bundle(2));
  REQUIRE(c["pairs"].size() == 4);
  for (const auto& p : c["pairs"]) {
    CHECK(p["total_ratio"] == 1.0);
    CHECK(p["treatment_ratio"] == 1.0);
    CHECK(p["target_ratio"] == 1.0);
    CHECK(p["focus_error_diff"] == 0.0);
    CHECK(p["contour_overlap"] == 1.0);
  }
}

TEST_CASE("comparing mismatched bundles fails") {
  const fs::path copy = scratch() / "regridded";
  fs::remove_all(copy);
  fs::copy(bundle(1), copy, fs::copy_options::recursive);
  json s = read_json(copy / "summary.json");
  s["grid"]["nx"] = 131;
  write_text(copy / "summary.json", s.dump());
  CHECK_THROWS_AS(compare_runs(bundle(1), copy), ComparisonError);

  s = read_json(bundle(1) / "summary.json");
  s["runs"].erase(s["runs"].size() - 1);
  write_text(copy / "summary.json", s.dump());
  CHECK_THROWS_AS(compare_runs(bundle(1), copy), ComparisonError);

  s = read_json(bundle(1) / "summary.json");
  s["target"] = {60, 61};
  write_text(copy / "summary.json", s.dump());
  CHECK_THROWS_AS(compare_runs(bundle(1), copy), ComparisonError);
}

TEST_CASE("a failing run leaves error.json and a manifest") {
  json j = small_config();
  j["antennas"]["radius"] = 0.03;  // outside the grid interior
  const fs::path out = scratch() / "failing";
  fs::remove_all(out);
  CHECK_THROWS_AS(run_scenario(parse_config(j), out), Error);
  try {
    run_scenario(parse_config(j), out);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::geometry);
    CHECK(std::string(e.what()).find("antennas") != std::string::npos);
  }
  REQUIRE(fs::exists(out / "error.json"));
  const json e = read_json(out / "error.json");
  CHECK(e["stage"] == "antennas");
  CHECK(e["kind"] == static_cast<int>(ErrorKind::geometry));
  CHECK(verify_manifest(out));
}

TEST_CASE("sha256 of known strings") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // TEST_SUITE
