#include "nbt/config.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace nbt;
namespace fs = std::filesystem;

namespace {

const fs::path kConfig = NBT_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nbt_config_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("overrides parse JSON values and fall back to strings") {
  Json doc = Json::object();
  apply_override(doc, "planner.w_i=25");
  apply_override(doc, "ig.mode=sequential");
  apply_override(doc, "start=[1,2]");
  apply_override(doc, "flag=true");
  CHECK(doc["planner"]["w_i"] == 25);
  CHECK(doc["ig"]["mode"] == "sequential");
  CHECK(doc["start"].size() == 2);
  CHECK(doc["flag"] == true);
  CHECK_THROWS_AS(apply_override(doc, "no_equals"), ValidationError);
  CHECK_THROWS_AS(apply_override(doc, "=3"), ValidationError);
  CHECK_THROWS_AS(apply_override(doc, "flag.x=1"), ValidationError);
}

TEST_CASE("defaults chain merges base first") {
  const Json moving = resolve_scenario(kConfig / "scenarios/moving_obstacle.json");
  const Json sweep = resolve_scenario(kConfig / "scenarios/weight_sweep.json");
  CHECK(moving["planner"]["w_i"] == 25.0);
  CHECK(sweep["planner"]["w_i"] == 0.0);
  // Inherited from the bottom of the chain.
  CHECK(moving["occupancy"]["p_hit"] == sweep["occupancy"]["p_hit"]);
  CHECK(moving["scene"]["poi"] == sweep["scene"]["poi"]);
  CHECK(moving["scene"]["scripted"].size() == 1);
  CHECK(fs::path(moving["robot"].get<std::string>()).is_absolute());

  const ScenarioConfig cfg = scenario_from_json(moving);
  CHECK(cfg.planner.w_info == 25.0);
  CHECK(cfg.robot.dof() == 6);
  CHECK(cfg.scene.scripted.size() == 1);
}

TEST_CASE("overrides beat every file in the chain") {
  const Json doc = resolve_scenario(kConfig / "scenarios/moving_obstacle.json", {"planner.w_i=3", "seed=9"});
  CHECK(doc["planner"]["w_i"] == 3);
  CHECK(scenario_from_json(doc).seed == 9);
}

TEST_CASE("missing robot file names the path") {
  const fs::path d = scratch("robot");
  write(d / "s.json", R"({"defaults": ")" + (kConfig / "defaults.json").string() + R"(", "robot": "nowhere.json"})");
  const Json doc = resolve_scenario(d / "s.json");
  const std::string expected = "robot file not found: " + (d / "nowhere.json").string();
  CHECK_THROWS_WITH_AS(scenario_from_json(doc), doctest::Contains(expected.c_str()), ValidationError);
}

TEST_CASE("malformed inputs are validation errors") {
  const fs::path d = scratch("bad");
  write(d / "broken.json", "{\"seed\": ");
  CHECK_THROWS_AS(resolve_scenario(d / "broken.json"), ValidationError);
  CHECK_THROWS_AS(resolve_scenario(d / "absent.json"), ValidationError);
  write(d / "loop.json", R"({"defaults": "loop.json"})");
  CHECK_THROWS_AS(resolve_scenario(d / "loop.json"), ValidationError);

  const Json good = resolve_scenario(kConfig / "scenarios/weight_sweep.json");
  Json bad = good;
  bad["ig"]["mode"] = "sideways";
  CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
  bad = good;
  bad["start"] = Json::array({0.0, 0.0});
  CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
  bad = good;
  bad["duration"] = "long";
  CHECK_THROWS_AS(scenario_from_json(bad), ValidationError);
}

TEST_CASE("bench configs build a voxelized map and the grid product") {
  const BenchConfig b = bench_from_json(resolve_bench(kConfig / "bench/smoke.json"));
  CHECK(b.grid.size() == 1);
  CHECK(b.iterations == 1);
  CHECK(b.map.resolution() == doctest::Approx(0.01));
  CHECK(b.map.observed_count() > 0);
}
