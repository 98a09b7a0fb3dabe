#pragma once

#include "nbt/ig_engine.hpp"
#include "nbt/kinematics.hpp"
#include "nbt/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace nbt {

using Json = nlohmann::json;

/// Parses a JSON file; ValidationError names the path on failure.
Json load_json(const std::filesystem::path& path);

/// Applies `a.b.c=value`. The value is parsed as JSON when possible and
/// taken as a string otherwise. Intermediate objects are created.
void apply_override(Json& doc, const std::string& assignment);

/// Loads a scenario file. An optional "defaults" key names a file (relative
/// to the scenario) that the scenario is merged over. The result is fully
/// resolved: relative paths become absolute and overrides are applied.
Json resolve_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

KinematicChain robot_from_json(const Json& j);
KinematicChain load_robot(const std::filesystem::path& path);
Scene scene_from_json(const Json& j);

/// Builds and validates a scenario from a resolved document.
ScenarioConfig scenario_from_json(const Json& resolved);

struct BenchConfig {
  VoxelMap map{0.01};
  CameraModel camera;
  IgConfig ig;
  std::vector<BenchCell> grid;
  int iterations = 100;
};

/// Grid is the product of "n_p" and "s_g"; the map comes from voxelizing
/// the "scene" primitives inside "region".
BenchConfig bench_from_json(const Json& resolved);
Json resolve_bench(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace nbt
