#pragma once

#include "nbt/common.hpp"
#include "nbt/ig_engine.hpp"
#include "nbt/infodist.hpp"
#include "nbt/kinematics.hpp"
#include "nbt/planner.hpp"
#include "nbt/voxelmap.hpp"

#include <filesystem>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace nbt {

struct BoxShape {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};
struct SphereShape {
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
};
/// Infinite plane through `point` with normal `normal`.
struct PlaneShape {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
};
using Shape = std::variant<BoxShape, SphereShape, PlaneShape>;

struct ScenePrimitive {
  std::string name;
  Shape shape;
  bool demonstrator = false;     // removed when capturing the reference map
  bool planner_obstacle = true;  // ignored for planes
};

/// Rigid primitive translated along piecewise-linear keyframes (time s, offset m).
struct ScriptedObstacle {
  std::string name;
  Shape shape;
  std::vector<std::pair<double, Vec3>> keyframes;

  Vec3 offset_at(double t) const;
  Shape shape_at(double t) const;
};

struct Scene {
  std::vector<ScenePrimitive> statics;
  std::vector<ScriptedObstacle> scripted;
  Vec3 poi = Vec3::Zero();
  Aabb roi;

  void validate() const;
  /// All primitives at time t, optionally without demonstrator parts.
  std::vector<Shape> shapes_at(double t, bool include_demonstrator = true) const;
  std::vector<Obstacle> planner_obstacles(double t) const;
};

/// Nearest positive intersection distance along a unit ray, if any.
std::optional<double> intersect(const Shape& shape, const Vec3& origin, const Vec3& dir);
/// Signed distance to the primitive surface (negative inside solids).
double surface_distance(const Shape& shape, const Vec3& p);

struct SimCamera {
  CameraModel model;
  int rows = 48;
  int cols = 64;
  double noise_sigma = 0.0;

  void validate() const;
};

/// One ray per pixel through the frustum; the nearest hit within range
/// becomes a world-frame point. The view roll follows view_basis().
PointCloud render_depth(const std::vector<Shape>& shapes, const CameraPose& pose, const SimCamera& cam,
                        std::mt19937_64* noise_rng = nullptr);
PointCloud render_depth(const Scene& scene, const CameraPose& pose, const SimCamera& cam, double t,
                        std::mt19937_64* noise_rng = nullptr);

/// Marks every voxel of `region` whose center lies inside a solid (or within
/// half a voxel of a plane) as occupied.
VoxelMap voxelize_scene(const Scene& scene, double resolution, const Aabb& region, OccupancyParams params = {});

/// Trapezoidal area under (t, y).
double auc(const std::vector<std::pair<double, double>>& series);

/// 100 * (N_recon - N_ref) / N_ref over occupied voxels in `roi`.
double v_r(const VoxelMap& recon, const VoxelMap& reference, const Aabb& roi);

struct MetricSample {
  double t = 0.0;
  double orientation = 0.0;
  double gain = 0.0;
  double product = 0.0;
  double remaining_ig = 0.0;
  double v_r = 0.0;
  int buffer_size = 0;
};

struct RunMetrics {
  std::vector<MetricSample> series;
  double auc = 0.0;
  double remaining_ig = 0.0;
  double remaining_ig_first_full = std::numeric_limits<double>::quiet_NaN();
  double final_v_r = 0.0;
  double max_v_r = 0.0;
  double travel_time = 0.0;
  bool goal_reached = false;
  int planner_warnings = 0;
  int planner_failures = 0;
  int sensor_frames = 0;
};

struct ScenarioConfig {
  Scene scene;
  KinematicChain robot;
  SimCamera camera;
  double resolution = 0.02;
  OccupancyParams occupancy;
  IgConfig ig;  // poi is taken from the scene
  ExecutionMode ig_mode = ExecutionMode::Parallel;
  int workers = 0;
  std::size_t buffer_size = 10;
  bool normalize_buffer_weights = false;
  IdwParams idw;
  HorizonConfig planner;
  JointVector start, goal;
  std::vector<JointVector> waypoints;
  double duration = 20.0;
  double sensor_rate = 5.0;
  double planner_rate = 10.0;
  double goal_tolerance = 0.01;
  std::uint64_t seed = 1;
  int reference_frames = 3;
  std::optional<JointVector> reference_state;  // stationary capture pose; defaults to start

  void validate() const;
};

struct RunArtifacts {
  RunMetrics metrics;
  VoxelMap map;
  VoxelMap reference;
  std::vector<std::pair<double, JointVector>> executed;  // (t, state before the control)
  std::vector<JointVector> controls;
};

/// Closed loop: render, downsample, integrate, compute the distribution,
/// buffer it, plan, execute. Stops at the goal or after `duration`. When
/// `artifact_dir` is set, plan logs and distributions are written there.
RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::optional<std::filesystem::path>& artifact_dir = {});

void write_metrics_csv(std::ostream& os, const RunMetrics& m);
std::vector<MetricSample> read_metrics_csv(std::istream& is);

}  // namespace nbt
