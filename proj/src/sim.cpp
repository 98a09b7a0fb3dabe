#include "nbt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace nbt {

// Scene --------------------------------------------------------------------

Vec3 ScriptedObstacle::offset_at(double t) const {
  if (keyframes.empty()) return Vec3::Zero();
  if (t <= keyframes.front().first) return keyframes.front().second;
  for (std::size_t i = 1; i < keyframes.size(); ++i) {
    const auto& [t1, p1] = keyframes[i];
    if (t <= t1) {
      const auto& [t0, p0] = keyframes[i - 1];
      const double s = t1 > t0 ? (t - t0) / (t1 - t0) : 1.0;
      return p0 + s * (p1 - p0);
    }
  }
  return keyframes.back().second;
}

Shape ScriptedObstacle::shape_at(double t) const {
  const Vec3 o = offset_at(t);
  return std::visit(
      [&](const auto& s) -> Shape {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) return BoxShape{s.min + o, s.max + o};
        else if constexpr (std::is_same_v<T, SphereShape>) return SphereShape{s.center + o, s.radius};
        else return PlaneShape{s.point + o, s.normal};
      },
      shape);
}

namespace {

void validate_shape(const Shape& shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) {
          if (!s.min.allFinite() || !s.max.allFinite() || (s.min.array() > s.max.array()).any()) {
            throw ValidationError("box primitive must be finite with min <= max");
          }
        } else if constexpr (std::is_same_v<T, SphereShape>) {
          if (!s.center.allFinite() || !(s.radius > 0.0) || !std::isfinite(s.radius)) {
            throw ValidationError("sphere primitive must be finite with a positive radius");
          }
        } else {
          if (!s.point.allFinite() || !s.normal.allFinite() || s.normal.norm() < 1e-12) {
            throw ValidationError("plane primitive needs a finite point and non-zero normal");
          }
        }
      },
      shape);
}

}  // namespace

void Scene::validate() const {
  for (const auto& p : statics) validate_shape(p.shape);
  for (const auto& s : scripted) {
    validate_shape(s.shape);
    if (std::holds_alternative<PlaneShape>(s.shape)) throw ValidationError("scripted obstacles cannot be planes");
    for (std::size_t i = 0; i < s.keyframes.size(); ++i) {
      if (!std::isfinite(s.keyframes[i].first) || !s.keyframes[i].second.allFinite()) {
        throw ValidationError("scripted keyframes must be finite");
      }
      if (i > 0 && s.keyframes[i].first <= s.keyframes[i - 1].first) {
        throw ValidationError("scripted keyframe times must increase");
      }
    }
  }
  if (!poi.allFinite()) throw ValidationError("poi must be finite");
  if (!roi.valid()) throw ValidationError("reconstruction roi must be a finite, ordered box");
}

std::vector<Shape> Scene::shapes_at(double t, bool include_demonstrator) const {
  std::vector<Shape> out;
  out.reserve(statics.size() + scripted.size());
  for (const auto& p : statics) {
    if (!include_demonstrator && p.demonstrator) continue;
    out.push_back(p.shape);
  }
  for (const auto& s : scripted) out.push_back(s.shape_at(t));
  return out;
}

namespace {

std::optional<Obstacle> to_obstacle(const Shape& s) {
  if (const auto* b = std::get_if<BoxShape>(&s)) return BoxObstacle{b->min, b->max};
  if (const auto* sp = std::get_if<SphereShape>(&s)) return SphereObstacle{sp->center, sp->radius};
  return std::nullopt;
}

}  // namespace

std::vector<Obstacle> Scene::planner_obstacles(double t) const {
  std::vector<Obstacle> out;
  for (const auto& p : statics) {
    if (!p.planner_obstacle) continue;
    if (auto o = to_obstacle(p.shape)) out.push_back(*o);
  }
  for (const auto& s : scripted) {
    if (auto o = to_obstacle(s.shape_at(t))) out.push_back(*o);
  }
  return out;
}

// Intersection -------------------------------------------------------------

namespace {

constexpr double kMinHit = 1e-9;

std::optional<double> intersect_box(const BoxShape& b, const Vec3& o, const Vec3& d) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (o[a] < b.min[a] || o[a] > b.max[a]) return std::nullopt;
      continue;
    }
    double ta = (b.min[a] - o[a]) / d[a];
    double tb = (b.max[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  if (t0 > kMinHit) return t0;
  if (t1 > kMinHit) return t1;  // origin inside
  return std::nullopt;
}

std::optional<double> intersect_sphere(const SphereShape& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double t0 = -b - sq;
  if (t0 > kMinHit) return t0;
  const double t1 = -b + sq;
  if (t1 > kMinHit) return t1;
  return std::nullopt;
}

std::optional<double> intersect_plane(const PlaneShape& p, const Vec3& o, const Vec3& d) {
  const Vec3 n = p.normal.normalized();
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-15) return std::nullopt;
  const double t = n.dot(p.point - o) / denom;
  if (t > kMinHit) return t;
  return std::nullopt;
}

}  // namespace

std::optional<double> intersect(const Shape& shape, const Vec3& origin, const Vec3& dir) {
  return std::visit(
      [&](const auto& s) -> std::optional<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) return intersect_box(s, origin, dir);
        else if constexpr (std::is_same_v<T, SphereShape>) return intersect_sphere(s, origin, dir);
        else return intersect_plane(s, origin, dir);
      },
      shape);
}

double surface_distance(const Shape& shape, const Vec3& p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, BoxShape>) return signed_distance(BoxObstacle{s.min, s.max}, p);
        else if constexpr (std::is_same_v<T, SphereShape>) return (p - s.center).norm() - s.radius;
        else return s.normal.normalized().dot(p - s.point);
      },
      shape);
}

// Rendering ----------------------------------------------------------------

void SimCamera::validate() const {
  model.validate();
  if (rows < 2 || cols < 2) throw ValidationError("camera needs at least 2x2 pixels");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ValidationError("noise sigma must be >= 0");
}

PointCloud render_depth(const std::vector<Shape>& shapes, const CameraPose& pose, const SimCamera& cam,
                        std::mt19937_64* noise_rng) {
  PointCloud cloud;
  if (shapes.empty()) return cloud;
  cloud.reserve(static_cast<std::size_t>(cam.rows * cam.cols));
  const ViewBasis basis = view_basis(pose.optical_axis);
  const double th = std::tan(cam.model.fov_h / 2.0);
  const double tv = std::tan(cam.model.fov_v / 2.0);
  std::normal_distribution<double> noise(0.0, cam.noise_sigma > 0.0 ? cam.noise_sigma : 1.0);
  for (int r = 0; r < cam.rows; ++r) {
    const double yn = (2.0 * (r + 0.5) / cam.rows - 1.0) * tv;
    for (int c = 0; c < cam.cols; ++c) {
      const double xn = (2.0 * (c + 0.5) / cam.cols - 1.0) * th;
      const Vec3 dir = (basis.forward + xn * basis.right - yn * basis.up).normalized();
      double best = std::numeric_limits<double>::infinity();
      for (const Shape& s : shapes) {
        if (auto t = intersect(s, pose.position, dir); t && *t < best) best = *t;
      }
      if (!(best <= cam.model.range)) continue;
      double range = best;
      if (cam.noise_sigma > 0.0 && noise_rng != nullptr) range = std::max(0.0, range + noise(*noise_rng));
      cloud.push_back(pose.position + range * dir);
    }
  }
  return cloud;
}

PointCloud render_depth(const Scene& scene, const CameraPose& pose, const SimCamera& cam, double t,
                        std::mt19937_64* noise_rng) {
  return render_depth(scene.shapes_at(t), pose, cam, noise_rng);
}

VoxelMap voxelize_scene(const Scene& scene, double resolution, const Aabb& region, OccupancyParams params) {
  VoxelMap map(resolution, params);
  const std::vector<Shape> shapes = scene.shapes_at(0.0);
  const VoxelKey lo = map.world_to_key(region.min);
  const VoxelKey hi = map.world_to_key(region.max);
  const VoxelCell occupied{map.max_log_odds(), true};
  for (std::int32_t z = lo.iz; z <= hi.iz; ++z) {
    for (std::int32_t y = lo.iy; y <= hi.iy; ++y) {
      for (std::int32_t x = lo.ix; x <= hi.ix; ++x) {
        const VoxelKey k{x, y, z};
        const Vec3 c = map.key_to_center(k);
        if (!region.contains(c)) continue;
        for (const Shape& s : shapes) {
          const double d = surface_distance(s, c);
          const bool plane = std::holds_alternative<PlaneShape>(s);
          if ((plane && std::abs(d) <= 0.5 * resolution) || (!plane && d <= 0.0)) {
            map.set(k, occupied);
            break;
          }
        }
      }
    }
  }
  return map;
}

// Metrics ------------------------------------------------------------------

double auc(const std::vector<std::pair<double, double>>& series) {
  if (series.size() < 2) throw RuntimeError("area under the curve needs at least two samples");
  double area = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double dt = series[i].first - series[i - 1].first;
    if (!(dt > 0.0)) throw ValidationError("sample times must strictly increase");
    area += 0.5 * dt * (series[i].second + series[i - 1].second);
  }
  return area;
}

double v_r(const VoxelMap& recon, const VoxelMap& reference, const Aabb& roi) {
  if (recon.resolution() != reference.resolution()) throw ValidationError("maps must share one resolution");
  const auto n_ref = static_cast<double>(occupied_volume(reference, roi));
  if (n_ref == 0.0) throw RuntimeError("empty reference");
  const auto n_rec = static_cast<double>(occupied_volume(recon, roi));
  return 100.0 * (n_rec - n_ref) / n_ref;
}

void write_metrics_csv(std::ostream& os, const RunMetrics& m) {
  os << "t,O,G,OG,remaining_ig,v_r,buffer\n";
  os << std::setprecision(17);
  for (const MetricSample& s : m.series) {
    os << s.t << ',' << s.orientation << ',' << s.gain << ',' << s.product << ',' << s.remaining_ig << ',' << s.v_r
       << ',' << s.buffer_size << '\n';
  }
}

std::vector<MetricSample> read_metrics_csv(std::istream& is) {
  std::vector<MetricSample> out;
  std::string line;
  if (!std::getline(is, line) || line.rfind("t,O,G,OG", 0) != 0) throw ValidationError("metrics header missing");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    MetricSample s;
    if (!(row >> s.t >> s.orientation >> s.gain >> s.product >> s.remaining_ig >> s.v_r >> s.buffer_size)) {
      throw ValidationError("malformed metrics row on line " + std::to_string(lineno));
    }
    std::string extra;
    if (row >> extra) throw ValidationError("malformed metrics row on line " + std::to_string(lineno));
    out.push_back(s);
  }
  return out;
}

// Scenario -----------------------------------------------------------------

void ScenarioConfig::validate() const {
  scene.validate();
  robot.validate();
  camera.validate();
  occupancy.validate();
  if (!(resolution > 0.0)) throw ValidationError("map resolution must be positive");
  IgConfig ig_check = ig;
  ig_check.poi = scene.poi;
  ig_check.validate();
  if (buffer_size < 1) throw ValidationError("buffer size must be at least 1");
  idw.validate();
  planner.validate(robot.dof());
  const int n = robot.dof();
  if (start.size() != n || goal.size() != n) throw ValidationError("start and goal must have one entry per joint");
  for (const JointVector& w : waypoints) {
    if (w.size() != n) throw ValidationError("reference waypoints must have one entry per joint");
  }
  if (reference_state && reference_state->size() != n) {
    throw ValidationError("reference capture state must have one entry per joint");
  }
  if (!(sensor_rate > 0.0) || !(planner_rate > 0.0)) throw ValidationError("rates must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw ValidationError("duration must be finite and >= 0");
  if (!(goal_tolerance > 0.0)) throw ValidationError("goal tolerance must be positive");
  if (reference_frames < 1) throw ValidationError("reference capture needs at least one frame");
  const JointLimits& l = robot.limits;
  for (int j = 0; j < n; ++j) {
    if (start[j] < l.position_min[j] || start[j] > l.position_max[j]) {
      throw ValidationError("start state lies outside the joint limits");
    }
    if (goal[j] < l.position_min[j] || goal[j] > l.position_max[j]) {
      throw ValidationError("goal state lies outside the joint limits");
    }
  }
}

namespace {

std::uint64_t frame_seed(std::uint64_t seed, std::uint64_t frame) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (frame + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RunArtifacts run_scenario(const ScenarioConfig& cfg, const std::optional<std::filesystem::path>& artifact_dir) {
  cfg.validate();
  const KinematicChain& robot = cfg.robot;
  const double dt_exec = 1.0 / cfg.planner_rate;
  const int sensor_stride = std::max(1, static_cast<int>(std::lround(cfg.planner_rate / cfg.sensor_rate)));

  std::mt19937_64 noise_rng(cfg.seed);

  // Stationary, unoccluded reference capture.
  VoxelMap reference(cfg.resolution, cfg.occupancy);
  {
    const CameraPose ref_pose = forward_kinematics(robot, cfg.reference_state.value_or(cfg.start)).pose;
    const std::vector<Shape> shapes = cfg.scene.shapes_at(0.0, false);
    for (int i = 0; i < cfg.reference_frames; ++i) {
      const PointCloud cloud = render_depth(shapes, ref_pose, cfg.camera, &noise_rng);
      integrate_cloud(reference, ref_pose.position, downsample_cloud(cloud, cfg.resolution));
    }
  }

  RunArtifacts out{RunMetrics{}, VoxelMap(cfg.resolution, cfg.occupancy), std::move(reference), {}, {}};
  RunMetrics& m = out.metrics;
  VoxelMap& map = out.map;
  DistributionBuffer buffer(cfg.buffer_size, cfg.normalize_buffer_weights);

  std::ofstream plan_log;
  if (artifact_dir) {
    std::filesystem::create_directories(*artifact_dir / "id");
    plan_log.open(*artifact_dir / "plan_log.csv");
    if (!plan_log) throw RuntimeError("cannot write plan log in " + artifact_dir->string());
    write_plan_log_header(plan_log, robot.dof());
  }

  const double theta_cut = cfg.planner.theta_cut.value_or(default_theta_cut(cfg.camera.model));
  JointVector x = cfg.start;
  JointVector last_u = JointVector::Zero(robot.dof());
  std::optional<HorizonPlan> previous;
  double current_v_r = 0.0;
  const long max_cycles = static_cast<long>(std::floor(cfg.duration / dt_exec + 1e-9));

  for (long cycle = 0; cycle <= max_cycles; ++cycle) {
    const double t = static_cast<double>(cycle) * dt_exec;
    const FkResult fk = forward_kinematics(robot, x);

    if (cycle % sensor_stride == 0) {
      const PointCloud cloud = render_depth(cfg.scene, fk.pose, cfg.camera, t, &noise_rng);
      integrate_cloud(map, fk.pose.position, downsample_cloud(cloud, cfg.resolution));
      IgConfig ig = cfg.ig;
      ig.poi = cfg.scene.poi;
      ig.seed = frame_seed(cfg.seed, static_cast<std::uint64_t>(m.sensor_frames));
      InfoDistribution dist = compute_distribution(map, ig, cfg.camera.model, cfg.ig_mode, cfg.workers);
      if (artifact_dir) {
        std::ostringstream name;
        name << "ig_" << std::setw(5) << std::setfill('0') << m.sensor_frames << ".txt";
        std::ofstream f(*artifact_dir / "id" / name.str());
        write_distribution(f, dist);
      }
      buffer.push(std::move(dist));
      ++m.sensor_frames;
      current_v_r = v_r(map, out.reference, cfg.scene.roi);
    }

    MetricSample s;
    s.t = t;
    s.orientation = orientation_factor(fk.pose, cfg.scene.poi, theta_cut);
    s.gain = gain_at(buffer, fk.pose.position, cfg.idw);
    s.product = s.orientation * s.gain;
    s.remaining_ig = remaining_ig(buffer);
    s.v_r = current_v_r;
    s.buffer_size = static_cast<int>(buffer.size());
    m.series.push_back(s);
    if (buffer.full() && std::isnan(m.remaining_ig_first_full)) m.remaining_ig_first_full = s.remaining_ig;

    if ((x - cfg.goal).lpNorm<Eigen::Infinity>() < cfg.goal_tolerance) {
      m.goal_reached = true;
      break;
    }
    if (cycle == max_cycles) break;

    PlannerContext ctx;
    ctx.chain = &robot;
    ctx.obstacles = cfg.scene.planner_obstacles(t);
    ctx.poi = cfg.scene.poi;
    ctx.camera = cfg.camera.model;
    ctx.buffer = &buffer;
    ctx.idw = cfg.idw;
    ctx.goal = cfg.goal;
    ctx.waypoints = cfg.waypoints;
    ctx.time = t;
    ctx.last_control = last_u;

    JointVector u = JointVector::Zero(robot.dof());
    try {
      RecedingStep step = receding_horizon_step(x, ctx, cfg.planner, previous ? &*previous : nullptr);
      if (step.plan.warning) ++m.planner_warnings;
      u = step.control;
      if (plan_log.is_open()) write_plan_log(plan_log, t, step.plan, cfg.planner.dt);
      previous = std::move(step.plan);
    } catch (const RuntimeError&) {
      ++m.planner_failures;
      previous.reset();
    }

    out.executed.emplace_back(t, x);
    out.controls.push_back(u);
    x = x + u * dt_exec;
    last_u = u;
  }

  if (m.series.size() < 2) throw RuntimeError("empty metrics: the run produced fewer than two samples");
  std::vector<std::pair<double, double>> og;
  og.reserve(m.series.size());
  m.max_v_r = -std::numeric_limits<double>::infinity();
  for (const MetricSample& s : m.series) {
    og.emplace_back(s.t, s.product);
    m.max_v_r = std::max(m.max_v_r, s.v_r);
  }
  m.auc = auc(og);
  m.remaining_ig = m.series.back().remaining_ig;
  m.final_v_r = m.series.back().v_r;
  m.travel_time = m.series.back().t;
  return out;
}

}  // namespace nbt
