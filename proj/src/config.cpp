#include "nbt/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace nbt {

namespace fs = std::filesystem;

Json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ValidationError("cannot parse " + path.string() + ": " + e.what());
  }
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ValidationError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("empty path component in override: " + key);
    if (!node->is_object()) throw ValidationError("override path crosses a non-object value: " + key);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = Json::object();
    start = dot + 1;
  }
}

namespace {

fs::path resolve_relative(const fs::path& base_dir, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = base_dir / path;
  return path.lexically_normal();
}

// Paths inside a file are relative to that file; "defaults" chains are
// merged base-first.
Json load_layered(const fs::path& path, int depth) {
  if (depth > 16) throw ValidationError("defaults chain too deep at " + path.string());
  const fs::path abs = fs::absolute(path).lexically_normal();
  Json doc = load_json(abs);
  if (!doc.is_object()) throw ValidationError(path.string() + " must contain a JSON object");
  const fs::path dir = abs.parent_path();
  if (doc.contains("robot") && doc["robot"].is_string()) {
    doc["robot"] = resolve_relative(dir, doc["robot"].get<std::string>()).string();
  }
  if (doc.contains("defaults")) {
    if (!doc.at("defaults").is_string()) throw ValidationError("'defaults' must be a file path");
    Json merged = load_layered(resolve_relative(dir, doc.at("defaults").get<std::string>()), depth + 1);
    doc.erase("defaults");
    merged.merge_patch(doc);
    doc = std::move(merged);
  }
  return doc;
}

Json resolve_with_defaults(const fs::path& path, const std::vector<std::string>& overrides) {
  Json doc = load_layered(path, 0);
  for (const std::string& o : overrides) apply_override(doc, o);
  return doc;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

const Json& child(const Json& j, const char* key) {
  static const Json empty = Json::object();
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return empty;
  return j.at(key);
}

Vec3 vec3(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ValidationError(std::string(what) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

JointVector joint_vector(const Json& j, const char* what) {
  if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
  JointVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

// A scalar broadcasts to every joint.
JointVector joint_vector_or_scalar(const Json& j, int dof, const char* what) {
  if (j.is_number()) return JointVector::Constant(dof, j.get<double>());
  JointVector v = joint_vector(j, what);
  if (v.size() != dof) throw ValidationError(std::string(what) + " must have one entry per joint");
  return v;
}

Eigen::Isometry3d transform(const Json& j) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  if (!j.is_object()) return t;
  if (j.contains("rpy")) {
    const Vec3 rpy = vec3(j.at("rpy"), "rpy");
    t.linear() = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
  }
  if (j.contains("translation")) t.translation() = vec3(j.at("translation"), "translation");
  return t;
}

Shape shape_from_json(const Json& j) {
  const std::string type = get_or<std::string>(j, "type", "");
  if (type == "box") {
    if (j.contains("center") && j.contains("size")) {
      const Vec3 c = vec3(j.at("center"), "box center");
      const Vec3 h = 0.5 * vec3(j.at("size"), "box size");
      return BoxShape{c - h, c + h};
    }
    return BoxShape{vec3(child(j, "min"), "box min"), vec3(child(j, "max"), "box max")};
  }
  if (type == "sphere") return SphereShape{vec3(child(j, "center"), "sphere center"), get_or(j, "radius", 0.0)};
  if (type == "plane") return PlaneShape{vec3(child(j, "point"), "plane point"), vec3(child(j, "normal"), "plane normal")};
  throw ValidationError("unknown primitive type '" + type + "'");
}

double deg(double d) { return d * std::numbers::pi / 180.0; }

}  // namespace

Json resolve_scenario(const fs::path& path, const std::vector<std::string>& overrides) {
  return resolve_with_defaults(path, overrides);
}

Json resolve_bench(const fs::path& path, const std::vector<std::string>& overrides) {
  return resolve_with_defaults(path, overrides);
}

KinematicChain robot_from_json(const Json& j) {
  KinematicChain chain;
  const Json& dh = child(j, "dh");
  if (!dh.is_array() || dh.empty()) throw ValidationError("robot needs a non-empty 'dh' table");
  for (const Json& row : dh) {
    chain.joints.push_back(DhRow{get_or(row, "a", 0.0), get_or(row, "alpha", 0.0), get_or(row, "d", 0.0),
                                 get_or(row, "theta_offset", 0.0)});
  }
  const int n = chain.dof();
  chain.base = transform(child(j, "base"));
  chain.camera_mount = transform(child(j, "camera_mount"));
  const Json& lim = child(j, "limits");
  auto bound = [&](const char* key, double fallback) {
    return lim.contains(key) ? joint_vector_or_scalar(lim.at(key), n, key) : JointVector::Constant(n, fallback);
  };
  chain.limits.position_max = bound("position_max", 2.0 * std::numbers::pi);
  chain.limits.position_min = lim.contains("position_min") ? bound("position_min", 0.0) : JointVector(-chain.limits.position_max);
  chain.limits.velocity_max = bound("velocity_max", 1.0);
  chain.limits.velocity_min = lim.contains("velocity_min") ? bound("velocity_min", 0.0) : JointVector(-chain.limits.velocity_max);
  chain.limits.acceleration_max = bound("acceleration_max", 4.0);
  chain.limits.acceleration_min =
      lim.contains("acceleration_min") ? bound("acceleration_min", 0.0) : JointVector(-chain.limits.acceleration_max);
  for (const Json& s : child(j, "spheres")) {
    chain.spheres.push_back(LinkSphere{get_or(s, "link", 0), s.contains("offset") ? vec3(s.at("offset"), "offset") : Vec3::Zero(),
                                       get_or(s, "radius", 0.05)});
  }
  chain.validate();
  return chain;
}

KinematicChain load_robot(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("robot file not found: " + path.string());
  return robot_from_json(load_json(path));
}

Scene scene_from_json(const Json& j) {
  Scene scene;
  scene.poi = vec3(child(j, "poi"), "scene poi");
  const Json& roi = child(j, "roi");
  scene.roi = Aabb{vec3(child(roi, "min"), "roi min"), vec3(child(roi, "max"), "roi max")};
  for (const Json& p : child(j, "primitives")) {
    scene.statics.push_back(ScenePrimitive{get_or<std::string>(p, "name", ""), shape_from_json(p),
                                           get_or(p, "demonstrator", false), get_or(p, "planner_obstacle", true)});
  }
  for (const Json& s : child(j, "scripted")) {
    ScriptedObstacle o{get_or<std::string>(s, "name", ""), shape_from_json(s), {}};
    for (const Json& k : child(s, "keyframes")) o.keyframes.emplace_back(get_or(k, "t", 0.0), vec3(child(k, "offset"), "offset"));
    scene.scripted.push_back(std::move(o));
  }
  scene.validate();
  return scene;
}

ScenarioConfig scenario_from_json(const Json& j) {
  try {
    ScenarioConfig c;
    if (!j.contains("robot") || !j.at("robot").is_string()) throw ValidationError("scenario needs a 'robot' file path");
    c.robot = load_robot(j.at("robot").get<std::string>());
    c.scene = scene_from_json(child(j, "scene"));

    const Json& cam = child(j, "camera");
    c.camera.model.fov_h = deg(get_or(cam, "fov_h_deg", 75.0));
    c.camera.model.fov_v = deg(get_or(cam, "fov_v_deg", 65.0));
    c.camera.model.range = get_or(cam, "range", 3.86);
    c.camera.rows = get_or(cam, "rows", 48);
    c.camera.cols = get_or(cam, "cols", 64);
    c.camera.noise_sigma = get_or(cam, "noise_sigma", 0.0);

    c.resolution = get_or(j, "resolution", 0.02);
    const Json& occ = child(j, "occupancy");
    c.occupancy.p_hit = get_or(occ, "p_hit", c.occupancy.p_hit);
    c.occupancy.p_miss = get_or(occ, "p_miss", c.occupancy.p_miss);
    c.occupancy.p_min = get_or(occ, "p_min", c.occupancy.p_min);
    c.occupancy.p_max = get_or(occ, "p_max", c.occupancy.p_max);
    c.occupancy.t_occ = get_or(occ, "t_occ", c.occupancy.t_occ);
    c.occupancy.t_free = get_or(occ, "t_free", c.occupancy.t_free);
    c.occupancy.max_range = get_or(occ, "max_range", c.occupancy.max_range);

    const Json& ig = child(j, "ig");
    c.ig.sphere_radius = get_or(ig, "sphere_radius", c.ig.sphere_radius);
    c.ig.num_perspectives = get_or(ig, "num_perspectives", c.ig.num_perspectives);
    c.ig.grid_scale = get_or(ig, "grid_scale", c.ig.grid_scale);
    const std::string mode = get_or<std::string>(ig, "mode", "parallel");
    if (mode == "parallel") c.ig_mode = ExecutionMode::Parallel;
    else if (mode == "sequential") c.ig_mode = ExecutionMode::Sequential;
    else throw ValidationError("ig.mode must be 'parallel' or 'sequential'");
    c.workers = get_or(j, "workers", 0);
    if (c.workers < 0) throw ValidationError("workers must be >= 0");

    const Json& buf = child(j, "buffer");
    const int bsize = get_or(buf, "size", 10);
    if (bsize < 1) throw ValidationError("buffer.size must be at least 1");
    c.buffer_size = static_cast<std::size_t>(bsize);
    c.normalize_buffer_weights = get_or(buf, "normalize", false);

    const Json& idw = child(j, "idw");
    c.idw.power = get_or(idw, "power", c.idw.power);
    c.idw.zero_dist_epsilon = get_or(idw, "zero_dist_epsilon", c.idw.zero_dist_epsilon);

    const Json& pl = child(j, "planner");
    HorizonConfig& h = c.planner;
    h.steps = get_or(pl, "steps", h.steps);
    h.dt = get_or(pl, "dt", h.dt);
    h.q_weight = get_or(pl, "q_weight", h.q_weight);
    h.r_weight = get_or(pl, "r_weight", h.r_weight);
    h.w_obstacle = get_or(pl, "w_o", h.w_obstacle);
    h.w_info = get_or(pl, "w_i", h.w_info);
    h.w_ref = get_or(pl, "w_ref", h.w_ref);
    h.epsilon = get_or(pl, "epsilon", h.epsilon);
    h.margin = get_or(pl, "margin", h.margin);
    h.reference_dt = get_or(pl, "reference_dt", h.reference_dt);
    if (pl.contains("theta_cut_deg") && !pl.at("theta_cut_deg").is_null()) h.theta_cut = deg(pl.at("theta_cut_deg").get<double>());
    h.max_iterations = get_or(pl, "max_iterations", h.max_iterations);
    h.tolerance = get_or(pl, "tolerance", h.tolerance);
    const int n = c.robot.dof();
    if (pl.contains("q_weights") && !pl.at("q_weights").is_null()) h.q_weights = joint_vector_or_scalar(pl.at("q_weights"), n, "q_weights");
    if (pl.contains("r_weights") && !pl.at("r_weights").is_null()) h.r_weights = joint_vector_or_scalar(pl.at("r_weights"), n, "r_weights");

    c.start = joint_vector(child(j, "start"), "start");
    c.goal = joint_vector(child(j, "goal"), "goal");
    for (const Json& w : child(j, "waypoints")) c.waypoints.push_back(joint_vector(w, "waypoint"));
    if (j.contains("reference_state") && !j.at("reference_state").is_null()) {
      c.reference_state = joint_vector(j.at("reference_state"), "reference_state");
    }
    c.reference_frames = get_or(j, "reference_frames", c.reference_frames);
    c.duration = get_or(j, "duration", c.duration);
    c.sensor_rate = get_or(j, "sensor_rate", c.sensor_rate);
    c.planner_rate = get_or(j, "planner_rate", c.planner_rate);
    c.goal_tolerance = get_or(j, "goal_tolerance", c.goal_tolerance);
    const auto seed = get_or<std::int64_t>(j, "seed", 1);
    if (seed < 0) throw ValidationError("seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("invalid scenario: ") + e.what());
  }
}

BenchConfig bench_from_json(const Json& j) {
  try {
    BenchConfig b;
    const double res = get_or(j, "resolution", 0.01);
    if (!(res > 0.0)) throw ValidationError("bench resolution must be positive");
    Scene scene = scene_from_json(child(j, "scene"));
    const Json& region = child(j, "region");
    const Aabb box{vec3(child(region, "min"), "region min"), vec3(child(region, "max"), "region max")};
    if (!box.valid()) throw ValidationError("bench region must be an ordered box");
    b.map = voxelize_scene(scene, res, box);

    const Json& cam = child(j, "camera");
    b.camera.fov_h = deg(get_or(cam, "fov_h_deg", 75.0));
    b.camera.fov_v = deg(get_or(cam, "fov_v_deg", 65.0));
    b.camera.range = get_or(cam, "range", 3.86);
    b.camera.validate();

    b.ig.poi = scene.poi;
    b.ig.sphere_radius = get_or(j, "sphere_radius", 1.0);
    const auto seed = get_or<std::int64_t>(j, "seed", 1);
    if (seed < 0) throw ValidationError("seed must be >= 0");
    b.ig.seed = static_cast<std::uint64_t>(seed);
    b.iterations = get_or(j, "iterations", 100);
    if (b.iterations < 1) throw ValidationError("iterations must be at least 1");
    const Json& np = child(j, "n_p");
    const Json& sg = child(j, "s_g");
    if (!np.is_array() || !sg.is_array() || np.empty() || sg.empty()) {
      throw ValidationError("bench needs non-empty 'n_p' and 's_g' arrays");
    }
    for (const Json& n : np) {
      for (const Json& s : sg) b.grid.push_back(BenchCell{n.get<int>(), s.get<double>()});
    }
    for (const BenchCell& cell : b.grid) {
      IgConfig probe = b.ig;
      probe.num_perspectives = cell.num_perspectives;
      probe.grid_scale = cell.grid_scale;
      probe.validate();
    }
    return b;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("invalid bench config: ") + e.what());
  }
}

}  // namespace nbt
