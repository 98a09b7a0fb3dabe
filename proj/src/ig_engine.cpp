#include "nbt/ig_engine.hpp"

#include "nbt/voxel_traversal.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace nbt {

const char* to_string(ExecutionMode m) { return m == ExecutionMode::Sequential ? "sequential" : "parallel"; }

void CameraModel::validate() const {
  if (!(fov_h > 0.0 && fov_h < std::numbers::pi)) throw ValidationError("fov_h must lie in (0, pi)");
  if (!(fov_v > 0.0 && fov_v < std::numbers::pi)) throw ValidationError("fov_v must lie in (0, pi)");
  if (!(range > 0.0) || !std::isfinite(range)) throw ValidationError("camera range must be positive");
}

double CameraModel::half_width() const { return range * std::tan(fov_h / 2.0); }
double CameraModel::half_height() const { return range * std::tan(fov_v / 2.0); }

void IgConfig::validate() const {
  if (!poi.allFinite()) throw ValidationError("poi must be finite");
  if (!(sphere_radius > 0.0) || !std::isfinite(sphere_radius)) throw ValidationError("r_s must be positive");
  if (num_perspectives < 1) throw ValidationError("n_p must be at least 1");
  if (!(grid_scale >= 1.0) || !std::isfinite(grid_scale)) throw ValidationError("s_g must be at least 1");
}

ViewBasis view_basis(const Vec3& direction) {
  const Vec3 forward = direction.normalized();
  Vec3 hint = Vec3::UnitZ();
  if (forward.cross(hint).norm() < 1e-6) hint = Vec3::UnitX();
  const Vec3 right = forward.cross(hint).normalized();
  const Vec3 up = right.cross(forward);
  return {forward, right, up};
}

bool perspective_from_draw(const Vec3& normal_draw, double radial_draw, const IgConfig& cfg, Perspective& out) {
  const double norm = normal_draw.norm();
  if (norm < 1e-12 || !(radial_draw > 0.0)) return false;
  const Vec3 offset = cfg.sphere_radius * std::cbrt(radial_draw) * normal_draw / norm;
  if (offset.norm() < 1e-12) return false;
  out.origin = cfg.poi + offset;
  out.direction = (-offset).normalized();
  return true;
}

std::vector<Perspective> sample_perspectives(const IgConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Perspective> out;
  out.reserve(cfg.num_perspectives);
  while (static_cast<int>(out.size()) < cfg.num_perspectives) {
    const double x = normal(rng);
    const double y = normal(rng);
    const double z = normal(rng);
    const double r = uniform(rng);
    Perspective p;
    if (perspective_from_draw(Vec3(x, y, z), r, cfg, p)) out.push_back(p);
  }
  return out;
}

std::vector<Vec3> frustum_endpoints(const Perspective& persp, const CameraModel& cam, double voxel_size,
                                    double grid_scale) {
  const ViewBasis basis = view_basis(persp.direction);
  const double dh = cam.half_width();
  const double dv = cam.half_height();
  const double spacing = grid_scale * voxel_size;
  const int nh = static_cast<int>(std::floor(dh / spacing + 1e-9));
  const int nv = static_cast<int>(std::floor(dv / spacing + 1e-9));
  const Vec3 center = persp.origin + cam.range * basis.forward;

  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>((2 * nh + 1) * (2 * nv + 1) + 4));
  for (int iv = -nv; iv <= nv; ++iv) {
    for (int ih = -nh; ih <= nh; ++ih) {
      out.push_back(center + (ih * spacing) * basis.right + (iv * spacing) * basis.up);
    }
  }
  for (int sv : {-1, 1}) {
    for (int sh : {-1, 1}) out.push_back(center + (sh * dh) * basis.right + (sv * dv) * basis.up);
  }
  return out;
}

double ray_gain(VoxelMap::Reader& reader, double voxel_size, const Vec3& origin, const Vec3& endpoint) {
  double sum = 0.0;
  traverse_segment(origin, endpoint, voxel_size, [&](const VoxelKey& k) {
    const Classification c = reader.classify(k);
    sum += voxel_gain(c);
    return c.state != VoxelState::Occupied;
  });
  return sum;
}

double ray_gain(const VoxelMap& map, const Vec3& origin, const Vec3& endpoint) {
  auto reader = map.reader();
  return ray_gain(reader, map.resolution(), origin, endpoint);
}

PerspectiveGain perspective_gain(VoxelMap::Reader& reader, double voxel_size, const Perspective& persp,
                                 const CameraModel& cam, double grid_scale) {
  const std::vector<Vec3> endpoints = frustum_endpoints(persp, cam, voxel_size, grid_scale);
  double sum = 0.0;
  for (const Vec3& e : endpoints) sum += ray_gain(reader, voxel_size, persp.origin, e);
  PerspectiveGain g;
  g.origin = persp.origin;
  g.ray_count = static_cast<int>(endpoints.size());
  g.gain = sum / static_cast<double>(endpoints.size());
  return g;
}

InfoDistribution compute_distribution(const VoxelMap& map, const IgConfig& cfg, const CameraModel& cam,
                                      ExecutionMode mode, int workers) {
  cam.validate();
  const std::vector<Perspective> perspectives = sample_perspectives(cfg);
  if (mode == ExecutionMode::Sequential) return compute_gains_sequential(map, perspectives, cam, cfg.grid_scale);
  return compute_gains_parallel(map, perspectives, cam, cfg.grid_scale, workers);
}

std::vector<BenchRow> benchmark(const VoxelMap& map, const CameraModel& cam, const IgConfig& base,
                                const std::vector<BenchCell>& grid, int iterations, int workers) {
  if (iterations < 1) throw ValidationError("benchmark iterations must be at least 1");
  using Clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (const BenchCell& cell : grid) {
    IgConfig cfg = base;
    cfg.num_perspectives = cell.num_perspectives;
    cfg.grid_scale = cell.grid_scale;
    cfg.validate();
    for (ExecutionMode mode : {ExecutionMode::Sequential, ExecutionMode::Parallel}) {
      std::vector<double> samples;
      samples.reserve(iterations);
      for (int i = 0; i < iterations; ++i) {
        const auto t0 = Clock::now();
        const InfoDistribution dist = compute_distribution(map, cfg, cam, mode, workers);
        const auto t1 = Clock::now();
        samples.push_back(std::chrono::duration<double>(t1 - t0).count());
        if (dist.empty()) throw RuntimeError("benchmark produced an empty distribution");
      }
      double mean = 0.0;
      for (double s : samples) mean += s;
      mean /= static_cast<double>(samples.size());
      double var = 0.0;
      for (double s : samples) var += (s - mean) * (s - mean);
      var = samples.size() > 1 ? var / static_cast<double>(samples.size() - 1) : 0.0;
      rows.push_back({cell.num_perspectives, cell.grid_scale, mode, mean, std::sqrt(var)});
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "n_p,s_g,mode,mean_s,std_s\n";
  for (const BenchRow& r : rows) {
    os << r.num_perspectives << ',' << r.grid_scale << ',' << to_string(r.mode) << ',' << std::setprecision(9)
       << r.mean_s << ',' << r.std_s << '\n';
  }
}

void write_distribution(std::ostream& os, const InfoDistribution& dist) {
  os << std::setprecision(17);
  for (const PerspectiveGain& g : dist) {
    os << g.origin.x() << ' ' << g.origin.y() << ' ' << g.origin.z() << ' ' << g.gain << '\n';
  }
}

InfoDistribution read_distribution(std::istream& is) {
  InfoDistribution dist;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    PerspectiveGain g;
    if (!(row >> g.origin.x() >> g.origin.y() >> g.origin.z() >> g.gain) || !std::isfinite(g.gain)) {
      throw ValidationError("malformed gain point on line " + std::to_string(lineno));
    }
    dist.push_back(g);
  }
  return dist;
}

}  // namespace nbt
