#include "nbt/voxelmap.hpp"

#include "nbt/voxel_traversal.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace nbt {

const char* to_string(VoxelState s) {
  switch (s) {
    case VoxelState::Occupied:
      return "occupied";
    case VoxelState::Free:
      return "free";
    case VoxelState::Unknown:
      return "unknown";
  }
  return "?";
}

void OccupancyParams::validate() const {
  auto open_unit = [](double p) { return std::isfinite(p) && p > 0.0 && p < 1.0; };
  if (!open_unit(p_hit) || !open_unit(p_miss) || !open_unit(p_min) || !open_unit(p_max) || !open_unit(t_occ) ||
      !open_unit(t_free)) {
    throw ValidationError("occupancy probabilities must lie in (0, 1)");
  }
  if (p_hit <= 0.5) throw ValidationError("p_hit must exceed 0.5");
  if (p_miss >= 0.5) throw ValidationError("p_miss must be below 0.5");
  if (p_min >= p_max) throw ValidationError("p_min must be below p_max");
  if (t_free > t_occ) throw ValidationError("t_free must not exceed t_occ");
  if (!(max_range > 0.0) || !std::isfinite(max_range)) throw ValidationError("max_range must be positive");
}

VoxelMap::VoxelMap(double resolution, OccupancyParams params, std::optional<Aabb> bounds)
    : resolution_(resolution), params_(params), bounds_(bounds) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ValidationError("voxel resolution must be positive");
  params_.validate();
  if (bounds_ && !bounds_->valid()) throw ValidationError("map bounds must be a finite, ordered box");
  inv_resolution_ = 1.0 / resolution_;
  l_hit_ = probability_to_log_odds(params_.p_hit);
  l_miss_ = probability_to_log_odds(params_.p_miss);
  l_min_ = probability_to_log_odds(params_.p_min);
  l_max_ = probability_to_log_odds(params_.p_max);
  l_occ_ = probability_to_log_odds(params_.t_occ);
  l_free_ = probability_to_log_odds(params_.t_free);
}

bool VoxelMap::in_bounds(const VoxelKey& k) const {
  if (!bounds_) return true;
  return bounds_->contains(key_to_center(k));
}

const VoxelMap::Chunk* VoxelMap::find_chunk(std::uint64_t packed) const {
  const auto it = index_.find(packed);
  return it == index_.end() ? nullptr : &chunks_[it->second];
}

const VoxelCell* VoxelMap::find(const VoxelKey& key) const {
  const Chunk* chunk = find_chunk(pack_chunk(key));
  return chunk == nullptr ? nullptr : &chunk->cells[cell_index(key)];
}

VoxelCell* VoxelMap::find_or_create(const VoxelKey& key) {
  const std::uint64_t packed = pack_chunk(key);
  auto [it, inserted] = index_.try_emplace(packed, static_cast<std::uint32_t>(chunks_.size()));
  if (inserted) chunks_.emplace_back();
  return &chunks_[it->second].cells[cell_index(key)];
}

Classification VoxelMap::classify(const VoxelCell* cell) const {
  if (cell == nullptr || !cell->observed) return {VoxelState::Unknown, 0.5};
  const double p = log_odds_to_probability(cell->log_odds);
  if (cell->log_odds >= l_occ_) return {VoxelState::Occupied, p};
  if (cell->log_odds <= l_free_) return {VoxelState::Free, p};
  return {VoxelState::Unknown, p};
}

bool VoxelMap::update(const VoxelKey& key, double delta) {
  if (!in_bounds(key)) return false;
  VoxelCell* cell = find_or_create(key);
  cell->log_odds = std::clamp(cell->log_odds + delta, l_min_, l_max_);
  cell->observed = true;
  return true;
}

bool VoxelMap::set(const VoxelKey& key, const VoxelCell& value) {
  if (!in_bounds(key)) return false;
  VoxelCell* cell = find_or_create(key);
  cell->log_odds = std::clamp(value.log_odds, l_min_, l_max_);
  cell->observed = value.observed;
  return true;
}

std::size_t VoxelMap::observed_count() const {
  std::size_t n = 0;
  for (const Chunk& c : chunks_) {
    for (const VoxelCell& cell : c.cells) n += cell.observed ? 1 : 0;
  }
  return n;
}

namespace {

struct KeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::size_t h = static_cast<std::uint32_t>(k.ix);
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k.iy);
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(k.iz);
    return h;
  }
};

}  // namespace

PointCloud downsample_cloud(const PointCloud& points, double leaf) {
  if (!(leaf > 0.0) || !std::isfinite(leaf)) throw ValidationError("leaf size must be positive");
  struct Accum {
    Vec3 sum = Vec3::Zero();
    std::size_t count = 0;
  };
  std::unordered_map<VoxelKey, std::size_t, KeyHash> slot;
  std::vector<Accum> accum;
  slot.reserve(points.size());
  const double inv = 1.0 / leaf;
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw ValidationError("point cloud contains non-finite coordinates");
    const VoxelKey key{static_cast<std::int32_t>(std::floor(p.x() * inv)),
                       static_cast<std::int32_t>(std::floor(p.y() * inv)),
                       static_cast<std::int32_t>(std::floor(p.z() * inv))};
    auto [it, inserted] = slot.try_emplace(key, accum.size());
    if (inserted) accum.emplace_back();
    Accum& a = accum[it->second];
    a.sum += p;
    ++a.count;
  }
  PointCloud out;
  out.reserve(accum.size());
  for (const Accum& a : accum) out.push_back(a.sum / static_cast<double>(a.count));
  return out;
}

void integrate_cloud(VoxelMap& map, const Vec3& sensor_origin, const PointCloud& points) {
  if (!sensor_origin.allFinite()) throw ValidationError("sensor origin must be finite");
  const double max_range = map.params().max_range;
  const double l_hit = map.hit_log_odds();
  const double l_miss = map.miss_log_odds();
  for (const Vec3& p : points) {
    if (!p.allFinite()) throw ValidationError("point cloud contains non-finite coordinates");
    const Vec3 ray = p - sensor_origin;
    const double range = ray.norm();
    if (range > max_range) {
      // Carve up to the range limit, no endpoint update.
      const Vec3 end = sensor_origin + ray * (max_range / range);
      traverse_segment(sensor_origin, end, map.resolution(), [&](const VoxelKey& k) {
        map.update(k, l_miss);
        return true;
      });
      continue;
    }
    const VoxelKey end_key = map.world_to_key(p);
    traverse_segment(sensor_origin, p, map.resolution(), [&](const VoxelKey& k) {
      if (k != end_key) map.update(k, l_miss);
      return true;
    });
    map.update(end_key, l_hit);
  }
}

std::size_t occupied_volume(const VoxelMap& map, const Aabb& region) {
  if (!region.valid()) throw ValidationError("region must be a finite, ordered box");
  const double res = map.resolution();
  // Keys whose centers fall in [min, max].
  // One extra key on each side; the contains() test below is authoritative.
  auto lo = [&](double v) { return static_cast<std::int64_t>(std::ceil(v / res - 0.5)) - 1; };
  auto hi = [&](double v) { return static_cast<std::int64_t>(std::floor(v / res - 0.5)) + 1; };
  const std::int64_t x0 = lo(region.min.x()), x1 = hi(region.max.x());
  const std::int64_t y0 = lo(region.min.y()), y1 = hi(region.max.y());
  const std::int64_t z0 = lo(region.min.z()), z1 = hi(region.max.z());
  const std::int64_t volume = std::max<std::int64_t>(0, x1 - x0 + 1) * std::max<std::int64_t>(0, y1 - y0 + 1) *
                              std::max<std::int64_t>(0, z1 - z0 + 1);

  std::size_t count = 0;
  if (volume <= static_cast<std::int64_t>(map.chunk_count() * VoxelMap::kChunkCells)) {
    auto reader = map.reader();
    for (std::int64_t z = z0; z <= z1; ++z) {
      for (std::int64_t y = y0; y <= y1; ++y) {
        for (std::int64_t x = x0; x <= x1; ++x) {
          const VoxelKey k{static_cast<std::int32_t>(x), static_cast<std::int32_t>(y), static_cast<std::int32_t>(z)};
          if (!region.contains(map.key_to_center(k))) continue;
          if (reader.classify(k).state == VoxelState::Occupied) ++count;
        }
      }
    }
    return count;
  }
  map.for_each_observed([&](const VoxelKey& k, const VoxelCell& cell) {
    if (region.contains(map.key_to_center(k)) && map.classify(&cell).state == VoxelState::Occupied) ++count;
  });
  return count;
}

void write_map(std::ostream& os, const VoxelMap& map) {
  std::vector<std::pair<VoxelKey, VoxelCell>> cells;
  map.for_each_observed([&](const VoxelKey& k, const VoxelCell& c) { cells.emplace_back(k, c); });
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  os << "voxelmap v1 " << std::setprecision(17) << map.resolution() << '\n';
  for (const auto& [k, c] : cells) {
    os << k.ix << ' ' << k.iy << ' ' << k.iz << ' ' << std::setprecision(17) << c.log_odds << ' '
       << (c.observed ? 1 : 0) << '\n';
  }
}

VoxelMap read_map(std::istream& is, OccupancyParams params) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("map file is empty");
  std::istringstream header(line);
  std::string magic, version;
  double resolution = 0.0;
  if (!(header >> magic >> version >> resolution) || magic != "voxelmap" || version != "v1") {
    throw ValidationError("map header must read 'voxelmap v1 <resolution>'");
  }
  VoxelMap map(resolution, params);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    VoxelKey k;
    double l = 0.0;
    int observed = 0;
    if (!(row >> k.ix >> k.iy >> k.iz >> l >> observed) || (observed != 0 && observed != 1) || !std::isfinite(l)) {
      throw ValidationError("malformed voxel on line " + std::to_string(lineno));
    }
    map.set(k, {l, observed == 1});
  }
  return map;
}

void save_map(const std::string& path, const VoxelMap& map) {
  std::ofstream os(path);
  if (!os) throw RuntimeError("cannot write map file " + path);
  write_map(os, map);
}

VoxelMap load_map(const std::string& path, OccupancyParams params) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open map file " + path);
  return read_map(is, params);
}

void write_cloud(std::ostream& os, const PointCloud& cloud) {
  os << std::setprecision(17);
  for (const Vec3& p : cloud) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

PointCloud read_cloud(std::istream& is) {
  PointCloud cloud;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    Vec3 p;
    if (!(row >> p.x() >> p.y() >> p.z())) throw ValidationError("malformed point on line " + std::to_string(lineno));
    if (!p.allFinite()) throw ValidationError("non-finite point on line " + std::to_string(lineno));
    cloud.push_back(p);
  }
  return cloud;
}

}  // namespace nbt
