#pragma once

#include "nbt/common.hpp"

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace nbt {

struct VoxelKey {
  std::int32_t ix = 0;
  std::int32_t iy = 0;
  std::int32_t iz = 0;

  std::int32_t& operator[](int axis) { return axis == 0 ? ix : (axis == 1 ? iy : iz); }
  std::int32_t operator[](int axis) const { return axis == 0 ? ix : (axis == 1 ? iy : iz); }
  friend bool operator==(const VoxelKey&, const VoxelKey&) = default;
  friend auto operator<=>(const VoxelKey&, const VoxelKey&) = default;
};

struct VoxelCell {
  double log_odds = 0.0;
  bool observed = false;
};

enum class VoxelState { Occupied, Free, Unknown };

const char* to_string(VoxelState s);

inline double probability_to_log_odds(double p) { return std::log(p / (1.0 - p)); }
inline double log_odds_to_probability(double l) { return 1.0 / (1.0 + std::exp(-l)); }

/// Occupancy update and classification parameters, all expressed as probabilities.
struct OccupancyParams {
  double p_hit = 0.7;
  double p_miss = 0.4;
  double p_min = 0.12;
  double p_max = 0.97;
  double t_occ = 0.5;
  double t_free = 0.5;
  double max_range = 5.0;

  void validate() const;
};

struct Classification {
  VoxelState state = VoxelState::Unknown;
  double probability = 0.5;
};

/// Sparse three-state occupancy grid. Cells live in dense 8x8x8 chunks
/// addressed through a hash table; a cell that was never observed is Unknown.
class VoxelMap {
 public:
  static constexpr int kChunkBits = 3;
  static constexpr int kChunkSize = 1 << kChunkBits;
  static constexpr int kChunkCells = kChunkSize * kChunkSize * kChunkSize;

  struct Chunk {
    VoxelCell cells[kChunkCells];
  };

  explicit VoxelMap(double resolution, OccupancyParams params = {}, std::optional<Aabb> bounds = std::nullopt);

  double resolution() const { return resolution_; }
  const OccupancyParams& params() const { return params_; }
  const std::optional<Aabb>& bounds() const { return bounds_; }

  VoxelKey world_to_key(const Vec3& p) const {
    return {static_cast<std::int32_t>(std::floor(p.x() * inv_resolution_)),
            static_cast<std::int32_t>(std::floor(p.y() * inv_resolution_)),
            static_cast<std::int32_t>(std::floor(p.z() * inv_resolution_))};
  }
  Vec3 key_to_center(const VoxelKey& k) const {
    return {(k.ix + 0.5) * resolution_, (k.iy + 0.5) * resolution_, (k.iz + 0.5) * resolution_};
  }
  bool in_bounds(const VoxelKey& k) const;

  /// Stored cell for `key`, or nullptr when the key was never touched.
  const VoxelCell* find(const VoxelKey& key) const;

  Classification classify(const VoxelKey& key) const { return classify(find(key)); }
  Classification classify(const VoxelCell* cell) const;

  /// Adds `delta` to the cell's log-odds, clamps, and marks it observed.
  /// Keys outside the bounds are ignored. Returns false when ignored.
  bool update(const VoxelKey& key, double delta);
  /// Writes a cell verbatim (clamped). Used by loaders and synthetic maps.
  bool set(const VoxelKey& key, const VoxelCell& cell);

  double hit_log_odds() const { return l_hit_; }
  double miss_log_odds() const { return l_miss_; }
  double min_log_odds() const { return l_min_; }
  double max_log_odds() const { return l_max_; }

  /// Number of observed cells.
  std::size_t observed_count() const;
  std::size_t chunk_count() const { return chunks_.size(); }

  template <typename Fn>
  void for_each_observed(Fn&& fn) const {
    for (const auto& [packed, index] : index_) {
      const VoxelKey base = unpack_chunk(packed);
      const Chunk& chunk = chunks_[index];
      for (int i = 0; i < kChunkCells; ++i) {
        if (!chunk.cells[i].observed) continue;
        fn(VoxelKey{base.ix + (i & (kChunkSize - 1)), base.iy + ((i >> kChunkBits) & (kChunkSize - 1)),
                    base.iz + (i >> (2 * kChunkBits))},
           chunk.cells[i]);
      }
    }
  }

  /// Read cursor caching the most recently touched chunk. Not shared across threads.
  class Reader {
   public:
    explicit Reader(const VoxelMap& map) : map_(&map) {}
    const VoxelCell* find(const VoxelKey& key) {
      const std::uint64_t packed = pack_chunk(key);
      if (packed != cached_key_ || !has_cache_) {
        cached_key_ = packed;
        has_cache_ = true;
        cached_ = map_->find_chunk(packed);
      }
      if (cached_ == nullptr) return nullptr;
      return &cached_->cells[cell_index(key)];
    }
    Classification classify(const VoxelKey& key) { return map_->classify(find(key)); }

   private:
    const VoxelMap* map_;
    const Chunk* cached_ = nullptr;
    std::uint64_t cached_key_ = 0;
    bool has_cache_ = false;
  };

  Reader reader() const { return Reader(*this); }

 private:
  static std::uint64_t pack_chunk(const VoxelKey& k) {
    constexpr std::int64_t kOffset = std::int64_t{1} << 20;
    const auto cx = static_cast<std::uint64_t>((k.ix >> kChunkBits) + kOffset) & 0x1FFFFF;
    const auto cy = static_cast<std::uint64_t>((k.iy >> kChunkBits) + kOffset) & 0x1FFFFF;
    const auto cz = static_cast<std::uint64_t>((k.iz >> kChunkBits) + kOffset) & 0x1FFFFF;
    return cx | (cy << 21) | (cz << 42);
  }
  static VoxelKey unpack_chunk(std::uint64_t packed) {
    constexpr std::int64_t kOffset = std::int64_t{1} << 20;
    auto part = [&](int shift) {
      return static_cast<std::int32_t>((static_cast<std::int64_t>((packed >> shift) & 0x1FFFFF) - kOffset)
                                       << kChunkBits);
    };
    return {part(0), part(21), part(42)};
  }
  static int cell_index(const VoxelKey& k) {
    constexpr int m = kChunkSize - 1;
    return (k.ix & m) | ((k.iy & m) << kChunkBits) | ((k.iz & m) << (2 * kChunkBits));
  }
  const Chunk* find_chunk(std::uint64_t packed) const;
  VoxelCell* find_or_create(const VoxelKey& key);

  double resolution_;
  double inv_resolution_;
  OccupancyParams params_;
  std::optional<Aabb> bounds_;
  double l_hit_, l_miss_, l_min_, l_max_, l_occ_, l_free_;
  std::vector<Chunk> chunks_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

/// Voxel-grid centroid filter: one output point per occupied leaf cell.
/// Output order follows the first appearance of each cell in the input.
PointCloud downsample_cloud(const PointCloud& points, double leaf);

/// Log-odds update from one sensor origin: a hit at each endpoint voxel, a
/// miss for every earlier voxel on the ray. Points beyond the configured
/// maximum range only carve free space up to that range.
void integrate_cloud(VoxelMap& map, const Vec3& sensor_origin, const PointCloud& points);

/// Number of Occupied voxels whose centers lie inside `region`.
std::size_t occupied_volume(const VoxelMap& map, const Aabb& region);

// Text formats
void write_map(std::ostream& os, const VoxelMap& map);
VoxelMap read_map(std::istream& is, OccupancyParams params = {});
void save_map(const std::string& path, const VoxelMap& map);
VoxelMap load_map(const std::string& path, OccupancyParams params = {});

void write_cloud(std::ostream& os, const PointCloud& cloud);
PointCloud read_cloud(std::istream& is);

}  // namespace nbt
