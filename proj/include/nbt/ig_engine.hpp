#pragma once

#include "nbt/common.hpp"
#include "nbt/voxelmap.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace nbt {

struct CameraModel {
  double fov_h = 1.3089969389957472;  // 75 deg
  double fov_v = 1.1344640137963142;  // 65 deg
  double range = 3.86;

  void validate() const;
  double half_width() const;   // d_h at the far plane
  double half_height() const;  // d_v at the far plane
};

struct Perspective {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
};

struct IgConfig {
  Vec3 poi = Vec3::Zero();
  double sphere_radius = 1.0;
  int num_perspectives = 500;
  double grid_scale = 100.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PerspectiveGain {
  Vec3 origin = Vec3::Zero();
  double gain = 0.0;
  int ray_count = 0;
};

using InfoDistribution = std::vector<PerspectiveGain>;

enum class ExecutionMode { Sequential, Parallel };

const char* to_string(ExecutionMode m);

/// Right/up axes of a view plane orthogonal to `direction`. The up-hint is +z,
/// or +x when the direction is (anti)parallel to z.
struct ViewBasis {
  Vec3 forward;
  Vec3 right;
  Vec3 up;
};
ViewBasis view_basis(const Vec3& direction);

/// One perspective from a standard-normal draw and a uniform radial draw.
/// Returns false when the draw is degenerate and must be resampled.
bool perspective_from_draw(const Vec3& normal_draw, double radial_draw, const IgConfig& cfg, Perspective& out);

/// N_P perspectives uniformly distributed inside the sphere around the PoI,
/// each looking at the PoI. Deterministic for a fixed seed.
std::vector<Perspective> sample_perspectives(const IgConfig& cfg);

/// Endpoints on the far frustum plane: a regular grid with spacing
/// grid_scale * voxel_size centered on the view axis, followed by the four
/// frustum corners.
std::vector<Vec3> frustum_endpoints(const Perspective& persp, const CameraModel& cam, double voxel_size,
                                    double grid_scale);

/// Per-voxel information value for a classified voxel.
inline double voxel_gain(const Classification& c) {
  switch (c.state) {
    case VoxelState::Occupied:
      return 1.0 - c.probability;
    case VoxelState::Free:
      return c.probability;
    case VoxelState::Unknown:
      return 1.0;
  }
  return 1.0;
}

/// Accumulated voxel gain from `origin` to `endpoint`, stopping after the
/// first Occupied voxel.
double ray_gain(const VoxelMap& map, const Vec3& origin, const Vec3& endpoint);
double ray_gain(VoxelMap::Reader& reader, double voxel_size, const Vec3& origin, const Vec3& endpoint);

/// Mean ray gain of one perspective over its frustum endpoints, summed in endpoint order.
PerspectiveGain perspective_gain(VoxelMap::Reader& reader, double voxel_size, const Perspective& persp,
                                 const CameraModel& cam, double grid_scale);

// Kernels. Both evaluate perspective_gain per perspective and write results
// in input order, so their outputs are identical.
InfoDistribution compute_gains_sequential(const VoxelMap& map, const std::vector<Perspective>& perspectives,
                                          const CameraModel& cam, double grid_scale);
InfoDistribution compute_gains_parallel(const VoxelMap& map, const std::vector<Perspective>& perspectives,
                                        const CameraModel& cam, double grid_scale, int workers);

/// Samples perspectives and evaluates their gains. `workers` = 0 uses all
/// available threads; ignored in sequential mode.
InfoDistribution compute_distribution(const VoxelMap& map, const IgConfig& cfg, const CameraModel& cam,
                                      ExecutionMode mode, int workers = 0);

int available_workers();

struct BenchCell {
  int num_perspectives = 0;
  double grid_scale = 0.0;
};

struct BenchRow {
  int num_perspectives = 0;
  double grid_scale = 0.0;
  ExecutionMode mode = ExecutionMode::Sequential;
  double mean_s = 0.0;
  double std_s = 0.0;
};

/// Mean and standard deviation of compute_distribution wall time per
/// (cell, mode). Each cell runs both modes, sequential first.
std::vector<BenchRow> benchmark(const VoxelMap& map, const CameraModel& cam, const IgConfig& base,
                                const std::vector<BenchCell>& grid, int iterations, int workers = 0);

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows);
void write_distribution(std::ostream& os, const InfoDistribution& dist);
InfoDistribution read_distribution(std::istream& is);

}  // namespace nbt
