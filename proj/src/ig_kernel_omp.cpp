#include "nbt/ig_engine.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nbt {

int available_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// One task per perspective. Each thread owns a map reader (its chunk cache),
// the map itself is only read.
InfoDistribution compute_gains_parallel(const VoxelMap& map, const std::vector<Perspective>& perspectives,
                                        const CameraModel& cam, double grid_scale, int workers) {
  InfoDistribution out(perspectives.size());
  const auto n = static_cast<std::int64_t>(perspectives.size());
  const int threads = workers > 0 ? workers : available_workers();
  const double voxel_size = map.resolution();
#pragma omp parallel num_threads(threads)
  {
    auto reader = map.reader();
#pragma omp for schedule(dynamic, 4)
    for (std::int64_t j = 0; j < n; ++j) {
      out[j] = perspective_gain(reader, voxel_size, perspectives[j], cam, grid_scale);
    }
  }
  (void)threads;
  return out;
}

}  // namespace nbt
