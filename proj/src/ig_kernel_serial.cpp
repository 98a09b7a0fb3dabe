// Reference kernel: one perspective after another on the calling thread.

#include "nbt/ig_engine.hpp"

namespace nbt {

InfoDistribution compute_gains_sequential(const VoxelMap& map, const std::vector<Perspective>& perspectives,
                                          const CameraModel& cam, double grid_scale) {
  InfoDistribution out(perspectives.size());
  auto reader = map.reader();
  for (std::size_t j = 0; j < perspectives.size(); ++j) {
    out[j] = perspective_gain(reader, map.resolution(), perspectives[j], cam, grid_scale);
  }
  return out;
}

}  // namespace nbt
