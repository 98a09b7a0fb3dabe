#pragma once

#include "nbt/voxelmap.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace nbt {

/// Incremental grid traversal (Amanatides & Woo) of the segment from `origin`
/// to `end`. Visits the origin voxel first and the end voxel last. When the
/// segment crosses two boundaries at the same parameter the lower axis index
/// steps first. `visit(key)` returns false to stop early.
template <typename Visit>
void traverse_segment(const Vec3& origin, const Vec3& end, double resolution, Visit&& visit) {
  const double inv_res = 1.0 / resolution;
  VoxelKey key{static_cast<std::int32_t>(std::floor(origin.x() * inv_res)),
               static_cast<std::int32_t>(std::floor(origin.y() * inv_res)),
               static_cast<std::int32_t>(std::floor(origin.z() * inv_res))};
  const VoxelKey end_key{static_cast<std::int32_t>(std::floor(end.x() * inv_res)),
                         static_cast<std::int32_t>(std::floor(end.y() * inv_res)),
                         static_cast<std::int32_t>(std::floor(end.z() * inv_res))};

  if (!visit(key)) return;
  if (key == end_key) return;

  const Vec3 dir = end - origin;
  int step[3];
  double t_max[3];
  double t_delta[3];
  constexpr double kInf = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) {
      step[a] = 1;
      t_delta[a] = resolution / dir[a];
      t_max[a] = ((key[a] + 1) * resolution - origin[a]) / dir[a];
    } else if (dir[a] < 0.0) {
      step[a] = -1;
      t_delta[a] = -resolution / dir[a];
      t_max[a] = (key[a] * resolution - origin[a]) / dir[a];
    } else {
      step[a] = 0;
      t_delta[a] = kInf;
      t_max[a] = kInf;
    }
  }

  // Bounded by the Manhattan distance between the two voxels.
  long remaining = std::labs(static_cast<long>(end_key.ix) - key.ix) +
                   std::labs(static_cast<long>(end_key.iy) - key.iy) +
                   std::labs(static_cast<long>(end_key.iz) - key.iz);
  while (remaining-- > 0) {
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    if (t_max[axis] > 1.0) break;
    key[axis] += step[axis];
    t_max[axis] += t_delta[axis];
    if (!visit(key)) return;
    if (key == end_key) return;
  }
}

}  // namespace nbt
