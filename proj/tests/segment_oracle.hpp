#pragma once

// Brute-force voxel enumeration along a segment: every voxel of the
// bounding box is slab-tested and kept when the segment spends positive
// length inside it, ordered by entry parameter.

#include "nbt/voxelmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace segment_oracle {

inline std::vector<nbt::VoxelKey> voxels_along(const nbt::Vec3& a, const nbt::Vec3& b, double res) {
  const nbt::Vec3 d = b - a;
  int lo[3], hi[3];
  for (int i = 0; i < 3; ++i) {
    lo[i] = static_cast<int>(std::floor(std::min(a[i], b[i]) / res));
    hi[i] = static_cast<int>(std::floor(std::max(a[i], b[i]) / res));
  }
  std::vector<std::pair<double, nbt::VoxelKey>> hits;
  for (int z = lo[2]; z <= hi[2]; ++z) {
    for (int y = lo[1]; y <= hi[1]; ++y) {
      for (int x = lo[0]; x <= hi[0]; ++x) {
        const int k[3] = {x, y, z};
        double t0 = 0.0, t1 = 1.0;
        bool empty = false;
        for (int i = 0; i < 3 && !empty; ++i) {
          const double bmin = k[i] * res, bmax = (k[i] + 1) * res;
          if (d[i] == 0.0) {
            empty = a[i] < bmin || a[i] >= bmax;
            continue;
          }
          double ta = (bmin - a[i]) / d[i], tb = (bmax - a[i]) / d[i];
          if (ta > tb) std::swap(ta, tb);
          t0 = std::max(t0, ta);
          t1 = std::min(t1, tb);
          empty = t1 - t0 <= 1e-12;
        }
        if (!empty) hits.emplace_back(t0, nbt::VoxelKey{x, y, z});
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
  std::vector<nbt::VoxelKey> out;
  out.reserve(hits.size());
  for (const auto& h : hits) out.push_back(h.second);
  return out;
}

}  // namespace segment_oracle
