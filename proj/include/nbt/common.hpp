#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>
#include <vector>

namespace nbt {

using Vec3 = Eigen::Vector3d;
using PointCloud = std::vector<Vec3>;

/// Raised when inputs or configuration violate a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation cannot produce a result for valid inputs.
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool valid() const { return (min.array() <= max.array()).all() && min.allFinite() && max.allFinite(); }
};

/// Camera position and unit optical axis in the world frame.
struct CameraPose {
  Vec3 position = Vec3::Zero();
  Vec3 optical_axis = Vec3::UnitX();
};

inline bool all_finite(const Vec3& p) { return p.allFinite(); }

}  // namespace nbt
