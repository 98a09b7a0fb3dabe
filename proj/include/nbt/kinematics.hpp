#pragma once

#include "nbt/common.hpp"

#include <Eigen/Dense>

#include <variant>
#include <vector>

namespace nbt {

using JointVector = Eigen::VectorXd;

/// Standard (distal) Denavit-Hartenberg row of a revolute joint.
struct DhRow {
  double a = 0.0;
  double alpha = 0.0;
  double d = 0.0;
  double theta_offset = 0.0;
};

struct JointLimits {
  JointVector position_min, position_max;
  JointVector velocity_min, velocity_max;
  JointVector acceleration_min, acceleration_max;

  static JointLimits symmetric(int dof, double position, double velocity, double acceleration);
};

/// Collision proxy attached to frame `link` (0 = base, i = after joint i).
struct LinkSphere {
  int link = 0;
  Vec3 offset = Vec3::Zero();
  double radius = 0.05;
};

struct KinematicChain {
  std::vector<DhRow> joints;
  Eigen::Isometry3d base = Eigen::Isometry3d::Identity();
  Eigen::Isometry3d camera_mount = Eigen::Isometry3d::Identity();
  JointLimits limits;
  std::vector<LinkSphere> spheres;

  int dof() const { return static_cast<int>(joints.size()); }
  void validate() const;
};

struct FkResult {
  std::vector<Eigen::Isometry3d> frames;  // base, then one per joint
  Eigen::Isometry3d camera = Eigen::Isometry3d::Identity();
  CameraPose pose;
};

Eigen::Isometry3d dh_transform(const DhRow& row, double q);

FkResult forward_kinematics(const KinematicChain& chain, const JointVector& q);

/// d(point)/dq for a point rigidly attached to frame `link`.
Eigen::Matrix3Xd point_jacobian(const FkResult& fk, int link, const Vec3& world_point, int dof);
/// d(optical axis)/dq.
Eigen::Matrix3Xd axis_jacobian(const FkResult& fk, int dof);

struct SphereObstacle {
  Vec3 center = Vec3::Zero();
  double radius = 0.1;
};
struct BoxObstacle {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
};
using Obstacle = std::variant<SphereObstacle, BoxObstacle>;

/// Signed distance from a point to the obstacle surface (negative inside),
/// with the unit gradient of that distance w.r.t. the point.
double signed_distance(const Obstacle& obstacle, const Vec3& point, Vec3* gradient = nullptr);

/// Returned when there is nothing to collide with.
inline constexpr double kNoObstacleClearance = 1e6;

/// Minimum surface-to-surface distance between link spheres and obstacles,
/// negative when penetrating.
double min_obstacle_clearance(const KinematicChain& chain, const JointVector& q, const std::vector<Obstacle>& obstacles);

struct ClearanceResult {
  double value = kNoObstacleClearance;
  JointVector gradient;  // of the minimizing pair w.r.t. q
};
ClearanceResult clearance_with_gradient(const KinematicChain& chain, const FkResult& fk,
                                        const std::vector<Obstacle>& obstacles, bool want_gradient);

}  // namespace nbt
