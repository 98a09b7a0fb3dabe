#include "nbt/kinematics.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace nbt {

JointLimits JointLimits::symmetric(int dof, double position, double velocity, double acceleration) {
  JointLimits l;
  l.position_max = JointVector::Constant(dof, position);
  l.position_min = -l.position_max;
  l.velocity_max = JointVector::Constant(dof, velocity);
  l.velocity_min = -l.velocity_max;
  l.acceleration_max = JointVector::Constant(dof, acceleration);
  l.acceleration_min = -l.acceleration_max;
  return l;
}

void KinematicChain::validate() const {
  const int n = dof();
  if (n < 1) throw ValidationError("kinematic chain needs at least one joint");
  for (const DhRow& r : joints) {
    if (!std::isfinite(r.a) || !std::isfinite(r.alpha) || !std::isfinite(r.d) || !std::isfinite(r.theta_offset)) {
      throw ValidationError("DH parameters must be finite");
    }
  }
  auto check = [&](const JointVector& lo, const JointVector& hi, const char* what) {
    if (lo.size() != n || hi.size() != n) throw ValidationError(std::string(what) + " limits must have one entry per joint");
    for (int i = 0; i < n; ++i) {
      if (!(lo[i] < hi[i])) throw ValidationError(std::string(what) + " limits need lower < upper");
    }
  };
  check(limits.position_min, limits.position_max, "position");
  check(limits.velocity_min, limits.velocity_max, "velocity");
  check(limits.acceleration_min, limits.acceleration_max, "acceleration");
  for (const LinkSphere& s : spheres) {
    if (s.link < 0 || s.link > n) throw ValidationError("link sphere refers to a missing link");
    if (!(s.radius > 0.0)) throw ValidationError("link sphere radius must be positive");
  }
}

Eigen::Isometry3d dh_transform(const DhRow& row, double q) {
  const double th = q + row.theta_offset;
  const double ct = std::cos(th), st = std::sin(th);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d m;
  m << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  return Eigen::Isometry3d(m);
}

FkResult forward_kinematics(const KinematicChain& chain, const JointVector& q) {
  if (q.size() != chain.dof()) {
    throw ValidationError("joint state has " + std::to_string(q.size()) + " entries, chain has " +
                          std::to_string(chain.dof()) + " joints");
  }
  if (!q.allFinite()) throw ValidationError("joint state must be finite");
  FkResult out;
  out.frames.reserve(chain.joints.size() + 1);
  Eigen::Isometry3d t = chain.base;
  out.frames.push_back(t);
  for (std::size_t i = 0; i < chain.joints.size(); ++i) {
    t = t * dh_transform(chain.joints[i], q[static_cast<Eigen::Index>(i)]);
    out.frames.push_back(t);
  }
  out.camera = t * chain.camera_mount;
  out.pose.position = out.camera.translation();
  out.pose.optical_axis = out.camera.linear().col(2).normalized();
  return out;
}

Eigen::Matrix3Xd point_jacobian(const FkResult& fk, int link, const Vec3& p, int dof) {
  Eigen::Matrix3Xd j = Eigen::Matrix3Xd::Zero(3, dof);
  // Joint i (1-based) turns about z of frame i-1; it moves frames >= i.
  for (int i = 1; i <= link && i <= dof; ++i) {
    const Eigen::Isometry3d& f = fk.frames[static_cast<std::size_t>(i - 1)];
    const Vec3 z = f.linear().col(2);
    j.col(i - 1) = z.cross(p - f.translation());
  }
  return j;
}

Eigen::Matrix3Xd axis_jacobian(const FkResult& fk, int dof) {
  Eigen::Matrix3Xd j(3, dof);
  const Vec3& a = fk.pose.optical_axis;
  for (int i = 1; i <= dof; ++i) j.col(i - 1) = fk.frames[static_cast<std::size_t>(i - 1)].linear().col(2).cross(a);
  return j;
}

namespace {

struct DistanceVisitor {
  const Vec3& p;
  Vec3* gradient;

  double operator()(const SphereObstacle& s) const {
    const Vec3 d = p - s.center;
    const double n = d.norm();
    if (gradient) *gradient = n > 0.0 ? Vec3(d / n) : Vec3(Vec3::UnitZ());
    return n - s.radius;
  }

  double operator()(const BoxObstacle& b) const {
    const Vec3 center = 0.5 * (b.min + b.max);
    const Vec3 half = 0.5 * (b.max - b.min);
    const Vec3 local = p - center;
    const Vec3 q = local.cwiseAbs() - half;
    const Vec3 outside = q.cwiseMax(0.0);
    const double out_norm = outside.norm();
    if (out_norm > 0.0) {
      if (gradient) {
        *gradient = (outside.array() * local.array().sign()).matrix() / out_norm;
      }
      return out_norm;
    }
    // Inside: distance to the nearest face.
    int axis = 0;
    if (q[1] > q[axis]) axis = 1;
    if (q[2] > q[axis]) axis = 2;
    if (gradient) {
      gradient->setZero();
      (*gradient)[axis] = local[axis] >= 0.0 ? 1.0 : -1.0;
    }
    return q[axis];
  }
};

}  // namespace

double signed_distance(const Obstacle& obstacle, const Vec3& point, Vec3* gradient) {
  return std::visit(DistanceVisitor{point, gradient}, obstacle);
}

ClearanceResult clearance_with_gradient(const KinematicChain& chain, const FkResult& fk,
                                        const std::vector<Obstacle>& obstacles, bool want_gradient) {
  ClearanceResult out;
  const int dof = chain.dof();
  if (want_gradient) out.gradient = JointVector::Zero(dof);
  if (obstacles.empty() || chain.spheres.empty()) return out;

  double best = std::numeric_limits<double>::infinity();
  int best_sphere = -1;
  Vec3 best_normal = Vec3::Zero();
  Vec3 best_center = Vec3::Zero();
  for (std::size_t s = 0; s < chain.spheres.size(); ++s) {
    const LinkSphere& ls = chain.spheres[s];
    const Vec3 c = fk.frames[static_cast<std::size_t>(ls.link)] * ls.offset;
    for (const Obstacle& o : obstacles) {
      Vec3 n;
      const double d = signed_distance(o, c, &n) - ls.radius;
      if (d < best) {
        best = d;
        best_sphere = static_cast<int>(s);
        best_normal = n;
        best_center = c;
      }
    }
  }
  out.value = best;
  if (want_gradient && best_sphere >= 0) {
    const LinkSphere& ls = chain.spheres[static_cast<std::size_t>(best_sphere)];
    out.gradient = (best_normal.transpose() * point_jacobian(fk, ls.link, best_center, dof)).transpose();
  }
  return out;
}

double min_obstacle_clearance(const KinematicChain& chain, const JointVector& q, const std::vector<Obstacle>& obstacles) {
  for (const Obstacle& o : obstacles) {
    const bool finite = std::visit(
        [](const auto& ob) {
          using T = std::decay_t<decltype(ob)>;
          if constexpr (std::is_same_v<T, SphereObstacle>) return ob.center.allFinite() && std::isfinite(ob.radius);
          else return ob.min.allFinite() && ob.max.allFinite();
        },
        o);
    if (!finite) throw ValidationError("obstacles must be finite");
  }
  const FkResult fk = forward_kinematics(chain, q);
  return clearance_with_gradient(chain, fk, obstacles, false).value;
}

}  // namespace nbt
