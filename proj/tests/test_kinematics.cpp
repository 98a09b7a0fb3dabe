#include "nbt/config.hpp"
#include "nbt/kinematics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nbt;

namespace {

KinematicChain ur10_like() {
  KinematicChain c;
  const double h = std::numbers::pi / 2;
  c.joints = {{0, h, 0.1273, 0}, {-0.612, 0, 0, 0}, {-0.5723, 0, 0, 0}, {0, h, 0.163941, 0}, {0, -h, 0.1157, 0}, {0, 0, 0.0922, 0}};
  c.limits = JointLimits::symmetric(6, 2 * std::numbers::pi, 1.0, 4.0);
  c.spheres = {{2, Vec3(0.3, 0, 0), 0.08}, {3, Vec3(0.2, 0, 0), 0.06}, {5, Vec3::Zero(), 0.06}, {6, Vec3::Zero(), 0.05}};
  return c;
}

// Plain 4x4 product of the textbook DH matrices.
Eigen::Matrix4d oracle_fk(const KinematicChain& c, const JointVector& q) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int i = 0; i < c.dof(); ++i) {
    const DhRow& r = c.joints[i];
    const double th = q[i] + r.theta_offset;
    Eigen::Matrix4d rz = Eigen::Matrix4d::Identity(), tz = Eigen::Matrix4d::Identity(), tx = Eigen::Matrix4d::Identity(),
                    rx = Eigen::Matrix4d::Identity();
    rz.block<2, 2>(0, 0) << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    tz(2, 3) = r.d;
    tx(0, 3) = r.a;
    rx.block<2, 2>(1, 1) << std::cos(r.alpha), -std::sin(r.alpha), std::sin(r.alpha), std::cos(r.alpha);
    t = t * rz * tz * tx * rx;
  }
  return t;
}

JointVector random_q(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  JointVector q(n);
  for (int i = 0; i < n; ++i) q[i] = u(rng);
  return q;
}

}  // namespace

TEST_CASE("single DH row puts the camera at (a, 0, 0)") {
  KinematicChain c;
  c.joints = {{1.0, 0, 0, 0}};
  c.limits = JointLimits::symmetric(1, 3.0, 1.0, 1.0);
  const FkResult fk = forward_kinematics(c, JointVector::Zero(1));
  CHECK((fk.pose.position - Vec3(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("identity chain reproduces the base pose") {
  KinematicChain c;
  c.joints = {{0, 0, 0, 0}, {0, 0, 0, 0}};
  c.base = Eigen::Translation3d(0.1, -0.2, 0.3) * Eigen::AngleAxisd(0.4, Vec3::UnitY());
  c.limits = JointLimits::symmetric(2, 3.0, 1.0, 1.0);
  const FkResult fk = forward_kinematics(c, JointVector::Zero(2));
  CHECK((fk.camera.matrix() - c.base.matrix()).norm() < 1e-15);
}

TEST_CASE("FK matches an independent matrix-chain oracle") {
  const KinematicChain c = ur10_like();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const JointVector q = random_q(rng, 6);
    const FkResult fk = forward_kinematics(c, q);
    const Eigen::Matrix4d t = oracle_fk(c, q);
    CHECK((fk.pose.position - t.block<3, 1>(0, 3)).norm() < 1e-9);
    CHECK((fk.pose.optical_axis - t.block<3, 1>(0, 2)).norm() < 1e-9);
  }
}

TEST_CASE("FK rejects mismatched dimensions") {
  const KinematicChain c = ur10_like();
  CHECK_THROWS_AS(forward_kinematics(c, JointVector::Zero(5)), ValidationError);
}

TEST_CASE("Jacobians match central differences") {
  const KinematicChain c = ur10_like();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const JointVector q = random_q(rng, 6);
    const FkResult fk = forward_kinematics(c, q);
    const Eigen::Matrix3Xd jp = point_jacobian(fk, 6, fk.pose.position, 6);
    const Eigen::Matrix3Xd ja = axis_jacobian(fk, 6);
    for (int j = 0; j < 6; ++j) {
      JointVector dq = JointVector::Zero(6);
      dq[j] = 1e-6;
      const FkResult p = forward_kinematics(c, q + dq), m = forward_kinematics(c, q - dq);
      CHECK((jp.col(j) - (p.pose.position - m.pose.position) / 2e-6).norm() < 1e-7);
      CHECK((ja.col(j) - (p.pose.optical_axis - m.pose.optical_axis) / 2e-6).norm() < 1e-7);
    }
  }
}

TEST_CASE("clearance examples") {
  KinematicChain c;
  c.joints = {{0, 0, 0, 0}};
  c.limits = JointLimits::symmetric(1, 3.0, 1.0, 1.0);
  c.spheres = {{1, Vec3::Zero(), 0.1}};
  CHECK(min_obstacle_clearance(c, JointVector::Zero(1), {}) == kNoObstacleClearance);
  CHECK(min_obstacle_clearance(c, JointVector::Zero(1), {SphereObstacle{Vec3(0.5, 0, 0), 0.2}}) ==
        doctest::Approx(0.2).epsilon(1e-15));
  CHECK(min_obstacle_clearance(c, JointVector::Zero(1), {BoxObstacle{Vec3(0.3, -1, -1), Vec3(1, 1, 1)}}) ==
        doctest::Approx(0.2).epsilon(1e-15));
  CHECK(min_obstacle_clearance(c, JointVector::Zero(1), {BoxObstacle{Vec3(-0.05, -1, -1), Vec3(1, 1, 1)}}) ==
        doctest::Approx(-0.15).epsilon(1e-15));
}

TEST_CASE("clearance equals a brute-force pair scan and shrinks with radius") {
  KinematicChain c = ur10_like();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5), r(0.05, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    const JointVector q = random_q(rng, 6);
    std::vector<Obstacle> obs;
    for (int i = 0; i < 4; ++i) obs.push_back(SphereObstacle{Vec3(u(rng), u(rng), u(rng)), r(rng)});
    const Vec3 b0(u(rng), u(rng), u(rng));
    obs.push_back(BoxObstacle{b0, b0 + Vec3(0.3, 0.2, 0.4)});
    const FkResult fk = forward_kinematics(c, q);
    double oracle = 1e300;
    for (const LinkSphere& s : c.spheres) {
      const Vec3 p = fk.frames[s.link] * s.offset;
      for (const Obstacle& o : obs) {
        double d;
        if (const auto* sp = std::get_if<SphereObstacle>(&o)) {
          d = (p - sp->center).norm() - sp->radius;
        } else {
          const auto& bx = std::get<BoxObstacle>(o);
          const Vec3 outside = (bx.min - p).cwiseMax(p - bx.max).cwiseMax(0.0);
          const double inside = std::min(0.0, (bx.min - p).cwiseMax(p - bx.max).maxCoeff());
          d = outside.norm() + inside;
        }
        oracle = std::min(oracle, d - s.radius);
      }
    }
    const double got = min_obstacle_clearance(c, q, obs);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-12).scale(1.0));
    std::vector<Obstacle> bigger = obs;
    std::get<SphereObstacle>(bigger[0]).radius += 0.1;
    CHECK(min_obstacle_clearance(c, q, bigger) <= got);
  }
}

TEST_CASE("clearance gradient matches central differences") {
  KinematicChain c = ur10_like();
  std::mt19937_64 rng(4);
  const std::vector<Obstacle> obs{SphereObstacle{Vec3(0.4, 0.3, 0.5), 0.15}, BoxObstacle{Vec3(-0.8, -0.2, 0.0), Vec3(-0.5, 0.4, 0.6)}};
  int checked = 0;
  for (int trial = 0; trial < 100 && checked < 30; ++trial) {
    const JointVector q = random_q(rng, 6);
    const ClearanceResult cr = clearance_with_gradient(c, forward_kinematics(c, q), obs, true);
    bool smooth = true;
    Eigen::VectorXd fd(6);
    for (int j = 0; j < 6; ++j) {
      JointVector dq = JointVector::Zero(6);
      dq[j] = 1e-7;
      const double p = min_obstacle_clearance(c, q + dq, obs), m = min_obstacle_clearance(c, q - dq, obs);
      fd[j] = (p - m) / 2e-7;
      // Skip points where the minimizing pair switches.
      const double c0 = cr.value;
      if (std::abs((p - c0) - (c0 - m)) > 1e-9) smooth = false;
    }
    if (!smooth) continue;
    CHECK((cr.gradient - fd).norm() < 1e-5);
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("chain validation") {
  KinematicChain c = ur10_like();
  c.limits.velocity_min[2] = 2.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = ur10_like();
  c.spheres.push_back({9, Vec3::Zero(), 0.1});
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = ur10_like();
  c.spheres[0].radius = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("shipped robot files load") {
  const KinematicChain ur = load_robot(std::string(NBT_CONFIG_DIR) + "/robots/ur10_like.json");
  CHECK(ur.dof() == 6);
  JointVector q(6);
  q << -1.57, 0, 0, 0, 1, 0;
  const FkResult fk = forward_kinematics(ur, q);
  CHECK((fk.pose.position - Vec3(-0.2148, 1.2617, 0.0116)).norm() < 1e-3);
  const KinematicChain planar = load_robot(std::string(NBT_CONFIG_DIR) + "/robots/planar2.json");
  CHECK(planar.dof() == 2);
  const FkResult f2 = forward_kinematics(planar, JointVector::Zero(2));
  CHECK((f2.pose.position - Vec3(0.9, 0, 0)).norm() < 1e-12);
  CHECK(f2.pose.optical_axis.x() == doctest::Approx(1.0));
  CHECK_THROWS_AS(load_robot("/nonexistent/robot.json"), ValidationError);
}
