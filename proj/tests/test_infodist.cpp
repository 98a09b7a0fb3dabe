#include "nbt/infodist.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nbt;

namespace {

InfoDistribution dist(std::initializer_list<std::pair<Vec3, double>> items) {
  InfoDistribution d;
  for (const auto& [o, g] : items) d.push_back({o, g, 1});
  return d;
}

InfoDistribution random_dist(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), g(0.0, 50.0);
  InfoDistribution d;
  for (int i = 0; i < n; ++i) d.push_back({Vec3(u(rng), u(rng), u(rng)), g(rng), 29});
  return d;
}

CameraPose pose_at_angle(double theta) {
  // PoI on +x at distance 2, axis tilted by theta in the x-y plane.
  return {Vec3::Zero(), Vec3(std::cos(theta), std::sin(theta), 0.0)};
}

}  // namespace

TEST_CASE("single perspective: weights cancel") {
  const auto d = dist({{Vec3(1, 2, 3), 4.2}});
  for (const Vec3& q : {Vec3(0, 0, 0), Vec3(10, -3, 2), Vec3(1, 2, 3.5)}) CHECK(idw_single(d, q, {}) == doctest::Approx(4.2));
}

TEST_CASE("zero-distance rule returns the exact gain") {
  const auto d = dist({{Vec3(0, 0, 0), 1.0}, {Vec3(1, 0, 0), 3.25}, {Vec3(0, 2, 0), 9.0}});
  CHECK(idw_single(d, Vec3(1, 0, 0), {}) == 3.25);
  CHECK(idw_single(d, Vec3(1 + 1e-12, 0, 0), {}) == 3.25);
}

TEST_CASE("hand-evaluated two-point case") {
  const auto d = dist({{Vec3(1, 0, 0), 1.0}, {Vec3(-2, 0, 0), 3.0}});
  CHECK(idw_single(d, Vec3::Zero(), {}) == doctest::Approx(1.4).epsilon(1e-14));
  IdwParams p;
  p.power = 1.0;
  CHECK(idw_single(d, Vec3::Zero(), p) == doctest::Approx((1.0 + 3.0 * 0.5) / 1.5).epsilon(1e-14));
}

TEST_CASE("interpolant stays inside the gain range") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const auto d = random_dist(rng, 50);
  double lo = 1e300, hi = -1e300;
  for (const auto& g : d) lo = std::min(lo, g.gain), hi = std::max(hi, g.gain);
  for (int i = 0; i < 2000; ++i) {
    const double v = idw_single(d, Vec3(u(rng), u(rng), u(rng)), {});
    CHECK(v >= lo - 1e-12);
    CHECK(v <= hi + 1e-12);
  }
}

TEST_CASE("interpolant approaches the gain near an origin") {
  const auto d = dist({{Vec3(0, 0, 0), 2.0}, {Vec3(1, 0, 0), 6.0}});
  CHECK(idw_single(d, Vec3(1e-6, 0, 0), {}) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const DistributionEntry e(random_dist(rng, 30));
  for (double p : {1.0, 2.0, 3.0}) {
    IdwParams params;
    params.power = p;
    for (int i = 0; i < 20; ++i) {
      const Vec3 q(u(rng), u(rng), u(rng));
      Vec3 grad;
      e.idw(q, params, &grad);
      for (int a = 0; a < 3; ++a) {
        Vec3 dq = Vec3::Zero();
        dq[a] = 1e-6;
        const double fd = (e.idw(q + dq, params) - e.idw(q - dq, params)) / 2e-6;
        CHECK(grad[a] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("buffer weights and the two-entry example") {
  DistributionBuffer b(2);
  b.push(dist({{Vec3(0, 0, 0), 2.0}}));
  CHECK(gain_at(b, Vec3(5, 5, 5), {}) == doctest::Approx(2.0));
  b.push(dist({{Vec3(0, 0, 0), 4.0}}));
  CHECK(b.weight(0) == 0.5);
  CHECK(b.weight(1) == 1.0);
  CHECK(gain_at(b, Vec3(1, 1, 1), {}) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("push at capacity evicts the oldest") {
  DistributionBuffer b(3);
  for (int i = 0; i < 5; ++i) b.push(dist({{Vec3(0, 0, 0), double(i)}}));
  REQUIRE(b.size() == 3);
  CHECK(b.full());
  CHECK(b.entry(0).mean_gain() == 2.0);
  CHECK(b.entry(2).mean_gain() == 4.0);
}

TEST_CASE("full buffer of identical entries scales by the harmonic weight sum") {
  std::mt19937_64 rng(3);
  const auto d = random_dist(rng, 20);
  DistributionBuffer b(10);
  for (int i = 0; i < 10; ++i) b.push(d);
  double h = 0.0;
  for (int u = 0; u < 10; ++u) h += 1.0 / (10 - u);
  const Vec3 q(0.3, -0.1, 0.7);
  CHECK(gain_at(b, q, {}) == doctest::Approx(h * idw_single(d, q, {})).epsilon(1e-12));

  DistributionBuffer n(10, true);
  for (int i = 0; i < 10; ++i) n.push(d);
  CHECK(gain_at(n, q, {}) == doctest::Approx(idw_single(d, q, {})).epsilon(1e-12));
}

TEST_CASE("buffered gain gradient matches finite differences") {
  std::mt19937_64 rng(4);
  DistributionBuffer b(4);
  for (int i = 0; i < 3; ++i) b.push(random_dist(rng, 15));
  const Vec3 q(0.2, 0.4, -0.3);
  Vec3 grad;
  gain_at(b, q, {}, &grad);
  for (int a = 0; a < 3; ++a) {
    Vec3 dq = Vec3::Zero();
    dq[a] = 1e-6;
    const double fd = (gain_at(b, q + dq, {}) - gain_at(b, q - dq, {})) / 2e-6;
    CHECK(grad[a] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("empty buffer is an error") {
  DistributionBuffer b(10);
  CHECK_THROWS_WITH_AS(gain_at(b, Vec3::Zero(), {}), "no distribution available", RuntimeError);
  CHECK_THROWS_AS(remaining_ig(b), RuntimeError);
}

TEST_CASE("orientation factor examples") {
  const Vec3 poi(2, 0, 0);
  const double cut = 30.0 * std::numbers::pi / 180.0;
  CHECK(orientation_factor(pose_at_angle(0.0), poi, cut) == 1.0);
  CHECK(orientation_factor(pose_at_angle(89.0 * std::numbers::pi / 180.0), poi, cut) == 0.0);
  CHECK(orientation_factor(pose_at_angle(20.0 * std::numbers::pi / 180.0), poi, cut) ==
        doctest::Approx(0.9396926207859084).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(orientation_factor(CameraPose{poi, Vec3::UnitX()}, poi, cut), doctest::Contains("undefined ideal orientation"),
                       RuntimeError);
}

TEST_CASE("orientation factor: default cutoff and scale invariance") {
  CameraModel cam;
  CHECK(default_theta_cut(cam) == doctest::Approx(std::min(cam.fov_h, cam.fov_v) / 2.0));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 pos(n(rng), n(rng), n(rng)), poi(n(rng), n(rng), n(rng));
    const Vec3 axis = Vec3(n(rng), n(rng), n(rng)).normalized();
    const double o1 = orientation_factor(CameraPose{pos, axis}, poi, 1.0);
    const double o2 = orientation_factor(CameraPose{pos, axis}, pos + 3.7 * (poi - pos), 1.0);
    CHECK(o1 == doctest::Approx(o2).epsilon(1e-12));
  }
}

TEST_CASE("orientation factor gradient inside the cone") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  const Vec3 poi(1.0, 0.5, 0.2);
  int checked = 0;
  while (checked < 50) {
    const Vec3 pos(n(rng), n(rng), n(rng));
    const Vec3 to = (poi - pos).normalized();
    const Vec3 axis = (to + 0.3 * Vec3(n(rng), n(rng), n(rng))).normalized();
    const CameraPose pose{pos, axis};
    const auto g = orientation_factor_gradient(pose, poi, 1.2);
    if (g.value < std::cos(1.1)) continue;
    for (int a = 0; a < 3; ++a) {
      Vec3 d = Vec3::Zero();
      d[a] = 1e-6;
      const double fd = (orientation_factor(CameraPose{pos + d, axis}, poi, 1.2) -
                         orientation_factor(CameraPose{pos - d, axis}, poi, 1.2)) / 2e-6;
      CHECK(g.d_position[a] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
    // Directional derivative along a unit-preserving axis perturbation.
    const Vec3 w = axis.cross(Vec3(n(rng), n(rng), n(rng))).normalized();
    const double fd = (orientation_factor(CameraPose{pos, (axis + 1e-6 * w).normalized()}, poi, 1.2) -
                       orientation_factor(CameraPose{pos, (axis - 1e-6 * w).normalized()}, poi, 1.2)) / 2e-6;
    CHECK(g.d_axis.dot(w) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    ++checked;
  }
}

TEST_CASE("remaining IG") {
  DistributionBuffer b(10);
  b.push(dist({{Vec3(0, 0, 0), 2.0}, {Vec3(1, 0, 0), 4.0}}));
  CHECK(remaining_ig(b) == 3.0);
  DistributionBuffer c(10);
  c.push(dist({{Vec3(0, 0, 0), 1.0}}));
  c.push(dist({{Vec3(0, 0, 0), 3.0}}));
  CHECK(remaining_ig(c) == 2.0);

  std::mt19937_64 rng(7);
  DistributionBuffer r(10);
  std::vector<InfoDistribution> kept;
  for (int i = 0; i < 14; ++i) {
    auto d = random_dist(rng, 5 + i);
    r.push(d);
    kept.push_back(d);
  }
  double outer = 0.0;
  for (std::size_t i = kept.size() - 10; i < kept.size(); ++i) {
    double inner = 0.0;
    for (const auto& g : kept[i]) inner += g.gain;
    outer += inner / kept[i].size();
  }
  CHECK(remaining_ig(r) == doctest::Approx(outer / 10.0).epsilon(1e-12));
}
