#pragma once

#include "nbt/common.hpp"
#include "nbt/ig_engine.hpp"

#include <deque>
#include <optional>
#include <vector>

namespace nbt {

struct IdwParams {
  double power = 2.0;
  double zero_dist_epsilon = 1e-9;

  void validate() const;
};

/// One information distribution laid out for fast interpolation.
class DistributionEntry {
 public:
  explicit DistributionEntry(InfoDistribution dist);

  const InfoDistribution& perspectives() const { return dist_; }
  std::size_t size() const { return dist_.size(); }
  double mean_gain() const;

  /// Inverse-distance-weighted gain at `query`; optional gradient w.r.t. the query.
  double idw(const Vec3& query, const IdwParams& params, Vec3* gradient = nullptr) const;

 private:
  InfoDistribution dist_;
  std::vector<double> x_, y_, z_, g_;
};

double idw_single(const InfoDistribution& entry, const Vec3& query, const IdwParams& params);

/// Ring buffer of the most recent distributions, oldest first.
class DistributionBuffer {
 public:
  explicit DistributionBuffer(std::size_t capacity = 10, bool normalize_weights = false);

  void push(InfoDistribution dist);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  bool full() const { return entries_.size() == capacity_; }
  bool normalize_weights() const { return normalize_; }
  const DistributionEntry& entry(std::size_t i) const { return entries_[i]; }

  /// Recency weight of the i-th present entry (0 = oldest present). The
  /// newest entry always weighs 1, its predecessor 1/2, and so on.
  double weight(std::size_t i) const;

 private:
  std::size_t capacity_;
  bool normalize_;
  std::deque<DistributionEntry> entries_;
};

/// Buffered interpolated gain G at a camera position.
double gain_at(const DistributionBuffer& buffer, const Vec3& query, const IdwParams& params,
               Vec3* gradient = nullptr);

/// Half-angle of the narrower field-of-view axis.
double default_theta_cut(const CameraModel& cam);

/// Cosine between the optical axis and the direction to the PoI, zero
/// outside the cone of half-angle `theta_cut`.
double orientation_factor(const CameraPose& pose, const Vec3& poi, double theta_cut);
double orientation_factor(const CameraPose& pose, const Vec3& poi, const CameraModel& cam);

struct OrientationGradient {
  double value = 0.0;
  Vec3 d_position = Vec3::Zero();
  Vec3 d_axis = Vec3::Zero();
};
OrientationGradient orientation_factor_gradient(const CameraPose& pose, const Vec3& poi, double theta_cut);

/// Mean over buffered entries of each entry's mean perspective gain.
double remaining_ig(const DistributionBuffer& buffer);

}  // namespace nbt
