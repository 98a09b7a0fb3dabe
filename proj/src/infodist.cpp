#include "nbt/infodist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nbt {

void IdwParams::validate() const {
  if (!(power >= 0.0) || !std::isfinite(power)) throw ValidationError("idw power must be finite and >= 0");
  if (!(zero_dist_epsilon >= 0.0) || !std::isfinite(zero_dist_epsilon)) {
    throw ValidationError("idw zero-distance epsilon must be finite and >= 0");
  }
}

DistributionEntry::DistributionEntry(InfoDistribution dist) : dist_(std::move(dist)) {
  if (dist_.empty()) throw ValidationError("information distribution is empty");
  x_.reserve(dist_.size());
  y_.reserve(dist_.size());
  z_.reserve(dist_.size());
  g_.reserve(dist_.size());
  for (const PerspectiveGain& p : dist_) {
    if (!p.origin.allFinite() || !std::isfinite(p.gain)) throw ValidationError("non-finite perspective gain");
    x_.push_back(p.origin.x());
    y_.push_back(p.origin.y());
    z_.push_back(p.origin.z());
    g_.push_back(p.gain);
  }
}

double DistributionEntry::mean_gain() const {
  double s = 0.0;
  for (double g : g_) s += g;
  return s / static_cast<double>(g_.size());
}

double DistributionEntry::idw(const Vec3& q, const IdwParams& params, Vec3* gradient) const {
  const std::size_t n = g_.size();
  const double eps2 = params.zero_dist_epsilon * params.zero_dist_epsilon;
  const bool square = params.power == 2.0;
  const double half_power = params.power / 2.0;

  double num = 0.0, den = 0.0;
  double min_d2 = std::numeric_limits<double>::infinity();
  std::size_t nearest = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const double dx = q.x() - x_[j], dy = q.y() - y_[j], dz = q.z() - z_[j];
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < min_d2) {
      min_d2 = d2;
      nearest = j;
    }
    const double w = square ? 1.0 / d2 : std::pow(d2, -half_power);
    num += g_[j] * w;
    den += w;
  }
  if (min_d2 < eps2 || min_d2 == 0.0 || !std::isfinite(den) || den == 0.0) {
    if (gradient) gradient->setZero();
    return g_[nearest];
  }
  const double value = num / den;
  if (gradient) {
    // dG/dq = sum_j (g_j - G) dw_j/dq / W, dw_j/dq = -p w_j (q - o_j) / d_j^2
    Vec3 acc = Vec3::Zero();
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = q.x() - x_[j], dy = q.y() - y_[j], dz = q.z() - z_[j];
      const double d2 = dx * dx + dy * dy + dz * dz;
      const double w = square ? 1.0 / d2 : std::pow(d2, -half_power);
      const double c = (g_[j] - value) * (-params.power * w / d2);
      acc += c * Vec3(dx, dy, dz);
    }
    *gradient = acc / den;
  }
  return value;
}

double idw_single(const InfoDistribution& entry, const Vec3& query, const IdwParams& params) {
  return DistributionEntry(entry).idw(query, params);
}

DistributionBuffer::DistributionBuffer(std::size_t capacity, bool normalize_weights)
    : capacity_(capacity), normalize_(normalize_weights) {
  if (capacity_ == 0) throw ValidationError("distribution buffer capacity must be at least 1");
}

void DistributionBuffer::push(InfoDistribution dist) {
  entries_.emplace_back(std::move(dist));
  if (entries_.size() > capacity_) entries_.pop_front();
}

double DistributionBuffer::weight(std::size_t i) const { return 1.0 / static_cast<double>(entries_.size() - i); }

double gain_at(const DistributionBuffer& buffer, const Vec3& query, const IdwParams& params, Vec3* gradient) {
  if (buffer.empty()) throw RuntimeError("no distribution available");
  double total = 0.0, weight_sum = 0.0;
  Vec3 grad = Vec3::Zero();
  Vec3 g_entry;
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const double w = buffer.weight(i);
    total += w * buffer.entry(i).idw(query, params, gradient ? &g_entry : nullptr);
    if (gradient) grad += w * g_entry;
    weight_sum += w;
  }
  if (buffer.normalize_weights()) {
    total /= weight_sum;
    grad /= weight_sum;
  }
  if (gradient) *gradient = grad;
  return total;
}

double default_theta_cut(const CameraModel& cam) { return std::min(cam.fov_h, cam.fov_v) / 2.0; }

namespace {

Vec3 direction_to_poi(const CameraPose& pose, const Vec3& poi, double* distance) {
  const Vec3 d = poi - pose.position;
  const double n = d.norm();
  if (!(n >= 1e-9)) throw RuntimeError("undefined ideal orientation: camera coincides with the PoI");
  if (distance) *distance = n;
  return d / n;
}

}  // namespace

double orientation_factor(const CameraPose& pose, const Vec3& poi, double theta_cut) {
  const Vec3 u = direction_to_poi(pose, poi, nullptr);
  const double theta = std::atan2(pose.optical_axis.cross(u).norm(), pose.optical_axis.dot(u));
  return theta <= theta_cut ? std::cos(theta) : 0.0;
}

double orientation_factor(const CameraPose& pose, const Vec3& poi, const CameraModel& cam) {
  return orientation_factor(pose, poi, default_theta_cut(cam));
}

OrientationGradient orientation_factor_gradient(const CameraPose& pose, const Vec3& poi, double theta_cut) {
  double dist = 0.0;
  const Vec3 u = direction_to_poi(pose, poi, &dist);
  OrientationGradient out;
  out.value = orientation_factor(pose, poi, theta_cut);
  if (out.value == 0.0) return out;
  // O = a . u with u = (poi - p) / |poi - p|
  const Vec3& a = pose.optical_axis;
  out.d_axis = u;
  out.d_position = -(a - a.dot(u) * u) / dist;
  return out;
}

double remaining_ig(const DistributionBuffer& buffer) {
  if (buffer.empty()) throw RuntimeError("no distribution available");
  double s = 0.0;
  for (std::size_t i = 0; i < buffer.size(); ++i) s += buffer.entry(i).mean_gain();
  return s / static_cast<double>(buffer.size());
}

}  // namespace nbt
