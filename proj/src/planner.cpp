#include "nbt/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>

namespace nbt {

void HorizonConfig::validate(int dof) const {
  if (steps < 1) throw ValidationError("horizon needs at least one step");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("planner dt must be positive");
  if (!(epsilon > 0.0)) throw ValidationError("planner epsilon must be positive");
  for (double w : {q_weight, r_weight, w_obstacle, w_info, w_ref, margin}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("planner weights and margin must be finite and >= 0");
  }
  if (!(reference_dt > 0.0)) throw ValidationError("reference dt must be positive");
  if (q_weights.size() != 0 && (q_weights.size() != dof || (q_weights.array() < 0.0).any())) {
    throw ValidationError("per-joint goal weights must have one non-negative entry per joint");
  }
  if (r_weights.size() != 0 && (r_weights.size() != dof || (r_weights.array() < 0.0).any())) {
    throw ValidationError("per-joint control weights must have one non-negative entry per joint");
  }
  if (max_iterations < 0) throw ValidationError("max_iterations must be >= 0");
}

JointVector HorizonConfig::goal_weights(int dof) const {
  return q_weights.size() == dof ? q_weights : JointVector::Constant(dof, q_weight);
}

JointVector HorizonConfig::control_weights(int dof) const {
  return r_weights.size() == dof ? r_weights : JointVector::Constant(dof, r_weight);
}

void PlannerContext::validate() const {
  if (chain == nullptr) throw ValidationError("planner context has no kinematic chain");
  const int n = chain->dof();
  if (goal.size() != n) throw ValidationError("goal state dimension does not match the chain");
  const JointLimits& l = chain->limits;
  for (int i = 0; i < n; ++i) {
    if (goal[i] < l.position_min[i] || goal[i] > l.position_max[i]) {
      throw ValidationError("goal state lies outside the joint limits");
    }
  }
  for (const JointVector& w : waypoints) {
    if (w.size() != n) throw ValidationError("reference waypoint dimension does not match the chain");
  }
  if (last_control.size() != 0 && last_control.size() != n) {
    throw ValidationError("last control dimension does not match the chain");
  }
}

HorizonPlan rollout(const JointVector& x0, const Eigen::MatrixXd& controls, double dt) {
  HorizonPlan p;
  p.controls = controls;
  p.states.resize(x0.size(), controls.cols() + 1);
  p.states.col(0) = x0;
  for (Eigen::Index k = 0; k < controls.cols(); ++k) p.states.col(k + 1) = p.states.col(k) + controls.col(k) * dt;
  return p;
}

double reference_tracking_term(const JointVector& x, double t, const std::vector<JointVector>& waypoints,
                               double reference_dt) {
  if (waypoints.empty()) return 0.0;
  const double idx = std::floor(t / reference_dt + 1e-9);
  const auto i = static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(waypoints.size() - 1)));
  return (x - waypoints[i]).squaredNorm();
}

// Evaluation ---------------------------------------------------------------

namespace {

struct Evaluation {
  double merit = 0.0;
  double min_clearance = kNoObstacleClearance;
  Eigen::MatrixXd gradient;
};

class CostModel {
 public:
  CostModel(const PlannerContext& ctx, const HorizonConfig& cfg)
      : ctx_(ctx), cfg_(cfg), dof_(ctx.chain->dof()), q_(cfg.goal_weights(dof_)), r_(cfg.control_weights(dof_)),
        theta_cut_(cfg.theta_cut.value_or(default_theta_cut(ctx.camera))) {
    if (cfg.w_info > 0.0 && (ctx.buffer == nullptr || ctx.buffer->empty())) {
      throw ValidationError("a positive information weight needs a distribution buffer");
    }
    if (cfg.w_ref > 0.0 && ctx.waypoints.empty()) {
      throw ValidationError("reference tracking weight set without waypoints");
    }
  }

  int dof() const { return dof_; }

  /// Merit = J + penalty * sum((-clearance)_+)^2.
  Evaluation evaluate(const Eigen::MatrixXd& states, const Eigen::MatrixXd& controls, double penalty, bool want_grad,
                      CostBreakdown* breakdown) const {
    const int K = static_cast<int>(controls.cols());
    Evaluation ev;
    Eigen::MatrixXd state_grad;
    if (want_grad) state_grad = Eigen::MatrixXd::Zero(dof_, K + 1);
    if (breakdown) reset(*breakdown, K);

    const bool need_fk = !ctx_.obstacles.empty() || cfg_.w_info > 0.0 || breakdown != nullptr;
    double merit = 0.0;
    for (int k = 0; k <= K; ++k) {
      const JointVector x = states.col(k);
      const double t = ctx_.time + k * cfg_.dt;
      JointVector g = JointVector::Zero(dof_);

      const JointVector e = x - ctx_.goal;
      const double c_goal = e.dot(q_.cwiseProduct(e));
      if (want_grad) g += 2.0 * q_.cwiseProduct(e);

      double c_ref = 0.0;
      if (cfg_.w_ref > 0.0) {
        c_ref = cfg_.w_ref * reference_tracking_term(x, t, ctx_.waypoints, cfg_.reference_dt);
        if (want_grad) {
          const double idx = std::floor(t / cfg_.reference_dt + 1e-9);
          const auto i =
              static_cast<std::size_t>(std::clamp(idx, 0.0, static_cast<double>(ctx_.waypoints.size() - 1)));
          g += 2.0 * cfg_.w_ref * (x - ctx_.waypoints[i]);
        }
      }

      double c_obst = 0.0, c_pen = 0.0, c_info = 0.0;
      double orient = 0.0, gain = 0.0, clearance = kNoObstacleClearance;
      if (need_fk) {
        const FkResult fk = forward_kinematics(*ctx_.chain, x);
        if (!ctx_.obstacles.empty()) {
          const ClearanceResult cr = clearance_with_gradient(*ctx_.chain, fk, ctx_.obstacles, want_grad);
          clearance = cr.value;
          const double short_margin = std::max(0.0, cfg_.margin - clearance);
          const double penetration = std::max(0.0, -clearance);
          c_obst = cfg_.w_obstacle * short_margin * short_margin;
          c_pen = penalty * penetration * penetration;
          if (want_grad && (short_margin > 0.0 || penetration > 0.0)) {
            g -= (2.0 * cfg_.w_obstacle * short_margin + 2.0 * penalty * penetration) * cr.gradient;
          }
        }
        if (cfg_.w_info > 0.0) {
          const OrientationGradient og = orientation_factor_gradient(fk.pose, ctx_.poi, theta_cut_);
          Vec3 grad_gain;
          gain = gain_at(*ctx_.buffer, fk.pose.position, ctx_.idw, want_grad ? &grad_gain : nullptr);
          orient = og.value;
          const double denom = orient * gain + cfg_.epsilon;
          c_info = cfg_.w_info / denom;
          if (want_grad && orient != 0.0) {
            const Eigen::Matrix3Xd jp = point_jacobian(fk, dof_, fk.pose.position, dof_);
            const Eigen::Matrix3Xd ja = axis_jacobian(fk, dof_);
            const JointVector d_orient = jp.transpose() * og.d_position + ja.transpose() * og.d_axis;
            const JointVector d_gain = jp.transpose() * grad_gain;
            g -= cfg_.w_info / (denom * denom) * (gain * d_orient + orient * d_gain);
          }
        } else if (breakdown) {
          orient = orientation_factor(fk.pose, ctx_.poi, theta_cut_);
          gain = (ctx_.buffer != nullptr && !ctx_.buffer->empty()) ? gain_at(*ctx_.buffer, fk.pose.position, ctx_.idw)
                                                                   : 0.0;
        }
      }

      ev.min_clearance = std::min(ev.min_clearance, clearance);
      merit += c_goal + c_ref + c_obst + c_pen + c_info;
      if (want_grad) state_grad.col(k) = g;
      if (breakdown) {
        breakdown->step_goal[k] = c_goal;
        breakdown->step_reference[k] = c_ref;
        breakdown->step_obstacle[k] = c_obst;
        breakdown->step_info[k] = c_info;
        breakdown->orientation[k] = orient;
        breakdown->gain[k] = gain;
        breakdown->clearance[k] = clearance;
      }
    }

    for (int k = 0; k < K; ++k) {
      const JointVector u = controls.col(k);
      const double c_ctrl = u.dot(r_.cwiseProduct(u));
      merit += c_ctrl;
      if (breakdown) breakdown->step_control[k] = c_ctrl;
    }

    if (want_grad) {
      // u_i moves every later state by dt.
      ev.gradient.resize(dof_, K);
      JointVector suffix = JointVector::Zero(dof_);
      for (int i = K - 1; i >= 0; --i) {
        suffix += state_grad.col(i + 1);
        ev.gradient.col(i) = 2.0 * r_.cwiseProduct(controls.col(i)) + cfg_.dt * suffix;
      }
    }

    if (breakdown) {
      auto sum = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
      };
      breakdown->goal = sum(breakdown->step_goal);
      breakdown->control = sum(breakdown->step_control);
      breakdown->obstacle = sum(breakdown->step_obstacle);
      breakdown->info = sum(breakdown->step_info);
      breakdown->reference = sum(breakdown->step_reference);
      breakdown->total =
          breakdown->goal + breakdown->control + breakdown->obstacle + breakdown->info + breakdown->reference;
    }
    ev.merit = merit;
    return ev;
  }

 private:
  static void reset(CostBreakdown& b, int K) {
    b = CostBreakdown{};
    for (auto* v : {&b.step_goal, &b.step_obstacle, &b.step_info, &b.step_reference, &b.orientation, &b.gain,
                    &b.clearance}) {
      v->assign(static_cast<std::size_t>(K + 1), 0.0);
    }
    b.step_control.assign(static_cast<std::size_t>(K), 0.0);
  }

  const PlannerContext& ctx_;
  const HorizonConfig& cfg_;
  int dof_;
  JointVector q_, r_;
  double theta_cut_;
};

// Bound handling -----------------------------------------------------------

/// Displacement while braking from velocity u to rest at the joint's
/// deceleration limit, one control step at a time.
double braking_distance(double u, double dt, double accel_min, double accel_max) {
  if (u == 0.0) return 0.0;
  const double decel = u > 0.0 ? -accel_min : accel_max;
  if (!(decel > 0.0)) return 0.0;
  double v = std::abs(u) - decel * dt;
  double s = 0.0;
  for (int i = 0; v > 0.0 && i < 100000; ++i) {
    s += v * dt;
    v -= decel * dt;
  }
  return u > 0.0 ? s : -s;
}

/// Maps controls onto the velocity, acceleration and (braking-aware)
/// position bounds by a forward pass over the horizon. Plans that already
/// respect the bounds are returned unchanged.
Eigen::MatrixXd project_controls(const Eigen::MatrixXd& controls, const JointVector& x0, const JointVector& u_prev,
                                 const JointLimits& lim, double dt) {
  Eigen::MatrixXd out = controls;
  const Eigen::Index dof = controls.rows();
  for (Eigen::Index j = 0; j < dof; ++j) {
    double x = x0[j];
    double up = u_prev.size() == dof ? u_prev[j] : 0.0;
    const double vlo = lim.velocity_min[j], vhi = lim.velocity_max[j];
    const double alo = lim.acceleration_min[j], ahi = lim.acceleration_max[j];
    const double plo = lim.position_min[j], phi = lim.position_max[j];
    auto reach = [&](double u) { return x + u * dt + braking_distance(u, dt, alo, ahi); };
    for (Eigen::Index k = 0; k < controls.cols(); ++k) {
      double lo = std::max(vlo, up + alo * dt);
      double hi = std::min(vhi, up + ahi * dt);
      if (lo > hi) lo = hi = std::clamp(up, vlo, vhi);
      // Shrink [lo, hi] so the joint can still stop inside its range.
      if (reach(hi) > phi) {
        if (reach(lo) > phi) {
          hi = lo;
        } else {
          double a = lo, b = hi;
          for (int it = 0; it < 80; ++it) {
            const double m = 0.5 * (a + b);
            (reach(m) > phi ? b : a) = m;
          }
          hi = a;
        }
      }
      if (reach(lo) < plo) {
        if (reach(hi) < plo) {
          lo = hi;
        } else {
          double a = lo, b = hi;
          for (int it = 0; it < 80; ++it) {
            const double m = 0.5 * (a + b);
            (reach(m) < plo ? a : b) = m;
          }
          lo = b;
        }
      }
      const double u = std::clamp(controls(j, k), lo, hi);
      out(j, k) = u;
      x += u * dt;
      up = u;
    }
  }
  return out;
}

Eigen::MatrixXd rollout_states(const JointVector& x0, const Eigen::MatrixXd& controls, double dt) {
  Eigen::MatrixXd s(x0.size(), controls.cols() + 1);
  s.col(0) = x0;
  for (Eigen::Index k = 0; k < controls.cols(); ++k) s.col(k + 1) = s.col(k) + controls.col(k) * dt;
  return s;
}

/// Limited-memory BFGS two-loop recursion over flattened controls.
class Lbfgs {
 public:
  explicit Lbfgs(std::size_t memory) : memory_(memory) {}

  void reset() {
    s_.clear();
    y_.clear();
  }

  void push(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;
    s_.push_back(s);
    y_.push_back(y);
    if (s_.size() > memory_) {
      s_.pop_front();
      y_.pop_front();
    }
  }

  Eigen::VectorXd direction(const Eigen::VectorXd& grad) const {
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_.size());
    for (std::size_t i = s_.size(); i-- > 0;) {
      alpha[i] = s_[i].dot(q) / y_[i].dot(s_[i]);
      q -= alpha[i] * y_[i];
    }
    double gamma = 1.0;
    if (!s_.empty()) gamma = s_.back().dot(y_.back()) / y_.back().squaredNorm();
    Eigen::VectorXd r = gamma * q;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      const double beta = y_[i].dot(r) / y_[i].dot(s_[i]);
      r += s_[i] * (alpha[i] - beta);
    }
    return -r;
  }

  bool empty() const { return s_.empty(); }
  double scale() const { return s_.empty() ? 0.0 : s_.back().dot(y_.back()) / y_.back().squaredNorm(); }

 private:
  std::size_t memory_;
  std::deque<Eigen::VectorXd> s_, y_;
};

Eigen::VectorXd flat(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }
Eigen::MatrixXd unflat(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

}  // namespace

CostBreakdown total_cost(const HorizonPlan& plan, const PlannerContext& ctx, const HorizonConfig& cfg) {
  ctx.validate();
  CostModel model(ctx, cfg);
  CostBreakdown b;
  model.evaluate(plan.states, plan.controls, 0.0, false, &b);
  return b;
}

Eigen::MatrixXd cost_gradient(const HorizonPlan& plan, const PlannerContext& ctx, const HorizonConfig& cfg) {
  ctx.validate();
  CostModel model(ctx, cfg);
  return model.evaluate(plan.states, plan.controls, 0.0, true, nullptr).gradient;
}

double ConstraintReport::worst() const { return std::max({position, velocity, acceleration, clearance}); }

ConstraintReport check_constraints(const HorizonPlan& plan, const PlannerContext& ctx, const HorizonConfig& cfg) {
  ConstraintReport r;
  const JointLimits& l = ctx.chain->limits;
  const int dof = ctx.chain->dof();
  const int K = plan.steps();
  for (int k = 0; k < K; ++k) {
    if (plan.states.col(k + 1) != (plan.states.col(k) + plan.controls.col(k) * cfg.dt).eval()) r.dynamics = false;
  }
  for (int k = 0; k <= K; ++k) {
    for (int j = 0; j < dof; ++j) {
      const double x = plan.states(j, k);
      r.position = std::max({r.position, l.position_min[j] - x, x - l.position_max[j]});
    }
    if (!ctx.obstacles.empty()) {
      const double c = min_obstacle_clearance(*ctx.chain, plan.states.col(k), ctx.obstacles);
      r.clearance = std::max(r.clearance, -c);
    }
  }
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < dof; ++j) {
      const double u = plan.controls(j, k);
      r.velocity = std::max({r.velocity, l.velocity_min[j] - u, u - l.velocity_max[j]});
      const double prev =
          k == 0 ? (ctx.last_control.size() == dof ? ctx.last_control[j] : 0.0) : plan.controls(j, k - 1);
      const double acc = (u - prev) / cfg.dt;
      r.acceleration = std::max({r.acceleration, l.acceleration_min[j] - acc, acc - l.acceleration_max[j]});
    }
  }
  // Projection arithmetic rounds at the 1e-15 level; report only real violations.
  return r;
}

HorizonPlan optimize_horizon(const HorizonPlan& initial, const PlannerContext& ctx, const HorizonConfig& cfg) {
  ctx.validate();
  const KinematicChain& chain = *ctx.chain;
  const int dof = chain.dof();
  cfg.validate(dof);
  if (initial.states.rows() != dof || initial.controls.rows() != dof || initial.controls.cols() != cfg.steps ||
      initial.states.cols() != cfg.steps + 1) {
    throw ValidationError("initial plan does not match the horizon configuration");
  }
  const JointVector x0 = initial.states.col(0);
  for (int j = 0; j < dof; ++j) {
    if (x0[j] < chain.limits.position_min[j] - cfg.feasibility_tol ||
        x0[j] > chain.limits.position_max[j] + cfg.feasibility_tol) {
      throw InfeasibleStart("initial state violates the joint position limits");
    }
  }
  if (!ctx.obstacles.empty() && min_obstacle_clearance(chain, x0, ctx.obstacles) < 0.0) {
    throw InfeasibleStart("initial state is in collision");
  }

  const CostModel model(ctx, cfg);
  const JointVector u_prev = ctx.last_control.size() == dof ? ctx.last_control : JointVector::Zero(dof);
  auto project = [&](const Eigen::MatrixXd& u) { return project_controls(u, x0, u_prev, chain.limits, cfg.dt); };
  auto clearance_ok = [&](const Evaluation& e) { return e.min_clearance >= 0.0; };

  double penalty = 1e3 * std::max(1.0, cfg.w_obstacle);
  Eigen::MatrixXd U = project(initial.controls);
  Evaluation cur = model.evaluate(rollout_states(x0, U, cfg.dt), U, penalty, false, nullptr);
  if (!clearance_ok(cur)) {
    // Braking plan as an alternative start.
    const Eigen::MatrixXd hold = project(Eigen::MatrixXd::Zero(dof, cfg.steps));
    const Evaluation h = model.evaluate(rollout_states(x0, hold, cfg.dt), hold, penalty, false, nullptr);
    if (clearance_ok(h) || h.merit < cur.merit) {
      U = hold;
      cur = h;
    }
  }

  HorizonPlan best;
  int iterations = 0;
  bool stalled = false;
  Lbfgs lbfgs(8);
  const Eigen::Index n_rows = U.rows(), n_cols = U.cols();

  for (int round = 0; round < 6; ++round) {
    cur = model.evaluate(rollout_states(x0, U, cfg.dt), U, penalty, true, nullptr);
    lbfgs.reset();
    stalled = false;
    int stall_count = 0;
    while (iterations < cfg.max_iterations) {
      const Eigen::VectorXd g = flat(cur.gradient);
      if (g.lpNorm<Eigen::Infinity>() == 0.0) break;
      const bool feasible_now = clearance_ok(cur);

      auto try_direction = [&](const Eigen::VectorXd& d, double alpha0, Eigen::MatrixXd& u_out,
                               Evaluation& e_out) -> bool {
        double alpha = alpha0;
        for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
          const Eigen::MatrixXd cand = project(U + unflat(alpha * d, n_rows, n_cols));
          const Eigen::VectorXd step = flat(cand) - flat(U);
          const double slope = g.dot(step);
          if (!(slope < 0.0)) continue;
          const Evaluation e = model.evaluate(rollout_states(x0, cand, cfg.dt), cand, penalty, false, nullptr);
          if (feasible_now && !clearance_ok(e)) continue;
          if (e.merit <= cur.merit + 1e-4 * slope) {
            u_out = cand;
            e_out = e;
            return true;
          }
        }
        return false;
      };

      Eigen::MatrixXd U_new;
      Evaluation e_new;
      bool ok = false;
      if (!lbfgs.empty()) {
        const Eigen::VectorXd d = lbfgs.direction(g);
        if (d.dot(g) < 0.0) ok = try_direction(d, 1.0, U_new, e_new);
      }
      if (!ok) {
        lbfgs.reset();
        const double scale = 1.0 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
        ok = try_direction(-g, scale, U_new, e_new);
      }
      if (!ok) {
        stalled = true;
        break;
      }
      ++iterations;
      const double decrease = cur.merit - e_new.merit;
      Evaluation next = model.evaluate(rollout_states(x0, U_new, cfg.dt), U_new, penalty, true, nullptr);
      lbfgs.push(flat(U_new) - flat(U), flat(next.gradient) - g);
      U = std::move(U_new);
      cur = std::move(next);
      if (decrease <= cfg.tolerance * (1.0 + std::abs(cur.merit))) {
        if (++stall_count >= 3) break;
      } else {
        stall_count = 0;
      }
    }
    if (clearance_ok(cur) || ctx.obstacles.empty()) break;
    penalty *= 10.0;
  }

  best = rollout(x0, U, cfg.dt);
  best.iterations = iterations;
  best.cost = total_cost(best, ctx, cfg);

  if (stalled) {
    // A stall only matters when a tiny gradient step would still descend.
    const Eigen::MatrixXd g = model.evaluate(best.states, U, penalty, true, nullptr).gradient;
    const double t = 1e-7 / std::max(1.0, g.lpNorm<Eigen::Infinity>());
    const Eigen::MatrixXd probe = project(U - t * g);
    const Evaluation ep = model.evaluate(rollout_states(x0, probe, cfg.dt), probe, penalty, false, nullptr);
    if (ep.merit < cur.merit - 1e-12 * (1.0 + std::abs(cur.merit)) && (!clearance_ok(cur) || clearance_ok(ep))) {
      best.warning = true;
      best.note = "line search stalled before convergence";
    }
  }
  const ConstraintReport report = check_constraints(best, ctx, cfg);
  if (!report.satisfied(cfg.feasibility_tol)) {
    best.warning = true;
    best.note = "constraints violated by " + std::to_string(report.worst());
  }
  return best;
}

RecedingStep receding_horizon_step(const JointVector& state, const PlannerContext& ctx, const HorizonConfig& cfg,
                                   const HorizonPlan* previous) {
  const int dof = ctx.chain->dof();
  Eigen::MatrixXd warm = Eigen::MatrixXd::Zero(dof, cfg.steps);
  if (previous != nullptr && previous->controls.rows() == dof && previous->controls.cols() == cfg.steps) {
    const int K = cfg.steps;
    if (K > 1) warm.leftCols(K - 1) = previous->controls.rightCols(K - 1);
    warm.col(K - 1) = previous->controls.col(K - 1);
  }
  HorizonPlan initial = rollout(state, warm, cfg.dt);
  RecedingStep out;
  out.plan = optimize_horizon(initial, ctx, cfg);
  out.control = out.plan.controls.col(0);
  return out;
}

void write_plan_log_header(std::ostream& os, int dof) {
  os << "t,k";
  for (int j = 0; j < dof; ++j) os << ",q" << j;
  for (int j = 0; j < dof; ++j) os << ",u" << j;
  os << ",c_G,c_C,c_O,c_I,O,G\n";
}

void write_plan_log(std::ostream& os, double t, const HorizonPlan& plan, double dt) {
  const int K = plan.steps();
  const auto dof = plan.states.rows();
  os << std::setprecision(12);
  for (int k = 0; k <= K; ++k) {
    os << t + k * dt << ',' << k;
    for (Eigen::Index j = 0; j < dof; ++j) os << ',' << plan.states(j, k);
    for (Eigen::Index j = 0; j < dof; ++j) os << ',' << (k < K ? plan.controls(j, k) : 0.0);
    const double cc = k < K ? plan.cost.step_control[static_cast<std::size_t>(k)] : 0.0;
    const auto i = static_cast<std::size_t>(k);
    os << ',' << plan.cost.step_goal[i] << ',' << cc << ',' << plan.cost.step_obstacle[i] << ','
       << plan.cost.step_info[i] << ',' << plan.cost.orientation[i] << ',' << plan.cost.gain[i] << '\n';
  }
}

}  // namespace nbt
