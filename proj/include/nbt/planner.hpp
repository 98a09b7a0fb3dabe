#pragma once

#include "nbt/common.hpp"
#include "nbt/infodist.hpp"
#include "nbt/kinematics.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nbt {

struct HorizonConfig {
  int steps = 30;        // K
  double dt = 0.1;       // s
  double q_weight = 1.0;  // goal, per joint (broadcast unless q_weights set)
  double r_weight = 0.1;  // control, per joint
  JointVector q_weights;  // optional per-joint override
  JointVector r_weights;
  double w_obstacle = 1000.0;
  double w_info = 0.0;
  double w_ref = 0.0;
  double epsilon = 1e-7;
  double margin = 0.05;       // m
  double reference_dt = 0.1;  // s between reference waypoints
  std::optional<double> theta_cut;  // rad; default: narrower FoV half-angle

  int max_iterations = 200;
  double tolerance = 1e-10;   // relative cost decrease that counts as converged
  double feasibility_tol = 1e-6;

  void validate(int dof) const;
  JointVector goal_weights(int dof) const;
  JointVector control_weights(int dof) const;
};

/// Everything a planning cycle reads. The buffer and chain are borrowed and
/// must outlive the cycle.
struct PlannerContext {
  const KinematicChain* chain = nullptr;
  std::vector<Obstacle> obstacles;
  Vec3 poi = Vec3::Zero();
  CameraModel camera;
  const DistributionBuffer* buffer = nullptr;
  IdwParams idw;
  JointVector goal;
  std::vector<JointVector> waypoints;
  double time = 0.0;          // time of x_0
  JointVector last_control;   // previously executed control, seeds the acceleration limit

  void validate() const;
};

struct CostBreakdown {
  double total = 0.0;
  double goal = 0.0;
  double control = 0.0;
  double obstacle = 0.0;
  double info = 0.0;
  double reference = 0.0;
  // Per state k = 0..K
  std::vector<double> step_goal, step_obstacle, step_info, step_reference, orientation, gain, clearance;
  std::vector<double> step_control;  // k = 0..K-1
};

struct HorizonPlan {
  Eigen::MatrixXd states;    // dof x (K+1)
  Eigen::MatrixXd controls;  // dof x K
  CostBreakdown cost;
  int iterations = 0;
  bool warning = false;  // line search stalled before convergence or constraints unmet
  std::string note;

  int steps() const { return static_cast<int>(controls.cols()); }
};

/// States from x_0 and controls via x_{k+1} = x_k + u_k dt.
HorizonPlan rollout(const JointVector& x0, const Eigen::MatrixXd& controls, double dt);

/// Squared joint-space distance to the waypoint active at time t.
double reference_tracking_term(const JointVector& x, double t, const std::vector<JointVector>& waypoints,
                               double reference_dt);

/// Information barrier for one state.
inline double info_cost(double w_info, double orientation_times_gain, double epsilon) {
  return w_info / (orientation_times_gain + epsilon);
}

CostBreakdown total_cost(const HorizonPlan& plan, const PlannerContext& ctx, const HorizonConfig& cfg);

/// dJ/du for the plan's controls (dof x K).
Eigen::MatrixXd cost_gradient(const HorizonPlan& plan, const PlannerContext& ctx, const HorizonConfig& cfg);

struct ConstraintReport {
  double position = 0.0;  // worst violation of each bound family
  double velocity = 0.0;
  double acceleration = 0.0;
  double clearance = 0.0;
  bool dynamics = true;

  double worst() const;
  bool satisfied(double tol) const { return dynamics && worst() <= tol; }
};

ConstraintReport check_constraints(const HorizonPlan& plan, const PlannerContext& ctx, const HorizonConfig& cfg);

class InfeasibleStart : public RuntimeError {
 public:
  using RuntimeError::RuntimeError;
};

/// Local descent on the controls from `initial`. The result never costs
/// more than the bound-respecting version of `initial`.
HorizonPlan optimize_horizon(const HorizonPlan& initial, const PlannerContext& ctx, const HorizonConfig& cfg);

struct RecedingStep {
  JointVector control;
  HorizonPlan plan;
};

/// Shifts the previous plan by one step (last control duplicated), re-optimizes
/// from the context's current state and returns the first control.
RecedingStep receding_horizon_step(const JointVector& state, const PlannerContext& ctx, const HorizonConfig& cfg,
                                   const HorizonPlan* previous);

/// Plan log rows: t,k,q...,u...,c_G,c_C,c_O,c_I,O,G
void write_plan_log_header(std::ostream& os, int dof);
void write_plan_log(std::ostream& os, double t, const HorizonPlan& plan, double dt);

}  // namespace nbt
