#pragma once

#include "nutrunner/dynamics.hpp"
#include "nutrunner/kinematics.hpp"
#include "nutrunner/stage.hpp"

namespace nutrunner {

enum class ControlMode { kStiffness, kHybrid };

inline const char* control_mode_name(ControlMode m) {
  return m == ControlMode::kStiffness ? "Stiffness" : "Hybrid";
}

// The hybrid controller runs only while actually turning the nut; every
// free-space motion (and a missed grasp) falls back to joint stiffness.
inline ControlMode select_controller(Stage stage, bool grasped) {
  return (stage == Stage::kScrew && grasped) ? ControlMode::kHybrid : ControlMode::kStiffness;
}

struct Gains {
  // PD gains shared by both laws: mass-matrix shaped in joint space for the
  // stiffness controller, applied directly to the zero-padded task error
  // (t_x, t_z) in the hybrid controller.
  double kp{100.0};
  double kd{20.0};
  // Hybrid force channel (fastening moment about the manipuland +y).
  double kfp{0.2};
  double kfd{10.0};   // N*m*s/rad on the pitch-angle rate error
  double rho_d{0.2};  // desired fastening moment, N*m
  // Null-space posture servo (damping applied toward zero velocity).
  double k2p{100.0};
  double k2d{20.0};
  double epsilon{0.01};
  // Pseudoinverse damping policy.
  double sigma_threshold{1e-2};
  double pinv_damping{1e-3};
  // Per-joint command ceiling; keeps output bounded near singularities.
  double tau_ceiling{180.0};  // N*m
};

// Task coordinates x = (alpha, beta, gamma, t_x, t_y, t_z) in the manipuland
// frame. Only the rows used by the hybrid law need to be meaningful: the
// translation rows of x, and the beta (index 1) plus translation rows of
// xdot; the orientation entries of x are conventionally zero.
struct TaskCoordinates {
  Vec6 x{Vec6::Zero()};
  Vec6 xdot{Vec6::Zero()};
};

// Joint stiffness tracking: tau = g(q) + M(q) (kp (q_d - q) + kd (qd_d - qd)).
JointVector stiffness_torques(const ChainModel& model, const JointVector& q,
                              const JointVector& qdot, const JointVector& q_d,
                              const JointVector& qdot_d, const Gains& gains);

// Moore-Penrose pseudoinverse of the Jacobian. Exact while the smallest
// singular value stays above sigma_threshold; otherwise Tikhonov-damped with
// the given damping. Reports the smallest singular value and whether damping
// engaged (logged by callers, never fatal).
Eigen::Matrix<double, kDof, 6> damped_pinv(const SpatialJacobian& jac, double damping,
                                           double sigma_threshold, double* sigma_min = nullptr,
                                           bool* damped = nullptr);

// Re-expresses the gripper-frame F/T reading in the manipuland frame about
// the manipuland origin (moments first).
Wrench ft_project(const Wrench& raw_gripper, const Pose& manipuland, const Pose& gripper);

struct HybridDebug {
  Vec6 task_error{Vec6::Zero()};  // x_d - x_s (zero-padded channels included)
  Vec6 task_force{Vec6::Zero()};  // generalized task command before J^T
  double ns_torque_norm{0.0};
  double sigma_min{0.0};
  bool ill_conditioned{false};
};

// Hybrid force/position control in the manipuland frame: the moment about
// the thread axis (+y, task index 1) is force-controlled toward gains.rho_d,
// translations t_x and t_z (task indices 3 and 5) are position-controlled,
// and every other direction is zero-padded out of the task command. A small
// null-space posture servo pulls toward q_nominal. All errors are formed
// from task coordinates already expressed in the manipuland frame, whose
// world rotation must be supplied for the Jacobian change of frame.
JointVector hybrid_torques(const ChainModel& model, const JointVector& q, const JointVector& qdot,
                           const TaskCoordinates& x_d, const TaskCoordinates& x_s,
                           const Wrench& rho_s, const Mat3& manipuland_rotation,
                           const JointVector& q_nominal, const Gains& gains,
                           HybridDebug* debug = nullptr);

}  // namespace nutrunner
