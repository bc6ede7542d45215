#include "nutrunner/control.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace nutrunner {

JointVector stiffness_torques(const ChainModel& model, const JointVector& q,
                              const JointVector& qdot, const JointVector& q_d,
                              const JointVector& qdot_d, const Gains& gains) {
  const JointVector accel_cmd = gains.kp * (q_d - q) + gains.kd * (qdot_d - qdot);
  JointVector tau = gravity_torque(model, q) + mass_matrix(model, q) * accel_cmd;
  for (int i = 0; i < kDof; ++i) {
    tau[i] = std::clamp(tau[i], -gains.tau_ceiling, gains.tau_ceiling);
  }
  return tau;
}

Eigen::Matrix<double, kDof, 6> damped_pinv(const SpatialJacobian& jac, double damping,
                                           double sigma_threshold, double* sigma_min,
                                           bool* damped) {
  Eigen::JacobiSVD<Eigen::Matrix<double, 6, kDof>> svd(jac,
                                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const double smallest = sigma(sigma.size() - 1);
  const bool needs_damping = smallest < sigma_threshold;
  if (sigma_min != nullptr) *sigma_min = smallest;
  if (damped != nullptr) *damped = needs_damping;

  Eigen::Matrix<double, 6, 1> inv_sigma;
  for (int i = 0; i < sigma.size(); ++i) {
    if (needs_damping) {
      inv_sigma(i) = sigma(i) / (sigma(i) * sigma(i) + damping * damping);
    } else {
      inv_sigma(i) = 1.0 / sigma(i);
    }
  }
  return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().transpose();
}

Wrench ft_project(const Wrench& raw_gripper, const Pose& manipuland, const Pose& gripper) {
  return transport_wrench(raw_gripper, gripper.rotation.toRotationMatrix(), gripper.translation,
                          manipuland.rotation.toRotationMatrix(), manipuland.translation);
}

JointVector hybrid_torques(const ChainModel& model, const JointVector& q, const JointVector& qdot,
                           const TaskCoordinates& x_d, const TaskCoordinates& x_s,
                           const Wrench& rho_s, const Mat3& manipuland_rotation,
                           const JointVector& q_nominal, const Gains& gains, HybridDebug* debug) {
  const SpatialJacobian jac = express_jacobian(jacobian(model, q), manipuland_rotation);

  // Zero-padded task command: force channel on beta (index 1), position
  // channels on t_x, t_z (indices 3, 5). Everything else stays exactly zero.
  Vec6 error = Vec6::Zero();
  error[1] = gains.rho_d - rho_s[1];
  error[3] = x_d.x[3] - x_s.x[3];
  error[5] = x_d.x[5] - x_s.x[5];

  Vec6 task = Vec6::Zero();
  task[1] = gains.kfp * error[1] + gains.kfd * (x_d.xdot[1] - x_s.xdot[1]);
  task[3] = gains.kp * error[3] + gains.kd * (x_d.xdot[3] - x_s.xdot[3]);
  task[5] = gains.kp * error[5] + gains.kd * (x_d.xdot[5] - x_s.xdot[5]);

  double sigma_min = 0.0;
  bool damped = false;
  const Eigen::Matrix<double, kDof, 6> pinv =
      damped_pinv(jac, gains.pinv_damping, gains.sigma_threshold, &sigma_min, &damped);
  const Eigen::Matrix<double, kDof, kDof> null_proj =
      Eigen::Matrix<double, kDof, kDof>::Identity() - pinv * jac;

  const JointVector posture = gains.k2p * (q_nominal - q) - gains.k2d * qdot;
  const JointVector tau_ns = gains.epsilon * (null_proj * posture);

  JointVector tau = gravity_torque(model, q) + jac.transpose() * task + tau_ns;
  for (int i = 0; i < kDof; ++i) {
    tau[i] = std::clamp(tau[i], -gains.tau_ceiling, gains.tau_ceiling);
  }

  if (debug != nullptr) {
    debug->task_error = error;
    debug->task_force = task;
    debug->ns_torque_norm = tau_ns.norm();
    debug->sigma_min = sigma_min;
    debug->ill_conditioned = damped;
  }
  return tau;
}

}  // namespace nutrunner
