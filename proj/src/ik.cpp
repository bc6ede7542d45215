#include "nutrunner/ik.hpp"

#include <algorithm>

namespace nutrunner {

namespace {

JointVector clamp_to_limits(const ChainModel& model, JointVector q) {
  for (int i = 0; i < kDof; ++i) {
    q[i] = std::clamp(q[i], model.links[i].lower_limit, model.links[i].upper_limit);
  }
  return q;
}

struct BoxError {
  Vec3 translation;      // target - actual, world axes
  Vec3 rotation_vec;     // log(R_t R_a^T), world axes
  double rotation_angle;
};

BoxError box_error(const Pose& target, const Pose& actual) {
  BoxError e;
  e.translation = target.translation - actual.translation;
  const Mat3 rel = target.matrix() * actual.matrix().transpose();
  e.rotation_vec = so3_log(rel);
  e.rotation_angle = e.rotation_vec.norm();
  return e;
}

bool inside_box(const BoxError& e, const IkOptions& opt, double fraction) {
  return e.translation.cwiseAbs().maxCoeff() < fraction * opt.position_tolerance &&
         e.rotation_angle < fraction * opt.rotation_tolerance;
}

// One damped least-squares step toward the target pose.
JointVector dls_step(const ChainModel& model, const JointVector& q, const BoxError& e,
                     double damping) {
  Vec6 err;
  err.head<3>() = e.rotation_vec;
  err.tail<3>() = e.translation;
  const SpatialJacobian j = jacobian(model, q);
  const Eigen::Matrix<double, 6, 6> jjt =
      j * j.transpose() + damping * Eigen::Matrix<double, 6, 6>::Identity();
  const JointVector dq = j.transpose() * jjt.ldlt().solve(err);
  // Clamp the step to keep the linearisation honest near the target.
  const double max_step = 0.3;
  const double norm = dq.norm();
  const double scale = norm > max_step ? max_step / norm : 1.0;
  return clamp_to_limits(model, q + dq * scale);
}

}  // namespace

bool within_pose_box(const ChainModel& model, const Pose& target, const JointVector& q,
                     const IkOptions& opt, double fraction) {
  const BoxError e = box_error(target, forward_kinematics(model, q));
  return inside_box(e, opt, fraction);
}

IkResult project_to_feasible(const ChainModel& model, const Pose& target,
                             const JointVector& q_init, const IkOptions& opt) {
  IkResult res;
  JointVector q = clamp_to_limits(model, q_init);
  int it = 0;
  while (it < opt.max_iterations) {
    const BoxError e = box_error(target, forward_kinematics(model, q));
    if (inside_box(e, opt, opt.interior_fraction)) {
      res.status = IkStatus::kConverged;
      break;
    }
    q = dls_step(model, q, e, opt.damping);
    ++it;
  }
  const BoxError e = box_error(target, forward_kinematics(model, q));
  if (inside_box(e, opt, opt.interior_fraction)) res.status = IkStatus::kConverged;
  res.q = q;
  res.iterations = it;
  res.position_error = e.translation.cwiseAbs().maxCoeff();
  res.rotation_error = e.rotation_angle;
  res.seed_distance = (q - q_init).norm();
  return res;
}

IkResult solve_keyframe_ik(const ChainModel& model, const Pose& target, const JointVector& q0,
                           const IkOptions& opt) {
  // Phase 1: reach the interior of the constraint box.
  IkResult res = project_to_feasible(model, target, q0, opt);
  res.seed_distance = (res.q - q0).norm();
  if (res.status != IkStatus::kConverged) {
    res.status = IkStatus::kDiverged;
    return res;
  }

  // Phase 2: projected descent on ||q - q0||^2 inside the box. Each accepted
  // move must stay within check_fraction of the box after re-projection.
  int budget = opt.max_iterations - res.iterations;
  JointVector q = res.q;
  double alpha = 0.5;
  while (budget > 0 && alpha > 1e-3) {
    const JointVector cand0 = clamp_to_limits(model, q + alpha * (q0 - q));
    // Re-project: a few correction steps, only as many as needed.
    JointVector cand = cand0;
    bool ok = false;
    for (int k = 0; k < 8 && budget > 0; ++k) {
      const BoxError e = box_error(target, forward_kinematics(model, cand));
      if (inside_box(e, opt, opt.check_fraction)) {
        ok = true;
        break;
      }
      cand = dls_step(model, cand, e, opt.damping);
      --budget;
      ++res.iterations;
    }
    if (ok && (cand - q0).norm() < (q - q0).norm() - 1e-12) {
      q = cand;
    } else {
      alpha *= 0.5;
    }
    --budget;
  }

  const BoxError e = box_error(target, forward_kinematics(model, q));
  res.q = q;
  res.position_error = e.translation.cwiseAbs().maxCoeff();
  res.rotation_error = e.rotation_angle;
  res.seed_distance = (q - q0).norm();
  res.status = inside_box(e, opt, opt.check_fraction) ? IkStatus::kConverged : IkStatus::kDiverged;
  return res;
}

}  // namespace nutrunner
