#pragma once

#include "nutrunner/kinematics.hpp"

namespace nutrunner {

struct IkOptions {
  // Constraint box: per-axis translation error and geodesic rotation error.
  double position_tolerance{0.01};                   // m, component-wise
  double rotation_tolerance{0.5 * M_PI / 180.0};     // rad
  int max_iterations{200};                           // total Jacobian evaluations
  // The solver drives the pose into this fraction of the box before it starts
  // minimising distance to the seed, and never accepts points outside
  // check_fraction of the box, keeping audited solutions strictly interior.
  double interior_fraction{0.45};
  double check_fraction{0.9};
  double damping{1e-4};
};

enum class IkStatus { kConverged, kDiverged };

struct IkResult {
  IkStatus status{IkStatus::kDiverged};
  JointVector q{JointVector::Zero()};
  int iterations{0};
  double position_error{0.0};  // max per-axis |error|, m
  double rotation_error{0.0};  // geodesic, rad
  double seed_distance{0.0};   // ||q - q0||
};

// True when FK(q) lies within `fraction` of the constraint box around target.
bool within_pose_box(const ChainModel& model, const Pose& target, const JointVector& q,
                     const IkOptions& opt, double fraction);

// Constraint-seeking only: damped least-squares correction from q_init until
// the pose lies inside interior_fraction of the box (no seed-distance
// objective). Exposed separately so tests can generate independent feasible
// samples.
IkResult project_to_feasible(const ChainModel& model, const Pose& target,
                             const JointVector& q_init, const IkOptions& opt);

// Full keyframe solve: find q near q0 satisfying the pose box and joint
// limits, locally minimising ||q - q0||^2. Seeded at q0; fails with
// kDiverged when the iteration budget runs out before feasibility.
IkResult solve_keyframe_ik(const ChainModel& model, const Pose& target, const JointVector& q0,
                           const IkOptions& opt = {});

}  // namespace nutrunner
