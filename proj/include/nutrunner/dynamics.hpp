#pragma once

#include "nutrunner/model.hpp"

namespace nutrunner {

// Joint torques required to realise qddot at state (q, qdot) under gravity:
// tau = M(q) qddot + C(q, qdot) qdot + g(q). Recursive Newton-Euler.
JointVector inverse_dynamics(const ChainModel& model, const JointVector& q,
                             const JointVector& qdot, const JointVector& qddot);

// C(q, qdot) qdot + g(q).
inline JointVector bias_forces(const ChainModel& model, const JointVector& q,
                               const JointVector& qdot) {
  return inverse_dynamics(model, q, qdot, JointVector::Zero());
}

// g(q).
inline JointVector gravity_torque(const ChainModel& model, const JointVector& q) {
  return inverse_dynamics(model, q, JointVector::Zero(), JointVector::Zero());
}

// Joint-space mass matrix via the composite-rigid-body algorithm. Symmetric
// positive definite for any valid model.
JointMatrix mass_matrix(const ChainModel& model, const JointVector& q);

// Total kinetic energy 0.5 qdot^T M qdot.
double kinetic_energy(const ChainModel& model, const JointVector& q, const JointVector& qdot);

// Total gravitational potential energy (zero level at world origin).
double potential_energy(const ChainModel& model, const JointVector& q);

}  // namespace nutrunner
