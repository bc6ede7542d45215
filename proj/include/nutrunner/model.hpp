#pragma once

#include <array>
#include <string>

#include "nutrunner/pose.hpp"
#include "nutrunner/types.hpp"

namespace nutrunner {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One revolute joint + the link it carries. The link frame coincides with the
// joint frame after rotation; COM and inertia are expressed in that frame.
struct LinkParams {
  Pose offset;               // fixed transform: parent link frame -> joint frame at q = 0
  Vec3 axis{0.0, 0.0, 1.0};  // unit rotation axis in the joint/link frame
  double lower_limit{0.0};
  double upper_limit{0.0};
  double velocity_limit{0.0};
  double mass{0.0};
  Vec3 com{Vec3::Zero()};       // centre of mass in the link frame
  Mat3 inertia{Mat3::Zero()};   // rotational inertia about the COM, link frame
};

// Fixed-topology 7-joint serial chain with a tool ("gripper") frame attached
// to the last link. Loaded from a versioned plain-text parameter file.
struct ChainModel {
  std::array<LinkParams, kDof> links;
  Pose tool_offset;  // last link frame -> gripper frame G
  Vec3 gravity{0.0, 0.0, -9.81};

  JointVector lower_limits() const {
    JointVector v;
    for (int i = 0; i < kDof; ++i) v[i] = links[i].lower_limit;
    return v;
  }
  JointVector upper_limits() const {
    JointVector v;
    for (int i = 0; i < kDof; ++i) v[i] = links[i].upper_limit;
    return v;
  }
  bool within_limits(const JointVector& q, double slack = 0.0) const {
    for (int i = 0; i < kDof; ++i) {
      if (q[i] < links[i].lower_limit - slack || q[i] > links[i].upper_limit + slack) return false;
    }
    return true;
  }
};

// Parses the plain-text model format (see models/iiwa14.model). Validates
// masses, axis normalisation, limit ordering and inertia symmetry; throws
// ModelError with a line-oriented message on malformed input.
ChainModel load_chain_model(const std::string& path);

}  // namespace nutrunner
