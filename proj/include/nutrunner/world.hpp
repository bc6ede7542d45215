#pragma once

#include "nutrunner/dynamics.hpp"
#include "nutrunner/kinematics.hpp"

namespace nutrunner {

struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thread resistance: kinetic (Coulomb) friction plus viscous drag. The
// Coulomb level grows instantaneously with the off-axis load transmitted
// through the grasp (pressing the nut sideways loads the thread flanks);
// the dependence is memoryless — no binding state is kept, and the extra
// friction vanishes the moment the lateral load does.
struct ResistanceModel {
  double coulomb{0.05};        // N*m at zero off-axis load
  double viscous{0.7};         // N*m*s/rad
  double load_friction{0.25};  // N*m of extra Coulomb drag per N of off-axis load
  double smooth_sign_eps{0.01};  // rad/s, Coulomb regularisation band
};

// Bolt fixed in the world; +y of base_pose is the thread axis. A nut at
// screw coordinate theta sits advanced by theta * pitch / (2*pi) along +y.
struct BoltModel {
  Pose base_pose;
  double thread_pitch{0.008};        // m per revolution
  double hex_across_corners{0.066};  // m
  double nut_inertia{1e-4};          // kg*m^2 about the thread axis
  ResistanceModel resistance;

  double across_flats() const { return hex_across_corners * std::sqrt(3.0) / 2.0; }
  Vec3 axis_world() const { return base_pose.rotation * Vec3::UnitY(); }
};

struct NutState {
  double theta{0.0};      // screw coordinate, rad (positive tightens)
  double theta_dot{0.0};  // rad/s
  double y_advance{0.0};  // m along +y of the bolt frame; theta*pitch/(2*pi)
};

// Pose of the nut frame in the world: bolt frame rotated by theta about +y
// and advanced along +y by the thread coupling.
Pose nut_pose(const BoltModel& bolt, const NutState& nut);

// Gripper grasp pose for hex direction k (0..5), expressed in the nut frame:
// origin at the nut centre, gripper +y pointing radially inward (approach),
// +z along the thread axis, fingers closing across a flat pair along +x.
Pose grasp_pose_in_nut(int direction);

struct GraspTolerances {
  double position{0.005};                     // m, gripper centre vs nut centre
  double axis_alignment{3.0 * M_PI / 180.0};  // rad, gripper z vs thread axis
  double yaw_alignment{3.0 * M_PI / 180.0};   // rad, fingers vs nearest flat pair
  double aperture_slack{0.002};               // m above across-flats
};

// Stiff coupling between gripper and nut while grasped. The screw coordinate
// itself is slaved to the gripper's rotation about the thread axis; the five
// remaining directions are held by a stiff spring/damper that transmits
// pressing loads.
struct GraspCoupling {
  double k_translation{20000.0};  // N/m
  double d_translation{250.0};    // N*s/m
  double k_rotation{150.0};       // N*m/rad (off-axis)
  double d_rotation{2.0};         // N*m*s/rad
  double load_radius{0.033};      // m, folds off-axis moments into the load measure
};

struct WorldParams {
  GraspCoupling coupling;
  GraspTolerances grasp_tolerances;
  double aperture_rate{0.12};   // m/s finger slew
  double release_band{0.002};   // m above across-flats that drops the grasp
  double latch_band{0.001};     // m above across-flats that can latch
  double max_aperture{0.10};    // m
};

// Bookkeeping captured when the grasp latches.
struct GraspAttachment {
  Pose grip_in_nut;           // gripper pose expressed in the nut frame at latch
  double theta_ddot{0.0};     // latest screw acceleration estimate
  double prev_theta_dot{0.0};
};

struct WorldState {
  JointVector q{JointVector::Zero()};
  JointVector qdot{JointVector::Zero()};
  double gripper_aperture{0.1};
  NutState nut;
  bool grasped{false};
  double time{0.0};
  GraspAttachment attach;
};

// Geometric + aperture graspability test: gripper centred on the nut, thread
// axis aligned, finger plane matching one of the three flat pairs, and the
// jaws within slack of the across-flats width.
bool grasp_check(const ChainModel& model, const WorldState& state, const BoltModel& bolt,
                 const GraspTolerances& tol = {});

// Pose-level variant used internally and by geometric sweeps (no aperture
// condition).
bool grasp_pose_check(const Pose& gripper, const BoltModel& bolt, const NutState& nut,
                      const GraspTolerances& tol = {});

// Latches the grasp in place from the current state (test/setup helper):
// captures the attachment at the current gripper pose and seats the jaws.
void force_latch(const ChainModel& model, const BoltModel& bolt, WorldState& state);

// Wrench the gripper currently applies to the nut through the grasp
// (moments first), expressed in the gripper frame about the gripper origin.
// Zero while not grasped. This is the simulated F/T sensor reading.
Wrench sense_wrench(const ChainModel& model, const BoltModel& bolt, const WorldParams& params,
                    const WorldState& state);

// Advances the world by one semi-implicit Euler step under joint torques tau
// and a gripper aperture command. Handles grasp latch/release, slaves the
// nut's screw coordinate to the gripper rotation while grasped, and maps the
// grasp reaction back onto the arm through the Jacobian transpose.
// Throws NonFiniteError if torques or the resulting state are not finite.
void step(const ChainModel& model, const BoltModel& bolt, const WorldParams& params,
          WorldState& state, const JointVector& tau, double aperture_cmd, double dt);

}  // namespace nutrunner
