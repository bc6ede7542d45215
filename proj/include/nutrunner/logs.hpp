#pragma once

#include <string>
#include <vector>

#include "nutrunner/control.hpp"
#include "nutrunner/planner.hpp"
#include "nutrunner/stage.hpp"
#include "nutrunner/types.hpp"

namespace nutrunner {

// Shortest-round-trip decimal formatting (%.17g) so logs are byte-stable
// across runs and exactly reconstructible.
std::string format_number(double v);

// Minimal deterministic CSV assembly: fixed header, rows of preformatted
// cells, written in one shot.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  void write(const std::string& path) const;
  std::string to_string() const;

  size_t row_count() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// One state-log sample (world truth at a log step).
struct StateLogRow {
  double time{0.0};
  JointVector q{JointVector::Zero()};
  JointVector qdot{JointVector::Zero()};
  double aperture{0.0};
  double nut_theta{0.0};
  double nut_theta_dot{0.0};
  bool grasped{false};
  Wrench wrench{Wrench::Zero()};  // gripper frame, moments first
  Stage stage{Stage::kApproach};
  double nut_y_advance{0.0};
  int turn{0};
};

// One controller-log sample.
struct ControllerLogRow {
  double time{0.0};
  ControlMode mode{ControlMode::kStiffness};
  JointVector tau{JointVector::Zero()};
  Vec6 task_error{Vec6::Zero()};
  Wrench rho_s{Wrench::Zero()};  // manipuland frame
  double rho_d2{0.0};
  double ns_torque_norm{0.0};
};

// One keyframe of a plan dump.
struct PlanDumpRow {
  Stage stage{Stage::kApproach};
  int index{0};
  Pose pose;
  double duration{0.0};
  GripperAction action{GripperAction::kNone};
  JointVector q{JointVector::Zero()};
};

void write_state_log(const std::string& path, const std::vector<StateLogRow>& rows);
void write_controller_log(const std::string& path, const std::vector<ControllerLogRow>& rows);
void write_plan_dump(const std::string& path, const std::vector<PlanDumpRow>& rows);

}  // namespace nutrunner
