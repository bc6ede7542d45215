#pragma once

#include <vector>

#include "nutrunner/logs.hpp"
#include "nutrunner/trajectory.hpp"
#include "nutrunner/world.hpp"

namespace nutrunner {

// One executed stage with its planned joint trajectory (trajectory time is
// local to the stage; t_begin/t_end are global).
struct StageWindow {
  Stage stage{Stage::kApproach};
  int turn{0};
  double t_begin{0.0};
  double t_end{0.0};
  JointTrajectory joints{std::vector<double>{0.0}, std::vector<JointVector>{JointVector::Zero()}};
};

struct PlannedTimeline {
  std::vector<StageWindow> windows;

  const StageWindow* window_at(double t) const;
};

// Signal-level metrics over one trial's state log.
struct SignalMetrics {
  double pitch_progress{0.0};  // final minus initial nut angle, rad

  // Fastening moment about the true thread axis (positive tightening),
  // evaluated over grasped samples inside screw windows.
  double mean_my{0.0};
  double mean_abs_my{0.0};
  double peak_abs_my{0.0};
  // Least-squares slope of the signed moment against window-relative time,
  // averaged over screw windows with at least min_slope_samples samples.
  double my_slope{0.0};
  std::vector<double> window_mean_abs_my;
  std::vector<double> window_peak_abs_my;
  std::vector<double> window_slopes;
  int grasped_samples{0};

  // Planned-vs-actual gripper pose error (all logged samples with a planned
  // window).
  double mean_translation_err{0.0};
  double peak_translation_err{0.0};
  double mean_rotation_err{0.0};
  double peak_rotation_err{0.0};
};

// Signed fastening moment about the thread axis implied by one log row
// (re-expresses the gripper-frame sensed wrench at the nut centre).
double fastening_moment(const ChainModel& model, const BoltModel& bolt, const StateLogRow& row);

SignalMetrics compute_metrics(const ChainModel& model, const BoltModel& bolt,
                              const std::vector<StateLogRow>& rows,
                              const PlannedTimeline& timeline, int min_slope_samples = 10);

}  // namespace nutrunner
