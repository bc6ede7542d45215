#pragma once

#include <vector>

#include "nutrunner/types.hpp"

namespace nutrunner {

// First-order-hold joint trajectory: linear interpolation between knots,
// piecewise-constant joint rates, clamped (zero rate) outside the time span.
class JointTrajectory {
 public:
  JointTrajectory() = default;

  // Breakpoints must be strictly increasing; at least one knot is required.
  JointTrajectory(std::vector<double> times, std::vector<JointVector> knots);

  struct Sample {
    JointVector position;
    JointVector velocity;
  };
  Sample sample(double t) const;

  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  size_t knot_count() const { return knots_.size(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<JointVector>& knots() const { return knots_; }

 private:
  std::vector<double> times_;
  std::vector<JointVector> knots_;
};

// Same idea for a scalar signal (gripper aperture command).
class ScalarTrajectory {
 public:
  ScalarTrajectory() = default;
  ScalarTrajectory(std::vector<double> times, std::vector<double> knots);
  double sample(double t) const;
  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& knots() const { return knots_; }

 private:
  std::vector<double> times_;
  std::vector<double> knots_;
};

}  // namespace nutrunner
