#include "nutrunner/trajectory.hpp"

#include <algorithm>
#include <stdexcept>

namespace nutrunner {

namespace {

void check_times(const std::vector<double>& times, size_t knot_count) {
  if (times.empty() || times.size() != knot_count) {
    throw std::invalid_argument("trajectory: times/knots size mismatch or empty");
  }
  for (size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("trajectory: breakpoints must be strictly increasing");
    }
  }
}

// Index of the segment containing t (last breakpoint <= t, capped).
size_t segment_index(const std::vector<double>& times, double t) {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return std::min(static_cast<size_t>(it - times.begin() - 1), times.size() - 2);
}

}  // namespace

JointTrajectory::JointTrajectory(std::vector<double> times, std::vector<JointVector> knots)
    : times_(std::move(times)), knots_(std::move(knots)) {
  check_times(times_, knots_.size());
}

JointTrajectory::Sample JointTrajectory::sample(double t) const {
  Sample s;
  if (knots_.size() == 1 || t <= times_.front()) {
    s.position = knots_.front();
    s.velocity = JointVector::Zero();
    return s;
  }
  if (t >= times_.back()) {
    s.position = knots_.back();
    s.velocity = JointVector::Zero();
    return s;
  }
  const size_t k = segment_index(times_, t);
  const double dt = times_[k + 1] - times_[k];
  const double u = (t - times_[k]) / dt;
  s.velocity = (knots_[k + 1] - knots_[k]) / dt;
  s.position = knots_[k] + u * (knots_[k + 1] - knots_[k]);
  return s;
}

ScalarTrajectory::ScalarTrajectory(std::vector<double> times, std::vector<double> knots)
    : times_(std::move(times)), knots_(std::move(knots)) {
  check_times(times_, knots_.size());
}

double ScalarTrajectory::sample(double t) const {
  if (knots_.size() == 1 || t <= times_.front()) return knots_.front();
  if (t >= times_.back()) return knots_.back();
  const size_t k = segment_index(times_, t);
  const double u = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return knots_[k] + u * (knots_[k + 1] - knots_[k]);
}

}  // namespace nutrunner
