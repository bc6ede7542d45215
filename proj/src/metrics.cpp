#include "nutrunner/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace nutrunner {

const StageWindow* PlannedTimeline::window_at(double t) const {
  for (const auto& w : windows) {
    if (t >= w.t_begin - 1e-12 && t <= w.t_end + 1e-12) return &w;
  }
  return nullptr;
}

double fastening_moment(const ChainModel& model, const BoltModel& bolt, const StateLogRow& row) {
  const Pose grip = forward_kinematics(model, row.q);
  NutState nut;
  nut.theta = row.nut_theta;
  nut.y_advance = row.nut_y_advance;
  const Pose npose = nut_pose(bolt, nut);
  // Row wrench is gripper-frame at the gripper origin; move it to the nut
  // centre and read the component about the thread axis (+y of the nut).
  const Wrench at_nut = transport_wrench(row.wrench, grip.rotation.toRotationMatrix(),
                                         grip.translation, npose.rotation.toRotationMatrix(),
                                         npose.translation);
  return at_nut[1];
}

namespace {

double least_squares_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double denom = n * stt - st * st;
  if (std::abs(denom) < 1e-30) return 0.0;
  return (n * sty - st * sy) / denom;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

SignalMetrics compute_metrics(const ChainModel& model, const BoltModel& bolt,
                              const std::vector<StateLogRow>& rows,
                              const PlannedTimeline& timeline, int min_slope_samples) {
  SignalMetrics out;
  if (rows.empty()) return out;
  out.pitch_progress = rows.back().nut_theta - rows.front().nut_theta;

  // Fastening-moment statistics per screw window.
  std::vector<double> all_my;
  struct WindowSamples {
    std::vector<double> t;  // window-relative
    std::vector<double> my;
  };
  std::vector<const StageWindow*> screw_windows;
  std::vector<WindowSamples> samples;
  for (const auto& w : timeline.windows) {
    if (w.stage == Stage::kScrew) {
      screw_windows.push_back(&w);
      samples.emplace_back();
    }
  }

  double terr_sum = 0.0, rerr_sum = 0.0;
  int err_count = 0;
  for (const auto& row : rows) {
    const StageWindow* w = timeline.window_at(row.time);
    if (w != nullptr) {
      const Pose planned = forward_kinematics(model, w->joints.sample(row.time - w->t_begin).position);
      const Pose actual = forward_kinematics(model, row.q);
      const double terr = (planned.translation - actual.translation).norm();
      const double rerr = rotation_angle_between(planned.rotation.toRotationMatrix(),
                                                 actual.rotation.toRotationMatrix());
      terr_sum += terr;
      rerr_sum += rerr;
      ++err_count;
      out.peak_translation_err = std::max(out.peak_translation_err, terr);
      out.peak_rotation_err = std::max(out.peak_rotation_err, rerr);
    }

    if (!row.grasped || w == nullptr || w->stage != Stage::kScrew) continue;
    for (size_t i = 0; i < screw_windows.size(); ++i) {
      if (screw_windows[i] == w) {
        const double my = fastening_moment(model, bolt, row);
        samples[i].t.push_back(row.time - w->t_begin);
        samples[i].my.push_back(my);
        all_my.push_back(my);
        break;
      }
    }
  }

  if (err_count > 0) {
    out.mean_translation_err = terr_sum / err_count;
    out.mean_rotation_err = rerr_sum / err_count;
  }

  out.grasped_samples = static_cast<int>(all_my.size());
  if (!all_my.empty()) {
    out.mean_my = mean(all_my);
    double abs_sum = 0.0;
    for (double v : all_my) {
      abs_sum += std::abs(v);
      out.peak_abs_my = std::max(out.peak_abs_my, std::abs(v));
    }
    out.mean_abs_my = abs_sum / static_cast<double>(all_my.size());
  }

  for (const auto& s : samples) {
    if (s.t.empty()) continue;
    double peak = 0.0, sum = 0.0;
    for (double v : s.my) {
      peak = std::max(peak, std::abs(v));
      sum += std::abs(v);
    }
    out.window_mean_abs_my.push_back(sum / static_cast<double>(s.t.size()));
    out.window_peak_abs_my.push_back(peak);
    if (static_cast<int>(s.t.size()) >= min_slope_samples) {
      out.window_slopes.push_back(least_squares_slope(s.t, s.my));
    }
  }
  out.my_slope = mean(out.window_slopes);
  return out;
}

}  // namespace nutrunner
