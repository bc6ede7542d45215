#include "nutrunner/logs.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nutrunner {

std::string format_number(double v) {
  // Shortest representation that still round-trips exactly, so logs stay
  // bit-faithful without trailing representation noise.
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  if (std::strtod(buf, nullptr) != v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
  }
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) {
    throw std::logic_error("CSV row width does not match header");
  }
  rows_.push_back(std::move(cells));
}

std::string CsvTable::to_string() const {
  std::ostringstream out;
  for (size_t i = 0; i < header_.size(); ++i) {
    if (i) out << ',';
    out << header_[i];
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  return out.str();
}

void CsvTable::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << to_string();
}

namespace {

std::vector<std::string> joint_headers(const std::string& prefix) {
  std::vector<std::string> names;
  for (int i = 0; i < kDof; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

void append(std::vector<std::string>& cells, const JointVector& v) {
  for (int i = 0; i < kDof; ++i) cells.push_back(format_number(v[i]));
}

void append(std::vector<std::string>& cells, const Vec6& v) {
  for (int i = 0; i < 6; ++i) cells.push_back(format_number(v[i]));
}

}  // namespace

void write_state_log(const std::string& path, const std::vector<StateLogRow>& rows) {
  std::vector<std::string> header{"time"};
  for (const auto& h : joint_headers("q")) header.push_back(h);
  for (const auto& h : joint_headers("qdot")) header.push_back(h);
  for (const char* h : {"gripper_aperture", "nut_theta", "nut_theta_dot", "grasped", "wrench_mx",
                        "wrench_my", "wrench_mz", "wrench_fx", "wrench_fy", "wrench_fz", "stage",
                        "nut_y_advance", "turn"}) {
    header.push_back(h);
  }
  CsvTable table(header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{format_number(r.time)};
    append(cells, r.q);
    append(cells, r.qdot);
    cells.push_back(format_number(r.aperture));
    cells.push_back(format_number(r.nut_theta));
    cells.push_back(format_number(r.nut_theta_dot));
    cells.push_back(r.grasped ? "1" : "0");
    append(cells, r.wrench);
    cells.push_back(stage_name(r.stage));
    cells.push_back(format_number(r.nut_y_advance));
    cells.push_back(std::to_string(r.turn));
    table.add_row(std::move(cells));
  }
  table.write(path);
}

void write_controller_log(const std::string& path, const std::vector<ControllerLogRow>& rows) {
  std::vector<std::string> header{"time", "mode"};
  for (const auto& h : joint_headers("tau")) header.push_back(h);
  for (const char* h : {"err_alpha", "err_beta", "err_gamma", "err_tx", "err_ty", "err_tz",
                        "rho_mx", "rho_my", "rho_mz", "rho_fx", "rho_fy", "rho_fz", "rho_d2",
                        "ns_torque_norm"}) {
    header.push_back(h);
  }
  CsvTable table(header);
  for (const auto& r : rows) {
    std::vector<std::string> cells{format_number(r.time), control_mode_name(r.mode)};
    append(cells, r.tau);
    append(cells, r.task_error);
    append(cells, r.rho_s);
    cells.push_back(format_number(r.rho_d2));
    cells.push_back(format_number(r.ns_torque_norm));
    table.add_row(std::move(cells));
  }
  table.write(path);
}

void write_plan_dump(const std::string& path, const std::vector<PlanDumpRow>& rows) {
  CsvTable table({"stage", "index", "qw", "qx", "qy", "qz", "tx", "ty", "tz", "duration",
                  "gripper_action", "q0", "q1", "q2", "q3", "q4", "q5", "q6"});
  for (const auto& r : rows) {
    std::vector<std::string> cells{stage_name(r.stage), std::to_string(r.index)};
    const Eigen::Quaterniond& quat = r.pose.rotation;
    for (double v : {quat.w(), quat.x(), quat.y(), quat.z()}) cells.push_back(format_number(v));
    for (int i = 0; i < 3; ++i) cells.push_back(format_number(r.pose.translation[i]));
    cells.push_back(format_number(r.duration));
    cells.push_back(gripper_action_name(r.action));
    append(cells, r.q);
    table.add_row(std::move(cells));
  }
  table.write(path);
}

}  // namespace nutrunner
