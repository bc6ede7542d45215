#include "nutrunner/model.hpp"

#include <cmath>

#include "nutrunner/config.hpp"

namespace nutrunner {

namespace {

Pose parse_transform(const std::vector<double>& v) {
  Pose p;
  p.translation = Vec3(v[0], v[1], v[2]);
  p.rotation = Eigen::Quaterniond(v[3], v[4], v[5], v[6]);
  const double n = p.rotation.norm();
  if (std::abs(n - 1.0) > 1e-6) {
    throw ModelError("offset_transform quaternion is not unit length");
  }
  p.rotation.normalize();
  return p;
}

}  // namespace

ChainModel load_chain_model(const std::string& path) {
  KeyValueFile kv;
  try {
    kv = KeyValueFile::parse_file(path);
  } catch (const ConfigError& e) {
    throw ModelError(e.what());
  }

  ChainModel model;
  try {
    const int dof = static_cast<int>(kv.get_scalar("dof"));
    if (dof != kDof) {
      throw ModelError(path + ": expected dof = 7, got " + std::to_string(dof));
    }
    const auto g = kv.get_numbers("gravity", 3);
    model.gravity = Vec3(g[0], g[1], g[2]);

    for (int i = 0; i < kDof; ++i) {
      const std::string jp = "joint." + std::to_string(i + 1) + ".";
      const std::string lp = "link." + std::to_string(i + 1) + ".";
      LinkParams& link = model.links[i];

      link.offset = parse_transform(kv.get_numbers(jp + "offset_transform", 7));

      const auto ax = kv.get_numbers(jp + "axis", 3);
      link.axis = Vec3(ax[0], ax[1], ax[2]);
      if (std::abs(link.axis.norm() - 1.0) > 1e-9) {
        throw ModelError(path + ": " + jp + "axis must be a unit vector");
      }

      const auto lim = kv.get_numbers(jp + "limits", 2);
      link.lower_limit = lim[0];
      link.upper_limit = lim[1];
      if (!(link.lower_limit < link.upper_limit)) {
        throw ModelError(path + ": " + jp + "limits must satisfy lower < upper");
      }
      link.velocity_limit = kv.get_scalar(jp + "velocity_limit");
      if (link.velocity_limit <= 0.0) {
        throw ModelError(path + ": " + jp + "velocity_limit must be positive");
      }

      link.mass = kv.get_scalar(lp + "mass");
      if (link.mass <= 0.0) {
        throw ModelError(path + ": " + lp + "mass must be positive");
      }
      const auto com = kv.get_numbers(lp + "com", 3);
      link.com = Vec3(com[0], com[1], com[2]);

      const auto in = kv.get_numbers(lp + "inertia", 6);
      Mat3& ic = link.inertia;
      ic << in[0], in[3], in[4], in[3], in[1], in[5], in[4], in[5], in[2];
      const Eigen::SelfAdjointEigenSolver<Mat3> eig(ic);
      if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw ModelError(path + ": " + lp + "inertia must be positive definite");
      }
    }

    model.tool_offset = parse_transform(kv.get_numbers("tool.offset_transform", 7));
  } catch (const ConfigError& e) {
    throw ModelError(e.what());
  }
  return model;
}

}  // namespace nutrunner
