#include "nutrunner/dynamics.hpp"

#include "nutrunner/kinematics.hpp"

namespace nutrunner {

namespace {

// Per-joint transform pieces for the recursions: rotation of link i relative
// to its parent at the current joint angle, and the joint origin expressed in
// the parent frame.
struct JointFrame {
  Mat3 r;   // parent <- link i
  Vec3 p;   // joint origin in parent frame
};

std::array<JointFrame, kDof> joint_frames(const ChainModel& model, const JointVector& q) {
  std::array<JointFrame, kDof> out;
  for (int i = 0; i < kDof; ++i) {
    const LinkParams& l = model.links[i];
    out[i].r = l.offset.matrix() * axis_angle(l.axis, q[i]);
    out[i].p = l.offset.translation;
  }
  return out;
}

}  // namespace

JointVector inverse_dynamics(const ChainModel& model, const JointVector& q,
                             const JointVector& qdot, const JointVector& qddot) {
  const auto jf = joint_frames(model, q);

  // Forward pass: velocities and accelerations in link coordinates. Gravity
  // enters as a fictitious base acceleration of -g.
  std::array<Vec3, kDof> w, wd, a;
  Vec3 w_p = Vec3::Zero();
  Vec3 wd_p = Vec3::Zero();
  Vec3 a_p = -model.gravity;
  for (int i = 0; i < kDof; ++i) {
    const Vec3& axis = model.links[i].axis;
    const Mat3 rt = jf[i].r.transpose();
    const Vec3 w_in = rt * w_p;
    w[i] = w_in + qdot[i] * axis;
    wd[i] = rt * wd_p + w_in.cross(qdot[i] * axis) + qddot[i] * axis;
    a[i] = rt * (a_p + wd_p.cross(jf[i].p) + w_p.cross(w_p.cross(jf[i].p)));
    w_p = w[i];
    wd_p = wd[i];
    a_p = a[i];
  }

  // Backward pass: forces and moments, projected on the joint axes.
  JointVector tau;
  Vec3 f_child = Vec3::Zero();
  Vec3 n_child = Vec3::Zero();
  for (int i = kDof - 1; i >= 0; --i) {
    const LinkParams& l = model.links[i];
    const Vec3 a_com = a[i] + wd[i].cross(l.com) + w[i].cross(w[i].cross(l.com));
    const Vec3 f_inertial = l.mass * a_com;
    const Vec3 n_inertial = l.inertia * wd[i] + w[i].cross(l.inertia * w[i]);

    Vec3 f = f_inertial;
    Vec3 n = n_inertial + l.com.cross(f_inertial);
    if (i + 1 < kDof) {
      const Vec3 f_c = jf[i + 1].r * f_child;
      f += f_c;
      n += jf[i + 1].r * n_child + jf[i + 1].p.cross(f_c);
    }
    tau[i] = l.axis.dot(n);
    f_child = f;
    n_child = n;
  }
  return tau;
}

JointMatrix mass_matrix(const ChainModel& model, const JointVector& q) {
  const auto jf = joint_frames(model, q);

  // Composite bodies described by mass, first moment h = m*c and inertia
  // about the link-frame origin, all in link coordinates.
  struct Composite {
    double m;
    Vec3 h;
    Mat3 io;
  };
  std::array<Composite, kDof> comp;
  for (int i = 0; i < kDof; ++i) {
    const LinkParams& l = model.links[i];
    comp[i].m = l.mass;
    comp[i].h = l.mass * l.com;
    const Mat3 cx = skew(l.com);
    comp[i].io = l.inertia - l.mass * cx * cx;
  }

  JointMatrix m = JointMatrix::Zero();
  for (int i = kDof - 1; i >= 0; --i) {
    // Spatial force at link i's origin from a unit acceleration about axis i.
    const Vec3& axis = model.links[i].axis;
    Vec3 n = comp[i].io * axis;
    Vec3 f = axis.cross(comp[i].h);
    m(i, i) = axis.dot(n);

    // Walk the force up the chain, projecting on each ancestor axis.
    for (int j = i - 1; j >= 0; --j) {
      const Vec3 f_p = jf[j + 1].r * f;
      n = jf[j + 1].r * n + jf[j + 1].p.cross(f_p);
      f = f_p;
      m(j, i) = model.links[j].axis.dot(n);
      m(i, j) = m(j, i);
    }

    // Fold composite i into its parent.
    if (i > 0) {
      const Mat3& r = jf[i].r;
      const Vec3& p = jf[i].p;
      const Vec3 rh = r * comp[i].h;
      const Mat3 px = skew(p);
      const Mat3 rhx = skew(rh);
      comp[i - 1].m += comp[i].m;
      comp[i - 1].h += rh + comp[i].m * p;
      comp[i - 1].io += r * comp[i].io * r.transpose() - rhx * px - px * rhx - comp[i].m * px * px;
    }
  }
  return m;
}

double kinetic_energy(const ChainModel& model, const JointVector& q, const JointVector& qdot) {
  return 0.5 * qdot.dot(mass_matrix(model, q) * qdot);
}

double potential_energy(const ChainModel& model, const JointVector& q) {
  const auto coms = com_positions(model, q);
  double v = 0.0;
  for (int i = 0; i < kDof; ++i) v -= model.links[i].mass * model.gravity.dot(coms[i]);
  return v;
}

}  // namespace nutrunner
