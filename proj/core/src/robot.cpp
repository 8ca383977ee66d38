#include "tapom/robot.hpp"

#include <cmath>

namespace tapom {

using geom::Pose;
using geom::Quat;
using geom::Vec3;

bool JointLimits::contains(const Configuration& q, double tol) const {
  if (q.size() != lo.size()) return false;
  for (int i = 0; i < q.size(); ++i)
    if (q[i] < lo[i] - tol || q[i] > hi[i] + tol) return false;
  return true;
}

Configuration JointLimits::clamp(const Configuration& q) const {
  return q.cwiseMax(lo).cwiseMin(hi);
}

RobotModel RobotModel::free_flyer(const JointLimits& limits,
                                  const geom::Primitive& object,
                                  const geom::Pose& grasp,
                                  std::vector<LinkGeometry> links) {
  RobotModel m;
  m.kind = RobotKind::FreeFlyer;
  m.limits = limits;
  m.attached_object = object;
  m.grasp = grasp;
  m.links = std::move(links);
  if (limits.lo.size() != 6) throw Error("free_flyer requires 6 limit rows");
  return m;
}

geom::Vec3 rotation_to_rpy(const Eigen::Matrix3d& R) {
  const double sp = -R(2, 0);
  const double pitch = std::asin(std::clamp(sp, -1.0, 1.0));
  double roll, yaw;
  if (std::abs(std::cos(pitch)) > 1e-9) {
    roll = std::atan2(R(2, 1), R(2, 2));
    yaw = std::atan2(R(1, 0), R(0, 0));
  } else {
    // Gimbal lock: fold everything into yaw.
    roll = 0.0;
    yaw = std::atan2(-R(0, 1), R(1, 1));
  }
  return Vec3(roll, pitch, yaw);
}

FkResult forward_kinematics(const RobotModel& model, const Configuration& q) {
  FkResult out;
  if (model.kind == RobotKind::FreeFlyer) {
    const Pose base = Pose::from_xyz_rpy(q.head<3>(), q.tail<3>());
    out.ee_pose = base;
    out.object_pose = base.compose(model.grasp);
    out.link_poses.reserve(model.links.size());
    for (const LinkGeometry& link : model.links)
      out.link_poses.push_back(base.compose(link.offset));
    return out;
  }

  std::vector<Pose> frames(model.joints.size());
  Pose cur;  // world base at identity
  for (size_t i = 0; i < model.joints.size(); ++i) {
    const SerialJoint& j = model.joints[i];
    Pose joint_rot;
    joint_rot.orientation = Quat(Eigen::AngleAxisd(q[static_cast<int>(i)],
                                                   j.axis.normalized()));
    cur = cur.compose(j.origin).compose(joint_rot);
    frames[i] = cur;
  }
  out.ee_pose = cur.compose(model.ee_offset);
  out.object_pose = out.ee_pose.compose(model.grasp);
  out.link_poses.reserve(model.links.size());
  for (const LinkGeometry& link : model.links) {
    const Pose parent = link.joint_index < 0
                            ? Pose{}
                            : frames[static_cast<size_t>(link.joint_index)];
    out.link_poses.push_back(parent.compose(link.offset));
  }
  return out;
}

namespace {

std::optional<Configuration> ik_free_flyer(const RobotModel& model,
                                           const Pose& target,
                                           const IkParams& params) {
  // base = target * grasp^{-1}, exactly.
  const Pose base = target.compose(model.grasp.inverse());
  Configuration q(6);
  q.head<3>() = base.position;
  q.tail<3>() = rotation_to_rpy(base.rotation());
  q = model.limits.clamp(q);
  const FkResult fk = forward_kinematics(model, q);
  const double pos_err = (fk.object_pose.position - target.position).norm();
  const double rot_err =
      geom::orientation_angle(fk.object_pose.orientation, target.orientation);
  if (std::max(pos_err, rot_err) > params.tol) return std::nullopt;
  return q;
}

// Geometric Jacobian of the object frame for a revolute serial chain.
Eigen::Matrix<double, 6, Eigen::Dynamic> object_jacobian(
    const RobotModel& model, const Configuration& q, const Vec3& obj_pos) {
  const int n = model.dof();
  Eigen::Matrix<double, 6, Eigen::Dynamic> J(6, n);
  Pose cur;
  for (int i = 0; i < n; ++i) {
    const SerialJoint& j = model.joints[static_cast<size_t>(i)];
    cur = cur.compose(j.origin);
    const Vec3 axis_world = cur.orientation * j.axis.normalized();
    const Vec3 origin_world = cur.position;
    J.block<3, 1>(0, i) = axis_world.cross(obj_pos - origin_world);
    J.block<3, 1>(3, i) = axis_world;
    Pose joint_rot;
    joint_rot.orientation = Quat(Eigen::AngleAxisd(q[i], j.axis.normalized()));
    cur = cur.compose(joint_rot);
  }
  return J;
}

Eigen::Matrix<double, 6, 1> pose_error_twist(const Pose& current,
                                             const Pose& target) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.position - current.position;
  const Quat dq = (target.orientation * current.orientation.conjugate()).normalized();
  Eigen::AngleAxisd aa(dq);
  double angle = aa.angle();
  if (angle > M_PI) angle -= 2.0 * M_PI;
  e.tail<3>() = aa.axis() * angle;
  return e;
}

std::optional<Configuration> ik_serial(const RobotModel& model,
                                       const Pose& target,
                                       const Configuration& seed,
                                       const IkParams& params) {
  Configuration q = model.limits.clamp(seed);
  double prev_err = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    const FkResult fk = forward_kinematics(model, q);
    const double pos_err = (fk.object_pose.position - target.position).norm();
    const double rot_err =
        geom::orientation_angle(fk.object_pose.orientation, target.orientation);
    const double err = std::max(pos_err, rot_err);
    if (err < params.tol) return q;

    if (prev_err - err < 1e-12) {
      if (++stall >= 10) return std::nullopt;
    } else {
      stall = 0;
    }
    prev_err = err;

    const auto J = object_jacobian(model, q, fk.object_pose.position);
    const auto e = pose_error_twist(fk.object_pose, target);
    Eigen::Matrix<double, 6, 6> JJt = J * J.transpose();
    JJt.diagonal().array() += params.damping * params.damping;
    Eigen::VectorXd dq = J.transpose() * JJt.ldlt().solve(e);
    const double step = dq.norm();
    if (step > params.step_clamp) dq *= params.step_clamp / step;
    q = model.limits.clamp(q + dq);
  }
  return std::nullopt;
}

}  // namespace

std::optional<Configuration> ik_solve(const RobotModel& model,
                                      const Pose& target,
                                      const Configuration& seed,
                                      const IkParams& params) {
  if (model.kind == RobotKind::FreeFlyer)
    return ik_free_flyer(model, target, params);
  return ik_serial(model, target, seed, params);
}

Configuration sample_configuration(const RobotModel& model, RngStream& rng) {
  const int n = model.limits.dof();
  Configuration q(n);
  for (int i = 0; i < n; ++i) q[i] = rng.uniform(model.limits.lo[i], model.limits.hi[i]);
  return q;
}

}  // namespace tapom
