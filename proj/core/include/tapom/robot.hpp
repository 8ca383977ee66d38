#pragma once

#include <optional>
#include <vector>

#include "tapom/geometry.hpp"
#include "tapom/rng.hpp"

namespace tapom {

using Configuration = Eigen::VectorXd;

enum class RobotKind { FreeFlyer, SerialArm };

struct JointLimits {
  Eigen::VectorXd lo, hi;

  int dof() const { return static_cast<int>(lo.size()); }
  double range_diagonal() const { return (hi - lo).norm(); }
  bool contains(const Configuration& q, double tol = 0.0) const;
  Configuration clamp(const Configuration& q) const;
  Configuration midpoint() const { return 0.5 * (lo + hi); }
};

/// Collision geometry attached to a frame of the kinematic chain.
/// joint_index -1 attaches to the base frame (free flyer body).
struct LinkGeometry {
  geom::Primitive shape;
  geom::Pose offset;
  int joint_index = -1;
};

struct SerialJoint {
  geom::Pose origin;             // fixed transform from the parent joint frame
  geom::Vec3 axis = geom::Vec3::UnitZ();  // revolute axis in the joint frame
};

/// Robot model. Two kinds:
///
///  - free_flyer: q = (x, y, z, roll, pitch, yaw); the base pose is q itself
///    and the grasped object rides at base * grasp. Euler angles keep
///    C-space interpolation linear; the gimbal-lock region at pitch = +-pi/2
///    is accepted at desk scale.
///  - serial_arm: revolute chain; frame i is
///    parent * origin_i * Rot(axis_i, q_i), the end effector sits at
///    last_frame * ee_offset, and the object at ee * grasp.
///
/// Models are immutable after construction; all queries here are pure.
struct RobotModel {
  RobotKind kind = RobotKind::FreeFlyer;
  JointLimits limits;
  std::vector<SerialJoint> joints;  // serial_arm only
  geom::Pose ee_offset;             // serial_arm only
  std::vector<LinkGeometry> links;
  geom::Primitive attached_object = geom::Primitive::sphere(1e-3);
  geom::Pose grasp;

  int dof() const {
    return kind == RobotKind::FreeFlyer ? 6 : static_cast<int>(joints.size());
  }

  /// True for dimensions that are translations (free-flyer x, y, z).
  bool dimension_is_translation(int i) const {
    return kind == RobotKind::FreeFlyer && i < 3;
  }

  /// Half of the second-largest extent of the object's oriented bounding
  /// box: the radius an opening must clear for the object to pass.
  double object_required_radius() const {
    return 0.5 * attached_object.obb_extents_sorted()(1);
  }

  static RobotModel free_flyer(const JointLimits& limits,
                               const geom::Primitive& object,
                               const geom::Pose& grasp = {},
                               std::vector<LinkGeometry> links = {});
};

struct FkResult {
  std::vector<geom::Pose> link_poses;
  geom::Pose object_pose;
  geom::Pose ee_pose;
};

FkResult forward_kinematics(const RobotModel& model, const Configuration& q);

struct IkParams {
  double tol = 1e-4;        // max(position error m, orientation error rad)
  int max_iters = 200;
  double damping = 1e-2;    // damped-least-squares lambda
  double step_clamp = 0.2;  // per-iteration step norm bound
};

/// Object-frame inverse kinematics. Free flyer is algebraic; serial arm
/// runs damped least squares on the pose-error twist. Returns nullopt when
/// iteration stalls (error decrease < 1e-12 across 10 iterations) or the
/// iteration cap is reached. Never returns a configuration outside limits.
std::optional<Configuration> ik_solve(const RobotModel& model,
                                      const geom::Pose& target,
                                      const Configuration& seed,
                                      const IkParams& params = {});

/// Uniform per-dimension sample within the joint limits.
Configuration sample_configuration(const RobotModel& model, RngStream& rng);

/// Roll-pitch-yaw of a rotation (R = Rz(yaw) Ry(pitch) Rx(roll)).
geom::Vec3 rotation_to_rpy(const Eigen::Matrix3d& R);

}  // namespace tapom
