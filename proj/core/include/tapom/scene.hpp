#pragma once

#include <string>
#include <vector>

#include "tapom/geometry.hpp"
#include "tapom/robot.hpp"

namespace tapom {

struct SubObstacle {
  std::string id;
  geom::Primitive shape;
  geom::Pose pose;
  int parent = -1;  // index into Scene::obstacles
};

struct Obstacle {
  std::string id;
  std::vector<int> sub_indices;
};

struct ContactAnnotation {
  std::string a, b;
  geom::Vec3 point;
};

/// A fully validated scene: segmented obstacles, robot, endpoints.
/// Segmentation is an input; the file carries the decomposition.
struct Scene {
  Eigen::AlignedBox3d workspace;
  RobotModel robot;
  Configuration start, goal;
  std::vector<Obstacle> obstacles;
  std::vector<SubObstacle> subs;  // flattened, in file order
  std::vector<ContactAnnotation> contacts;

  int sub_index(const std::string& id) const;  // -1 when unknown
};

/// Parse a scene from JSON text (schema_version 1, unknown fields rejected).
/// Throws ParseError, SchemaError, or InvalidEndpoint.
Scene parse_scene(const std::string& json_text);

Scene load_scene_file(const std::string& path);

/// The collision function: single source of truth for the free space.
/// Read-only after construction; safe for concurrent queries.
class ValidityChecker {
 public:
  /// `resolution` is the interpolation spacing for segment checks as a
  /// fraction of the joint-range diagonal.
  ValidityChecker(const Scene& scene, double clearance_margin,
                  double resolution);

  /// True iff every robot link and the attached object clears every
  /// sub-obstacle by more than the margin and stays inside the workspace.
  /// Out-of-limit configurations are invalid, not an error.
  bool config_valid(const Configuration& q) const;

  /// Object-only check at a task-space pose (ignores the robot body and
  /// the workspace box).
  bool pose_valid(const geom::Pose& p) const;

  /// Straight C-space segment check at the configured resolution,
  /// endpoints included.
  bool segment_valid(const Configuration& q1, const Configuration& q2) const;

  /// Same with an explicit resolution fraction (used for re-validation at
  /// finer resolutions).
  bool segment_valid_at(const Configuration& q1, const Configuration& q2,
                        double resolution) const;

  /// True iff the straight 3-D segment keeps distance > margin from every
  /// sub-obstacle.
  bool workspace_segment_free(const geom::Vec3& x1, const geom::Vec3& x2) const;

  /// Signed clearance of a world point against all sub-obstacles.
  double point_clearance(const geom::Vec3& p) const;

  double resolution() const { return resolution_; }
  double clearance_margin() const { return margin_; }
  double range_diagonal() const { return range_diag_; }
  const Scene& scene() const { return *scene_; }

 private:
  bool body_valid(const geom::Primitive& shape, const geom::Pose& pose,
                  bool check_workspace) const;

 private:
  const Scene* scene_;
  double margin_;
  double resolution_;
  double range_diag_;
  std::vector<Eigen::AlignedBox3d> sub_aabbs_;
};

}  // namespace tapom
