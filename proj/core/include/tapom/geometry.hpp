#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <optional>
#include <vector>

#include "tapom/errors.hpp"
#include "tapom/rng.hpp"

namespace tapom::geom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

/// Rigid transform: position in meters, unit quaternion orientation.
struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  static Pose identity() { return Pose{}; }
  static Pose from_xyz_rpy(const Vec3& xyz, const Vec3& rpy);

  Vec3 apply(const Vec3& p) const { return orientation * p + position; }
  Pose compose(const Pose& rhs) const {
    return Pose{orientation * rhs.position + position,
                (orientation * rhs.orientation).normalized()};
  }
  Pose inverse() const {
    const Quat qi = orientation.conjugate();
    return Pose{qi * (-position), qi};
  }
  Eigen::Matrix3d rotation() const { return orientation.toRotationMatrix(); }
};

/// Geodesic angle between two orientations, in radians.
double orientation_angle(const Quat& a, const Quat& b);

enum class PrimitiveKind { Sphere, Capsule, Box };

/// Convex collision primitive. All lengths in meters and strictly positive.
/// Capsule axis is the local Z axis; the segment spans z in [-half_length,
/// +half_length]. Scene files may label a capsule "cylinder"; it is loaded
/// as a capsule of the same radius and half-length.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::Sphere;
  double radius = 0.0;          // sphere, capsule
  double half_length = 0.0;     // capsule
  Vec3 half_extents = Vec3::Zero();  // box

  static Primitive sphere(double r);
  static Primitive capsule(double r, double hl);
  static Primitive box(const Vec3& he);

  /// Radius of the smallest origin-centered bounding sphere.
  double bounding_radius() const;

  /// Extents of the local oriented bounding box, sorted descending.
  Vec3 obb_extents_sorted() const;

  /// Unit direction (local frame) of the longest OBB axis.
  Vec3 long_axis_local() const;
};

struct DistanceResult {
  double distance = 0.0;  // > 0 separated, 0 touching, < 0 penetrating
  Vec3 point_a = Vec3::Zero();
  Vec3 point_b = Vec3::Zero();
};

/// Signed distance and closest points between two posed primitives.
///
/// Separated shapes get exact closest points. Sphere/capsule pairs are
/// closed form; pairs involving a box run GJK support iteration (cap 64,
/// tolerance 1e-9). For overlap the magnitude is a penetration estimate
/// from a separating-axis sweep and the points are a witness pair only.
DistanceResult pairwise_distance(const Primitive& a, const Pose& pose_a,
                                 const Primitive& b, const Pose& pose_b);

/// Signed distance from a point to a posed primitive (< 0 inside).
double point_distance(const Vec3& p, const Primitive& prim, const Pose& pose);

/// Minimum signed distance from a 3-D segment to a posed primitive.
/// Exact for sphere and capsule; boxes are sampled at steps of at most
/// `box_step` along the segment.
double segment_distance(const Vec3& a, const Vec3& b, const Primitive& prim,
                        const Pose& pose, double box_step = 1e-3);

/// Axis-aligned bounds of a posed primitive.
Eigen::AlignedBox3d primitive_aabb(const Primitive& prim, const Pose& pose);

/// Plane n.x = offset with an orthonormal in-plane basis (u, v).
/// The normal is canonicalized so its first non-zero component is positive.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  Vec3 u = Vec3::UnitX();
  Vec3 v = Vec3::UnitY();

  /// 3-D point of in-plane coordinates (anchored at the projection of the
  /// world origin onto the plane).
  Vec3 lift(const Vec2& p) const { return normal * offset + u * p.x() + v * p.y(); }

  /// Signed distance of a 3-D point to the plane.
  double signed_distance(const Vec3& p) const { return normal.dot(p) - offset; }
};

struct PlaneFit {
  Plane plane;
  double residual_rms = 0.0;  // root-mean-square perpendicular distance
};

/// Least-squares plane through `points` (>= 3, not collinear).
/// Throws DegenerateInput when the centered covariance has rank < 2
/// (second singular value below 1e-9 relative to the first).
PlaneFit fit_plane(const std::vector<Vec3>& points);

/// In-plane coordinates of the orthogonal projection of `p`.
Vec2 project_to_plane(const Vec3& p, const Plane& plane);

/// Convex polygon, counter-clockwise, at least 3 vertices.
struct Polygon2D {
  std::vector<Vec2> vertices;
};

/// Convex hull (monotone chain). Collinear boundary points are dropped.
/// Throws DegenerateInput when the hull area is below 1e-12.
Polygon2D convex_hull_2d(std::vector<Vec2> points);

struct PolygonMeasures {
  double area = 0.0;
  Vec2 centroid = Vec2::Zero();
  double incircle_radius = 0.0;  // Chebyshev radius
  Vec2 incircle_center = Vec2::Zero();
};

/// Shoelace area, lamina centroid, and exact Chebyshev center/radius of a
/// convex CCW polygon.
PolygonMeasures polygon_measures(const Polygon2D& poly);

/// True when `p` is inside or on the polygon boundary (tolerance `tol`).
bool point_in_polygon(const Vec2& p, const Polygon2D& poly, double tol = 1e-12);

/// Polygon shrunk inward by `margin` (every edge offset toward the
/// interior). Empty optional when nothing remains.
std::optional<Polygon2D> shrink_polygon(const Polygon2D& poly, double margin);

/// Uniform point in the interior of a convex polygon.
Vec2 sample_in_polygon(const Polygon2D& poly, RngStream& rng);

/// Closest point on segment [a, b] to p.
Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b);

/// Closest points between segments [p1, q1] and [p2, q2].
void closest_points_segments(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                             const Vec3& q2, Vec3& c1, Vec3& c2);

/// Unit vector uniformly drawn from the spherical cap of half-angle
/// `max_angle` around `axis`.
Vec3 sample_direction_in_cone(const Vec3& axis, double max_angle,
                              RngStream& rng);

}  // namespace tapom::geom
