#include "tapom/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace tapom::geom {

namespace {

constexpr double kGjkTol = 1e-9;
constexpr int kGjkMaxIters = 64;

}  // namespace

// ---------------------------------------------------------------------------
// Pose
// ---------------------------------------------------------------------------

Pose Pose::from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  const Quat q = Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
                 Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                 Eigen::AngleAxisd(rpy.x(), Vec3::UnitX());
  return Pose{xyz, q.normalized()};
}

double orientation_angle(const Quat& a, const Quat& b) {
  const Quat d = a.conjugate() * b;
  const double s = Vec3(d.x(), d.y(), d.z()).norm();
  const double c = std::abs(d.w());
  return 2.0 * std::atan2(s, c);
}

// ---------------------------------------------------------------------------
// Primitive
// ---------------------------------------------------------------------------

Primitive Primitive::sphere(double r) {
  if (!(r > 0)) throw Error("sphere radius must be > 0");
  Primitive p;
  p.kind = PrimitiveKind::Sphere;
  p.radius = r;
  return p;
}

Primitive Primitive::capsule(double r, double hl) {
  if (!(r > 0) || !(hl > 0)) throw Error("capsule radius and half_length must be > 0");
  Primitive p;
  p.kind = PrimitiveKind::Capsule;
  p.radius = r;
  p.half_length = hl;
  return p;
}

Primitive Primitive::box(const Vec3& he) {
  if (!(he.x() > 0) || !(he.y() > 0) || !(he.z() > 0))
    throw Error("box half_extents must be > 0");
  Primitive p;
  p.kind = PrimitiveKind::Box;
  p.half_extents = he;
  return p;
}

double Primitive::bounding_radius() const {
  switch (kind) {
    case PrimitiveKind::Sphere:
      return radius;
    case PrimitiveKind::Capsule:
      return half_length + radius;
    case PrimitiveKind::Box:
      return half_extents.norm();
  }
  return 0.0;
}

Vec3 Primitive::obb_extents_sorted() const {
  Vec3 e;
  switch (kind) {
    case PrimitiveKind::Sphere:
      e = Vec3::Constant(2.0 * radius);
      break;
    case PrimitiveKind::Capsule:
      e = Vec3(2.0 * radius, 2.0 * radius, 2.0 * (half_length + radius));
      break;
    case PrimitiveKind::Box:
      e = 2.0 * half_extents;
      break;
  }
  std::array<double, 3> s{e.x(), e.y(), e.z()};
  std::sort(s.begin(), s.end(), std::greater<>());
  return Vec3(s[0], s[1], s[2]);
}

Vec3 Primitive::long_axis_local() const {
  if (kind == PrimitiveKind::Box) {
    int i;
    half_extents.maxCoeff(&i);
    return Vec3::Unit(i);
  }
  return Vec3::UnitZ();
}

// ---------------------------------------------------------------------------
// Closest-point helpers
// ---------------------------------------------------------------------------

Vec3 closest_point_on_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0) return a;
  const double t = std::clamp(ab.dot(p - a) / len2, 0.0, 1.0);
  return a + t * ab;
}

void closest_points_segments(const Vec3& p1, const Vec3& q1, const Vec3& p2,
                             const Vec3& q2, Vec3& c1, Vec3& c2) {
  const Vec3 d1 = q1 - p1;
  const Vec3 d2 = q2 - p2;
  const Vec3 r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s, t;
  if (a <= 1e-30 && e <= 1e-30) {
    s = t = 0.0;
  } else if (a <= 1e-30) {
    s = 0.0;
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= 1e-30) {
      t = 0.0;
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > 1e-30 ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  c1 = p1 + s * d1;
  c2 = p2 + t * d2;
}

namespace {

void capsule_segment(const Primitive& c, const Pose& pose, Vec3& a, Vec3& b) {
  const Vec3 axis = pose.orientation * Vec3::UnitZ();
  a = pose.position - axis * c.half_length;
  b = pose.position + axis * c.half_length;
}

// Signed distance from a world point to a posed box, with the closest
// surface point. Negative inside.
double point_box(const Vec3& p, const Pose& pose, const Vec3& he, Vec3& on_box) {
  const Vec3 q = pose.orientation.conjugate() * (p - pose.position);
  const Vec3 clamped = q.cwiseMax(-he).cwiseMin(he);
  if ((q - clamped).squaredNorm() > 0) {
    on_box = pose.apply(clamped);
    return (q - clamped).norm();
  }
  // Inside: distance to the nearest face.
  int face = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double d = he[i] - std::abs(q[i]);
    if (d < best) {
      best = d;
      face = i;
    }
  }
  Vec3 surf = q;
  surf[face] = q[face] >= 0 ? he[face] : -he[face];
  on_box = pose.apply(surf);
  return -best;
}

// ---------------------------------------------------------------------------
// GJK distance between convex supports (segment / box), with witness points.
// ---------------------------------------------------------------------------

struct SupportShape {
  enum Kind { Segment, Box } kind;
  Vec3 a, b;  // segment endpoints (world)
  Pose pose;  // box pose
  Vec3 he;    // box half extents
  Vec3 center;

  static SupportShape segment(const Vec3& a, const Vec3& b) {
    SupportShape s;
    s.kind = Segment;
    s.a = a;
    s.b = b;
    s.center = 0.5 * (a + b);
    return s;
  }
  static SupportShape box(const Pose& pose, const Vec3& he) {
    SupportShape s;
    s.kind = Box;
    s.pose = pose;
    s.he = he;
    s.center = pose.position;
    return s;
  }

  Vec3 support(const Vec3& d) const {
    if (kind == Segment) return d.dot(b - a) >= 0 ? b : a;
    const Vec3 dl = pose.orientation.conjugate() * d;
    const Vec3 s(dl.x() >= 0 ? he.x() : -he.x(), dl.y() >= 0 ? he.y() : -he.y(),
                 dl.z() >= 0 ? he.z() : -he.z());
    return pose.apply(s);
  }
};

struct SimplexVertex {
  Vec3 w;  // support of A - B
  Vec3 pa, pb;
};

struct Simplex {
  std::array<SimplexVertex, 4> v;
  std::array<double, 4> lambda{};
  int size = 0;
};

// Closest point to the origin on the current simplex; reduces the simplex
// to the supporting feature and fills barycentric weights.
Vec3 closest_on_simplex(Simplex& s) {
  auto keep = [&](std::initializer_list<int> idx,
                  std::initializer_list<double> lam) {
    Simplex out;
    int k = 0;
    auto it = lam.begin();
    for (int i : idx) {
      out.v[k] = s.v[i];
      out.lambda[k] = *it++;
      ++k;
    }
    out.size = k;
    s = out;
  };

  if (s.size == 1) {
    s.lambda[0] = 1.0;
    return s.v[0].w;
  }

  if (s.size == 2) {
    const Vec3 a = s.v[0].w, b = s.v[1].w;
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0 ? std::clamp(-a.dot(ab) / len2, 0.0, 1.0) : 0.0;
    if (t <= 0) {
      keep({0}, {1.0});
      return a;
    }
    if (t >= 1) {
      keep({1}, {1.0});
      return b;
    }
    keep({0, 1}, {1.0 - t, t});
    return a + t * ab;
  }

  if (s.size == 3) {
    const Vec3 a = s.v[0].w, b = s.v[1].w, c = s.v[2].w;
    const Vec3 ab = b - a, ac = c - a, ap = -a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) {
      keep({0}, {1.0});
      return a;
    }
    const Vec3 bp = -b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) {
      keep({1}, {1.0});
      return b;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
      const double t = d1 / (d1 - d3);
      keep({0, 1}, {1.0 - t, t});
      return a + t * ab;
    }
    const Vec3 cp = -c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) {
      keep({2}, {1.0});
      return c;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
      const double t = d2 / (d2 - d6);
      keep({0, 2}, {1.0 - t, t});
      return a + t * ac;
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
      const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
      keep({1, 2}, {1.0 - t, t});
      return b + t * (c - b);
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    keep({0, 1, 2}, {1.0 - v - w, v, w});
    return a + ab * v + ac * w;
  }

  // Tetrahedron: if the origin is inside, signal overlap by returning zero.
  const Vec3 a = s.v[0].w, b = s.v[1].w, c = s.v[2].w, d = s.v[3].w;
  auto outside = [](const Vec3& p0, const Vec3& p1, const Vec3& p2,
                    const Vec3& opposite) {
    const Vec3 n = (p1 - p0).cross(p2 - p0);
    const double signp = n.dot(-p0);
    const double signd = n.dot(opposite - p0);
    return signp * signd < 0;
  };
  const bool out_abc = outside(a, b, c, d);
  const bool out_abd = outside(a, b, d, c);
  const bool out_acd = outside(a, c, d, b);
  const bool out_bcd = outside(b, c, d, a);
  if (!out_abc && !out_abd && !out_acd && !out_bcd) {
    s.lambda = {0.25, 0.25, 0.25, 0.25};
    return Vec3::Zero();
  }

  double best = std::numeric_limits<double>::infinity();
  Simplex best_simplex;
  Vec3 best_point = Vec3::Zero();
  const std::array<std::array<int, 3>, 4> faces{
      {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
  const std::array<bool, 4> face_out{out_abc, out_abd, out_acd, out_bcd};
  for (int f = 0; f < 4; ++f) {
    if (!face_out[f]) continue;
    Simplex sub;
    sub.size = 3;
    for (int i = 0; i < 3; ++i) sub.v[i] = s.v[faces[f][i]];
    const Vec3 p = closest_on_simplex(sub);
    const double d2 = p.squaredNorm();
    if (d2 < best) {
      best = d2;
      best_simplex = sub;
      best_point = p;
    }
  }
  s = best_simplex;
  return best_point;
}

struct GjkOutcome {
  double distance = 0.0;
  Vec3 pa = Vec3::Zero();
  Vec3 pb = Vec3::Zero();
  bool overlap = false;
};

GjkOutcome gjk_distance(const SupportShape& A, const SupportShape& B) {
  Simplex s;
  Vec3 d = A.center - B.center;
  if (d.squaredNorm() < 1e-24) d = Vec3::UnitX();
  {
    const Vec3 pa = A.support(d), pb = B.support(-d);
    s.v[0] = {pa - pb, pa, pb};
    s.size = 1;
  }

  GjkOutcome out;
  for (int iter = 0; iter < kGjkMaxIters; ++iter) {
    const Vec3 p = closest_on_simplex(s);
    const double dist = p.norm();
    if (dist < kGjkTol) {
      out.overlap = true;
      return out;
    }
    const Vec3 dir = -p / dist;
    const Vec3 pa = A.support(dir), pb = B.support(-dir);
    const Vec3 w = pa - pb;
    // Lower bound on the distance from the new supporting plane.
    const double lower = -dir.dot(w);
    if (dist - lower <= kGjkTol * std::max(1.0, dist) || s.size == 4) {
      out.distance = dist;
      out.pa = Vec3::Zero();
      out.pb = Vec3::Zero();
      for (int i = 0; i < s.size; ++i) {
        out.pa += s.lambda[i] * s.v[i].pa;
        out.pb += s.lambda[i] * s.v[i].pb;
      }
      return out;
    }
    s.v[s.size] = {w, pa, pb};
    ++s.size;
  }

  const Vec3 p = closest_on_simplex(s);
  out.distance = p.norm();
  for (int i = 0; i < s.size; ++i) {
    out.pa += s.lambda[i] * s.v[i].pa;
    out.pb += s.lambda[i] * s.v[i].pb;
  }
  out.overlap = out.distance < kGjkTol;
  return out;
}

// ---------------------------------------------------------------------------
// Separating-axis penetration depth (exact for box-box and segment-box).
// ---------------------------------------------------------------------------

double project_radius_box(const Vec3& axis, const Pose& pose, const Vec3& he) {
  const Eigen::Matrix3d R = pose.rotation();
  return he.x() * std::abs(axis.dot(R.col(0))) +
         he.y() * std::abs(axis.dot(R.col(1))) +
         he.z() * std::abs(axis.dot(R.col(2)));
}

double sat_penetration(const std::vector<Vec3>& axes, const Vec3& delta,
                       const SupportShape& A, const SupportShape& B,
                       Vec3& best_axis) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec3& raw : axes) {
    const double n = raw.norm();
    if (n < 1e-9) continue;
    const Vec3 axis = raw / n;
    auto radius = [&](const SupportShape& s) {
      if (s.kind == SupportShape::Box) return project_radius_box(axis, s.pose, s.he);
      return 0.5 * std::abs(axis.dot(s.b - s.a));
    };
    const double overlap = radius(A) + radius(B) - std::abs(delta.dot(axis));
    if (overlap < best) {
      best = overlap;
      best_axis = axis.dot(delta) >= 0 ? axis : Vec3(-axis);
    }
  }
  return std::max(best, 0.0);
}

std::vector<Vec3> box_axes(const Pose& pose) {
  const Eigen::Matrix3d R = pose.rotation();
  return {R.col(0), R.col(1), R.col(2)};
}

// Distance between a segment and a box: GJK when separated, SAT depth when
// intersecting. Witness points are closest points (separated) or a pair on
// the minimal translation axis (overlap).
double segment_box_distance(const Vec3& a, const Vec3& b, const Pose& pose,
                            const Vec3& he, Vec3& on_seg, Vec3& on_box) {
  const SupportShape seg = SupportShape::segment(a, b);
  const SupportShape box = SupportShape::box(pose, he);
  const GjkOutcome g = gjk_distance(seg, box);
  if (!g.overlap) {
    on_seg = g.pa;
    on_box = g.pb;
    return g.distance;
  }
  std::vector<Vec3> axes = box_axes(pose);
  const Vec3 dir = b - a;
  for (const Vec3& u : box_axes(pose)) axes.push_back(dir.cross(u));
  Vec3 axis;
  const double pen = sat_penetration(axes, box.center - seg.center, seg, box, axis);
  on_seg = seg.support(axis);
  on_box = box.support(-axis);
  return -pen;
}

double box_box_distance(const Pose& pa, const Vec3& ha, const Pose& pb,
                        const Vec3& hb, Vec3& on_a, Vec3& on_b) {
  const SupportShape A = SupportShape::box(pa, ha);
  const SupportShape B = SupportShape::box(pb, hb);
  const GjkOutcome g = gjk_distance(A, B);
  if (!g.overlap) {
    on_a = g.pa;
    on_b = g.pb;
    return g.distance;
  }
  std::vector<Vec3> axes = box_axes(pa);
  for (const Vec3& u : box_axes(pb)) axes.push_back(u);
  for (const Vec3& u : box_axes(pa))
    for (const Vec3& v : box_axes(pb)) axes.push_back(u.cross(v));
  Vec3 axis;
  const double pen = sat_penetration(axes, pb.position - pa.position, A, B, axis);
  on_a = A.support(axis);
  on_b = B.support(-axis);
  return -pen;
}

DistanceResult swap_result(DistanceResult r) {
  std::swap(r.point_a, r.point_b);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// pairwise_distance
// ---------------------------------------------------------------------------

DistanceResult pairwise_distance(const Primitive& a, const Pose& pose_a,
                                 const Primitive& b, const Pose& pose_b) {
  using K = PrimitiveKind;
  DistanceResult r;

  // Canonical kind order: Sphere < Capsule < Box.
  if (static_cast<int>(a.kind) > static_cast<int>(b.kind))
    return swap_result(pairwise_distance(b, pose_b, a, pose_a));

  if (a.kind == K::Sphere && b.kind == K::Sphere) {
    Vec3 d = pose_b.position - pose_a.position;
    double n = d.norm();
    const Vec3 dir = n > 1e-30 ? Vec3(d / n) : Vec3::UnitX();
    r.distance = n - a.radius - b.radius;
    r.point_a = pose_a.position + dir * a.radius;
    r.point_b = pose_b.position - dir * b.radius;
    return r;
  }

  if (a.kind == K::Sphere && b.kind == K::Capsule) {
    Vec3 s0, s1;
    capsule_segment(b, pose_b, s0, s1);
    const Vec3 q = closest_point_on_segment(pose_a.position, s0, s1);
    Vec3 d = q - pose_a.position;
    double n = d.norm();
    const Vec3 dir = n > 1e-30 ? Vec3(d / n) : Vec3::UnitX();
    r.distance = n - a.radius - b.radius;
    r.point_a = pose_a.position + dir * a.radius;
    r.point_b = q - dir * b.radius;
    return r;
  }

  if (a.kind == K::Sphere && b.kind == K::Box) {
    Vec3 on_box;
    const double d = point_box(pose_a.position, pose_b, b.half_extents, on_box);
    Vec3 dir = on_box - pose_a.position;
    if (d < 0) dir = -dir;  // center inside: surface point is outward
    const double n = dir.norm();
    const Vec3 u = n > 1e-30 ? Vec3(dir / n) : Vec3::UnitX();
    r.distance = d - a.radius;
    r.point_a = pose_a.position + u * a.radius;
    r.point_b = on_box;
    return r;
  }

  if (a.kind == K::Capsule && b.kind == K::Capsule) {
    Vec3 a0, a1, b0, b1, ca, cb;
    capsule_segment(a, pose_a, a0, a1);
    capsule_segment(b, pose_b, b0, b1);
    closest_points_segments(a0, a1, b0, b1, ca, cb);
    Vec3 d = cb - ca;
    double n = d.norm();
    const Vec3 dir = n > 1e-30 ? Vec3(d / n) : Vec3::UnitX();
    r.distance = n - a.radius - b.radius;
    r.point_a = ca + dir * a.radius;
    r.point_b = cb - dir * b.radius;
    return r;
  }

  if (a.kind == K::Capsule && b.kind == K::Box) {
    Vec3 s0, s1, on_seg, on_box;
    capsule_segment(a, pose_a, s0, s1);
    const double d = segment_box_distance(s0, s1, pose_b, b.half_extents,
                                          on_seg, on_box);
    Vec3 dir = on_box - on_seg;
    if (d < 0) dir = -dir;
    const double n = dir.norm();
    const Vec3 u = n > 1e-30 ? Vec3(dir / n) : Vec3::UnitX();
    r.distance = d - a.radius;
    r.point_a = on_seg + u * a.radius;
    r.point_b = on_box;
    return r;
  }

  // Box-box.
  Vec3 on_a, on_b;
  r.distance = box_box_distance(pose_a, a.half_extents, pose_b, b.half_extents,
                                on_a, on_b);
  r.point_a = on_a;
  r.point_b = on_b;
  return r;
}

double point_distance(const Vec3& p, const Primitive& prim, const Pose& pose) {
  switch (prim.kind) {
    case PrimitiveKind::Sphere:
      return (p - pose.position).norm() - prim.radius;
    case PrimitiveKind::Capsule: {
      Vec3 a, b;
      capsule_segment(prim, pose, a, b);
      return (p - closest_point_on_segment(p, a, b)).norm() - prim.radius;
    }
    case PrimitiveKind::Box: {
      Vec3 unused;
      return point_box(p, pose, prim.half_extents, unused);
    }
  }
  return 0.0;
}

double segment_distance(const Vec3& a, const Vec3& b, const Primitive& prim,
                        const Pose& pose, double box_step) {
  switch (prim.kind) {
    case PrimitiveKind::Sphere:
      return (pose.position - closest_point_on_segment(pose.position, a, b))
                 .norm() -
             prim.radius;
    case PrimitiveKind::Capsule: {
      Vec3 c0, c1, pa, pb;
      capsule_segment(prim, pose, c0, c1);
      closest_points_segments(a, b, c0, c1, pa, pb);
      return (pb - pa).norm() - prim.radius;
    }
    case PrimitiveKind::Box: {
      const double len = (b - a).norm();
      const int n = std::max(1, static_cast<int>(std::ceil(len / box_step)));
      double best = std::numeric_limits<double>::infinity();
      Vec3 unused;
      for (int i = 0; i <= n; ++i) {
        const Vec3 p = a + (b - a) * (static_cast<double>(i) / n);
        best = std::min(best, point_box(p, pose, prim.half_extents, unused));
      }
      return best;
    }
  }
  return 0.0;
}

Eigen::AlignedBox3d primitive_aabb(const Primitive& prim, const Pose& pose) {
  Eigen::AlignedBox3d box;
  switch (prim.kind) {
    case PrimitiveKind::Sphere:
      box.extend(pose.position - Vec3::Constant(prim.radius));
      box.extend(pose.position + Vec3::Constant(prim.radius));
      break;
    case PrimitiveKind::Capsule: {
      Vec3 a, b;
      capsule_segment(prim, pose, a, b);
      box.extend(a - Vec3::Constant(prim.radius));
      box.extend(a + Vec3::Constant(prim.radius));
      box.extend(b - Vec3::Constant(prim.radius));
      box.extend(b + Vec3::Constant(prim.radius));
      break;
    }
    case PrimitiveKind::Box: {
      const Eigen::Matrix3d R = pose.rotation();
      const Vec3 ext = R.cwiseAbs() * prim.half_extents;
      box.extend(pose.position - ext);
      box.extend(pose.position + ext);
      break;
    }
  }
  return box;
}

// ---------------------------------------------------------------------------
// Planes
// ---------------------------------------------------------------------------

namespace {

Plane make_plane(Vec3 normal, double offset) {
  normal.normalize();
  // Canonical sign: first non-zero component positive.
  for (int i = 0; i < 3; ++i) {
    if (std::abs(normal[i]) > 1e-12) {
      if (normal[i] < 0) {
        normal = -normal;
        offset = -offset;
      }
      break;
    }
  }
  Plane p;
  p.normal = normal;
  p.offset = offset;
  int least = 0;
  normal.cwiseAbs().minCoeff(&least);
  p.u = normal.cross(Vec3::Unit(least)).normalized();
  p.v = normal.cross(p.u);
  return p;
}

}  // namespace

PlaneFit fit_plane(const std::vector<Vec3>& points) {
  if (points.size() < 3) throw DegenerateInput("fit_plane needs >= 3 points");
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::MatrixXd A(points.size(), 3);
  for (size_t i = 0; i < points.size(); ++i) A.row(i) = points[i] - centroid;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv(1) <= 1e-9 * std::max(1.0, sv(0)))
    throw DegenerateInput("fit_plane: points are collinear");

  const Vec3 normal = svd.matrixV().col(2);
  PlaneFit fit;
  fit.plane = make_plane(normal, normal.dot(centroid));
  fit.residual_rms = sv(2) / std::sqrt(static_cast<double>(points.size()));
  return fit;
}

Vec2 project_to_plane(const Vec3& p, const Plane& plane) {
  return Vec2(plane.u.dot(p), plane.v.dot(p));
}

// ---------------------------------------------------------------------------
// Polygons
// ---------------------------------------------------------------------------

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double polygon_area(const std::vector<Vec2>& v) {
  double a = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

}  // namespace

Polygon2D convex_hull_2d(std::vector<Vec2> points) {
  if (points.size() < 3) throw DegenerateInput("convex_hull_2d needs >= 3 points");
  std::sort(points.begin(), points.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const Vec2& a, const Vec2& b) {
                             return a.x() == b.x() && a.y() == b.y();
                           }),
               points.end());

  const size_t n = points.size();
  std::vector<Vec2> hull(2 * n + 1);
  size_t k = 0;
  for (size_t i = 0; i < n; ++i) {  // lower hull
    while (k >= 2 && cross2(hull[k - 2], hull[k - 1], points[i]) <= 1e-14) --k;
    hull[k++] = points[i];
  }
  for (size_t i = n - 1, t = k + 1; i-- > 0;) {  // upper hull
    while (k >= t && cross2(hull[k - 2], hull[k - 1], points[i]) <= 1e-14) --k;
    hull[k++] = points[i];
  }
  hull.resize(k > 0 ? k - 1 : 0);

  if (hull.size() < 3 || polygon_area(hull) < 1e-12)
    throw DegenerateInput("convex_hull_2d: degenerate hull");
  return Polygon2D{std::move(hull)};
}

PolygonMeasures polygon_measures(const Polygon2D& poly) {
  const auto& v = poly.vertices;
  const size_t n = v.size();
  PolygonMeasures m;
  double a2 = 0;
  Vec2 c = Vec2::Zero();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % n];
    const double w = p.x() * q.y() - q.x() * p.y();
    a2 += w;
    c += (p + q) * w;
  }
  m.area = 0.5 * a2;
  m.centroid = c / (3.0 * a2);

  // Chebyshev center: inward edge constraints n.x >= b + r; the optimum has
  // three active constraints (or two parallel plus one), so enumerating
  // edge triples and keeping the best feasible candidate is exact.
  struct Edge {
    Vec2 n;
    double b;
  };
  std::vector<Edge> edges(n);
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % n];
    const Vec2 e = q - p;
    Vec2 inward(-e.y(), e.x());  // CCW: interior is left of the edge
    inward.normalize();
    edges[i] = {inward, inward.dot(p)};
  }
  auto feasible_radius = [&](const Vec2& x) {
    double r = std::numeric_limits<double>::infinity();
    for (const Edge& e : edges) r = std::min(r, e.n.dot(x) - e.b);
    return r;
  };

  double best_r = -std::numeric_limits<double>::infinity();
  Vec2 best_c = m.centroid;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      for (size_t k = j + 1; k < n; ++k) {
        Eigen::Matrix3d M;
        M << edges[i].n.x(), edges[i].n.y(), -1.0,
             edges[j].n.x(), edges[j].n.y(), -1.0,
             edges[k].n.x(), edges[k].n.y(), -1.0;
        if (std::abs(M.determinant()) < 1e-12) continue;
        const Vec3 rhs(edges[i].b, edges[j].b, edges[k].b);
        const Vec3 sol = M.partialPivLu().solve(rhs);
        const Vec2 x(sol.x(), sol.y());
        const double r = sol.z();
        if (r <= best_r) continue;
        if (feasible_radius(x) >= r - 1e-9) {
          best_r = r;
          best_c = x;
        }
      }
  if (n == 3 || best_r < 0) {
    // Triangles are covered by the single triple; any residual negative
    // radius means numeric failure, fall back to the centroid's clearance.
    if (best_r < 0) {
      best_c = m.centroid;
      best_r = feasible_radius(m.centroid);
    }
  }
  m.incircle_radius = best_r;
  m.incircle_center = best_c;
  return m;
}

bool point_in_polygon(const Vec2& p, const Polygon2D& poly, double tol) {
  const auto& v = poly.vertices;
  const size_t n = v.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    if (cross2(a, b, p) < -tol) return false;
  }
  return true;
}

std::optional<Polygon2D> shrink_polygon(const Polygon2D& poly, double margin) {
  if (margin <= 0) return poly;
  std::vector<Vec2> cur = poly.vertices;
  const auto& v = poly.vertices;
  const size_t n = v.size();
  for (size_t i = 0; i < n && !cur.empty(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % n];
    Vec2 inward(-(b - a).y(), (b - a).x());
    inward.normalize();
    const double bound = inward.dot(a) + margin;
    // Clip cur by halfplane inward.dot(x) >= bound.
    std::vector<Vec2> next;
    const size_t m = cur.size();
    for (size_t j = 0; j < m; ++j) {
      const Vec2& p = cur[j];
      const Vec2& q = cur[(j + 1) % m];
      const double dp = inward.dot(p) - bound;
      const double dq = inward.dot(q) - bound;
      if (dp >= 0) next.push_back(p);
      if ((dp > 0 && dq < 0) || (dp < 0 && dq > 0))
        next.push_back(p + (q - p) * (dp / (dp - dq)));
    }
    cur = std::move(next);
  }
  if (cur.size() < 3 || polygon_area(cur) < 1e-12) return std::nullopt;
  return Polygon2D{std::move(cur)};
}

Vec2 sample_in_polygon(const Polygon2D& poly, RngStream& rng) {
  const auto& v = poly.vertices;
  const size_t n = v.size();
  std::vector<double> cum(n - 2);
  double total = 0;
  for (size_t i = 1; i + 1 < n; ++i) {
    total += 0.5 * std::abs(cross2(v[0], v[i], v[i + 1]));
    cum[i - 1] = total;
  }
  const double pick = rng.uniform01() * total;
  size_t tri = std::lower_bound(cum.begin(), cum.end(), pick) - cum.begin();
  tri = std::min(tri, n - 3);
  const Vec2 &a = v[0], &b = v[tri + 1], &c = v[tri + 2];
  const double r1 = std::sqrt(rng.uniform01());
  const double r2 = rng.uniform01();
  return (1 - r1) * a + r1 * (1 - r2) * b + r1 * r2 * c;
}

Vec3 sample_direction_in_cone(const Vec3& axis, double max_angle,
                              RngStream& rng) {
  // Tilt angle drawn uniformly (not area-uniform over the cap), so small
  // tilts are well represented.
  const double theta = rng.uniform(0.0, max_angle);
  const double phi = rng.uniform(0.0, 2.0 * M_PI);
  const double s = std::sin(theta);
  const Vec3 local(s * std::cos(phi), s * std::sin(phi), std::cos(theta));
  const Quat q = Quat::FromTwoVectors(Vec3::UnitZ(), axis);
  return q * local;
}

}  // namespace tapom::geom
