#include "tapom/scene.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace tapom {

using geom::Pose;
using geom::Primitive;
using geom::Vec3;
using nlohmann::json;

int Scene::sub_index(const std::string& id) const {
  for (size_t i = 0; i < subs.size(); ++i)
    if (subs[i].id == id) return static_cast<int>(i);
  return -1;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError(path, what);
}

void require_keys(const json& j, const std::string& path,
                  const std::set<std::string>& required,
                  const std::set<std::string>& optional = {}) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& key : required)
    if (!j.contains(key)) fail(path + "." + key, "missing required field");
  for (const auto& [key, _] : j.items())
    if (!required.count(key) && !optional.count(key))
      fail(path + "." + key, "unknown field");
}

Vec3 parse_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected [x, y, z]");
  for (const auto& v : j)
    if (!v.is_number()) fail(path, "expected numeric components");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Eigen::VectorXd parse_vector(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a numeric array");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path, "expected numeric components");
    v[static_cast<int>(i)] = j[i].get<double>();
  }
  return v;
}

Pose parse_pose(const json& j, const std::string& path) {
  require_keys(j, path, {"xyz"}, {"rpy"});
  const Vec3 xyz = parse_vec3(j.at("xyz"), path + ".xyz");
  Vec3 rpy = Vec3::Zero();
  if (j.contains("rpy")) rpy = parse_vec3(j.at("rpy"), path + ".rpy");
  return Pose::from_xyz_rpy(xyz, rpy);
}

// Reads the "kind"/"params" fields of an object whose other keys the caller
// has already validated.
Primitive parse_primitive(const json& j, const std::string& path) {
  if (!j.contains("kind")) fail(path + ".kind", "missing required field");
  if (!j.contains("params")) fail(path + ".params", "missing required field");
  if (!j.at("kind").is_string()) fail(path + ".kind", "expected a string");
  const std::string kind = j.at("kind").get<std::string>();
  const json& params = j.at("params");
  if (!params.is_array()) fail(path + ".params", "expected an array");
  auto num = [&](size_t i) {
    if (i >= params.size() || !params[i].is_number())
      fail(path + ".params", "wrong arity or non-numeric entry");
    return params[i].get<double>();
  };
  try {
    if (kind == "sphere") {
      if (params.size() != 1) fail(path + ".params", "sphere expects [radius]");
      return Primitive::sphere(num(0));
    }
    if (kind == "capsule" || kind == "cylinder") {
      // Cylinders are loaded as capsules of equal radius and half-length.
      if (params.size() != 2)
        fail(path + ".params", kind + " expects [radius, half_length]");
      return Primitive::capsule(num(0), num(1));
    }
    if (kind == "box") {
      if (params.size() != 3)
        fail(path + ".params", "box expects [hx, hy, hz] half extents");
      return Primitive::box(Vec3(num(0), num(1), num(2)));
    }
  } catch (const Error& e) {
    fail(path + ".params", e.what());
  }
  fail(path + ".kind", "unknown primitive kind '" + kind + "'");
}

LinkGeometry parse_link(const json& j, const std::string& path, int joint_index) {
  require_keys(j, path, {"kind", "params"}, {"pose"});
  LinkGeometry link;
  link.shape = parse_primitive(j, path);
  if (j.contains("pose")) link.offset = parse_pose(j.at("pose"), path + ".pose");
  link.joint_index = joint_index;
  return link;
}

JointLimits parse_limits(const json& j, const std::string& path) {
  require_keys(j, path, {"lo", "hi"});
  JointLimits lim;
  lim.lo = parse_vector(j.at("lo"), path + ".lo");
  lim.hi = parse_vector(j.at("hi"), path + ".hi");
  if (lim.lo.size() != lim.hi.size()) fail(path, "lo/hi size mismatch");
  for (int i = 0; i < lim.lo.size(); ++i)
    if (!(lim.lo[i] < lim.hi[i])) fail(path, "limits must satisfy lo < hi");
  return lim;
}

RobotModel parse_robot(const json& j, const std::string& path) {
  require_keys(j, path, {"kind"},
               {"limits", "object", "grasp", "links", "joints", "ee"});
  const std::string kind = j.at("kind").get<std::string>();
  RobotModel model;

  if (!j.contains("object")) fail(path + ".object", "missing required field");
  model.attached_object = parse_primitive(j.at("object"), path + ".object");
  if (j.contains("grasp")) model.grasp = parse_pose(j.at("grasp"), path + ".grasp");

  if (kind == "free_flyer") {
    model.kind = RobotKind::FreeFlyer;
    if (!j.contains("limits")) fail(path + ".limits", "missing required field");
    model.limits = parse_limits(j.at("limits"), path + ".limits");
    if (model.limits.dof() != 6)
      fail(path + ".limits", "free_flyer requires 6 dimensions");
    if (j.contains("links")) {
      const json& links = j.at("links");
      if (!links.is_array()) fail(path + ".links", "expected an array");
      for (size_t i = 0; i < links.size(); ++i)
        model.links.push_back(
            parse_link(links[i], path + ".links[" + std::to_string(i) + "]", -1));
    }
    if (j.contains("joints")) fail(path + ".joints", "free_flyer has no joints");
    return model;
  }

  if (kind == "serial_arm") {
    model.kind = RobotKind::SerialArm;
    if (!j.contains("joints")) fail(path + ".joints", "missing required field");
    const json& joints = j.at("joints");
    if (!joints.is_array() || joints.empty())
      fail(path + ".joints", "expected a non-empty array");
    if (joints.size() > 6) fail(path + ".joints", "serial_arm supports d <= 6");
    Eigen::VectorXd lo(joints.size()), hi(joints.size());
    for (size_t i = 0; i < joints.size(); ++i) {
      const std::string jp = path + ".joints[" + std::to_string(i) + "]";
      require_keys(joints[i], jp, {"axis", "limits"}, {"origin", "link"});
      SerialJoint joint;
      joint.axis = parse_vec3(joints[i].at("axis"), jp + ".axis");
      if (joint.axis.norm() < 1e-9) fail(jp + ".axis", "zero axis");
      if (joints[i].contains("origin"))
        joint.origin = parse_pose(joints[i].at("origin"), jp + ".origin");
      const json& lim = joints[i].at("limits");
      if (!lim.is_array() || lim.size() != 2 || !lim[0].is_number() ||
          !lim[1].is_number())
        fail(jp + ".limits", "expected [lo, hi]");
      lo[static_cast<int>(i)] = lim[0].get<double>();
      hi[static_cast<int>(i)] = lim[1].get<double>();
      if (!(lo[static_cast<int>(i)] < hi[static_cast<int>(i)]))
        fail(jp + ".limits", "limits must satisfy lo < hi");
      model.joints.push_back(joint);
      if (joints[i].contains("link"))
        model.links.push_back(parse_link(joints[i].at("link"), jp + ".link",
                                         static_cast<int>(i)));
    }
    model.limits = JointLimits{lo, hi};
    if (j.contains("ee")) model.ee_offset = parse_pose(j.at("ee"), path + ".ee");
    if (j.contains("limits"))
      fail(path + ".limits", "serial_arm limits are per joint");
    return model;
  }

  fail(path + ".kind", "unknown robot kind '" + kind + "'");
}

}  // namespace

Scene parse_scene(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }

  require_keys(doc, "$",
               {"schema_version", "workspace", "robot", "obstacles", "start",
                "goal"},
               {"contacts"});
  if (!doc.at("schema_version").is_number_integer() ||
      doc.at("schema_version").get<int>() != 1)
    fail("$.schema_version", "expected 1");

  Scene scene;
  {
    const json& ws = doc.at("workspace");
    require_keys(ws, "$.workspace", {"min", "max"});
    const Vec3 lo = parse_vec3(ws.at("min"), "$.workspace.min");
    const Vec3 hi = parse_vec3(ws.at("max"), "$.workspace.max");
    for (int i = 0; i < 3; ++i)
      if (!(lo[i] < hi[i])) fail("$.workspace", "min must be < max");
    scene.workspace = Eigen::AlignedBox3d(lo, hi);
  }

  scene.robot = parse_robot(doc.at("robot"), "$.robot");

  const json& obstacles = doc.at("obstacles");
  if (!obstacles.is_array()) fail("$.obstacles", "expected an array");
  std::set<std::string> obstacle_ids, sub_ids;
  for (size_t i = 0; i < obstacles.size(); ++i) {
    const std::string op = "$.obstacles[" + std::to_string(i) + "]";
    require_keys(obstacles[i], op, {"id", "subs"});
    Obstacle obs;
    obs.id = obstacles[i].at("id").get<std::string>();
    if (!obstacle_ids.insert(obs.id).second)
      fail(op + ".id", "duplicate obstacle id '" + obs.id + "'");
    const json& subs = obstacles[i].at("subs");
    if (!subs.is_array() || subs.empty())
      fail(op + ".subs", "expected a non-empty array");
    for (size_t s = 0; s < subs.size(); ++s) {
      const std::string sp = op + ".subs[" + std::to_string(s) + "]";
      require_keys(subs[s], sp, {"id", "kind", "params", "pose"});
      SubObstacle sub;
      sub.id = subs[s].at("id").get<std::string>();
      if (!sub_ids.insert(sub.id).second)
        fail(sp + ".id", "duplicate sub-obstacle id '" + sub.id + "'");
      sub.shape = parse_primitive(subs[s], sp);
      sub.pose = parse_pose(subs[s].at("pose"), sp + ".pose");
      sub.parent = static_cast<int>(i);
      obs.sub_indices.push_back(static_cast<int>(scene.subs.size()));
      scene.subs.push_back(sub);
    }
    scene.obstacles.push_back(obs);
  }

  scene.start = parse_vector(doc.at("start"), "$.start");
  scene.goal = parse_vector(doc.at("goal"), "$.goal");
  if (scene.start.size() != scene.robot.dof())
    fail("$.start", "dimension does not match the robot dof");
  if (scene.goal.size() != scene.robot.dof())
    fail("$.goal", "dimension does not match the robot dof");

  if (doc.contains("contacts")) {
    const json& contacts = doc.at("contacts");
    if (!contacts.is_array()) fail("$.contacts", "expected an array");
    std::set<std::pair<std::string, std::string>> seen;
    for (size_t i = 0; i < contacts.size(); ++i) {
      const std::string cp = "$.contacts[" + std::to_string(i) + "]";
      require_keys(contacts[i], cp, {"a", "b", "point"});
      ContactAnnotation c;
      c.a = contacts[i].at("a").get<std::string>();
      c.b = contacts[i].at("b").get<std::string>();
      c.point = parse_vec3(contacts[i].at("point"), cp + ".point");
      if (scene.sub_index(c.a) < 0)
        fail(cp + ".a", "unknown sub-obstacle id '" + c.a + "'");
      if (scene.sub_index(c.b) < 0)
        fail(cp + ".b", "unknown sub-obstacle id '" + c.b + "'");
      if (c.a == c.b) fail(cp, "self contact");
      auto key = std::minmax(c.a, c.b);
      if (!seen.insert(key).second)
        fail(cp, "duplicate contact for pair (" + c.a + ", " + c.b + ")");
      scene.contacts.push_back(c);
    }
  }

  // Endpoint validity (margin 0): required before any planning starts.
  const ValidityChecker checker(scene, 0.0, 5e-4);
  if (!scene.robot.limits.contains(scene.start))
    throw InvalidEndpoint("start", "configuration outside joint limits");
  if (!scene.robot.limits.contains(scene.goal))
    throw InvalidEndpoint("goal", "configuration outside joint limits");
  if (!checker.config_valid(scene.start))
    throw InvalidEndpoint("start", "configuration is in collision");
  if (!checker.config_valid(scene.goal))
    throw InvalidEndpoint("goal", "configuration is in collision");
  return scene;
}

Scene load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scene file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

// ---------------------------------------------------------------------------
// ValidityChecker
// ---------------------------------------------------------------------------

ValidityChecker::ValidityChecker(const Scene& scene, double clearance_margin,
                                 double resolution)
    : scene_(&scene),
      margin_(clearance_margin),
      resolution_(resolution),
      range_diag_(scene.robot.limits.range_diagonal()) {
  if (!(resolution > 0.0) || resolution > 1.0)
    throw Error("validity resolution must be in (0, 1]");
  if (clearance_margin < 0.0) throw Error("clearance margin must be >= 0");
  sub_aabbs_.reserve(scene.subs.size());
  for (const SubObstacle& sub : scene.subs)
    sub_aabbs_.push_back(geom::primitive_aabb(sub.shape, sub.pose));
}

namespace {

double aabb_gap(const Eigen::AlignedBox3d& a, const Eigen::AlignedBox3d& b) {
  geom::Vec3 gap;
  for (int i = 0; i < 3; ++i)
    gap[i] = std::max({0.0, b.min()[i] - a.max()[i], a.min()[i] - b.max()[i]});
  return gap.norm();
}

}  // namespace

bool ValidityChecker::body_valid(const geom::Primitive& shape,
                                 const geom::Pose& pose,
                                 bool check_workspace) const {
  const Eigen::AlignedBox3d aabb = geom::primitive_aabb(shape, pose);
  if (check_workspace && !scene_->workspace.contains(aabb)) return false;
  for (size_t i = 0; i < scene_->subs.size(); ++i) {
    // Bounding boxes bound the true distance from below, so a clear AABB
    // gap proves the clearance without the exact query.
    if (aabb_gap(aabb, sub_aabbs_[i]) > margin_) continue;
    const SubObstacle& sub = scene_->subs[i];
    const geom::DistanceResult d =
        geom::pairwise_distance(shape, pose, sub.shape, sub.pose);
    if (!(d.distance > margin_)) return false;
  }
  return true;
}

bool ValidityChecker::config_valid(const Configuration& q) const {
  if (!scene_->robot.limits.contains(q)) return false;
  const FkResult fk = forward_kinematics(scene_->robot, q);
  if (!body_valid(scene_->robot.attached_object, fk.object_pose, true))
    return false;
  for (size_t i = 0; i < scene_->robot.links.size(); ++i) {
    if (!body_valid(scene_->robot.links[i].shape, fk.link_poses[i], true))
      return false;
  }
  return true;
}

bool ValidityChecker::pose_valid(const geom::Pose& p) const {
  return body_valid(scene_->robot.attached_object, p, false);
}

bool ValidityChecker::segment_valid(const Configuration& q1,
                                    const Configuration& q2) const {
  return segment_valid_at(q1, q2, resolution_);
}

bool ValidityChecker::segment_valid_at(const Configuration& q1,
                                       const Configuration& q2,
                                       double resolution) const {
  const double spacing = resolution * range_diag_;
  const double length = (q2 - q1).norm();
  // Power-of-two step count: a finer resolution always checks a superset
  // of the coarser sample points, so refining can never flip a verdict
  // from blocked to free.
  std::uint64_t steps = 1;
  while (static_cast<double>(steps) * spacing < length && steps < (1ULL << 40))
    steps <<= 1;
  for (std::uint64_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(steps);
    if (!config_valid(q1 + (q2 - q1) * t)) return false;
  }
  return true;
}

bool ValidityChecker::workspace_segment_free(const geom::Vec3& x1,
                                             const geom::Vec3& x2) const {
  for (const SubObstacle& sub : scene_->subs) {
    const double d = geom::segment_distance(x1, x2, sub.shape, sub.pose);
    if (!(d > margin_)) return false;
  }
  return true;
}

double ValidityChecker::point_clearance(const geom::Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const SubObstacle& sub : scene_->subs)
    best = std::min(best, geom::point_distance(p, sub.shape, sub.pose));
  return best;
}

}  // namespace tapom
