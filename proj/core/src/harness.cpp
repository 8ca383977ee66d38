#include "tapom/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "tapom/topology.hpp"

namespace tapom {

std::string to_string(PlannerId id) {
  switch (id) {
    case PlannerId::Tapom:
      return "tapom";
    case PlannerId::TapomNoHighlevel:
      return "tapom_no_highlevel";
    case PlannerId::TapomNoPrioritize:
      return "tapom_no_prioritize";
    case PlannerId::RrtConnect:
      return "rrt_connect";
    case PlannerId::BirrtPlain:
      return "birrt_plain";
  }
  return "unknown";
}

std::optional<PlannerId> planner_from_string(const std::string& name) {
  for (PlannerId id : all_planners())
    if (to_string(id) == name) return id;
  return std::nullopt;
}

std::vector<PlannerId> all_planners() {
  return {PlannerId::Tapom, PlannerId::TapomNoHighlevel,
          PlannerId::TapomNoPrioritize, PlannerId::RrtConnect,
          PlannerId::BirrtPlain};
}

// ---------------------------------------------------------------------------
// Planner dispatch
// ---------------------------------------------------------------------------

namespace {

PlanResult run_baseline(PlannerId id, const Scene& scene,
                        const PlannerConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  PlanResult result;
  RunBudget run(cfg.budget_mode, cfg.time_limit, cfg.iteration_limit);
  ValidityChecker checker(scene, cfg.clearance_margin, cfg.resolution);
  const double eta = cfg.eta_fraction * scene.robot.limits.range_diagonal();
  const Budget budget{cfg.budget_mode,
                      cfg.budget_mode == BudgetMode::WallClock
                          ? cfg.time_limit
                          : static_cast<double>(cfg.iteration_limit)};
  RngStream rng(cfg.seed);
  RngStream planner_rng = rng.derive(to_string(id));

  std::optional<Trajectory> traj;
  if (id == PlannerId::RrtConnect) {
    traj = rrt_connect_baseline(scene.start, scene.goal, checker, budget, eta,
                                planner_rng, &run);
  } else {
    traj = birrt_plain_baseline(scene.start, scene.goal, checker, budget, eta,
                                planner_rng, &run);
  }
  result.diagnostics.iterations_used = run.used();
  result.diagnostics.elapsed = run.elapsed(t0);
  if (traj) {
    result.status = PlanStatus::Success;
    result.trajectory = std::move(traj);
  } else {
    result.status = PlanStatus::Timeout;
    result.failure_reason = "budget exhausted";
  }
  return result;
}

}  // namespace

PlanResult run_planner(PlannerId id, const Scene& scene,
                       const PlannerConfig& cfg) {
  switch (id) {
    case PlannerId::Tapom:
      return plan(scene, cfg);
    case PlannerId::TapomNoHighlevel: {
      PlannerConfig c = cfg;
      c.disable_highlevel = true;
      return plan(scene, c);
    }
    case PlannerId::TapomNoPrioritize: {
      PlannerConfig c = cfg;
      c.disable_prioritize = true;
      return plan(scene, c);
    }
    case PlannerId::RrtConnect:
    case PlannerId::BirrtPlain:
      return run_baseline(id, scene, cfg);
  }
  throw Error("unknown planner id");
}

// ---------------------------------------------------------------------------
// Benchmarking
// ---------------------------------------------------------------------------

TrajectoryStats trajectory_stats(const RobotModel& robot, const Trajectory& t) {
  TrajectoryStats s;
  s.waypoints = static_cast<int>(t.waypoints.size());
  geom::Pose prev_pose;
  for (size_t i = 0; i < t.waypoints.size(); ++i) {
    const geom::Pose pose =
        forward_kinematics(robot, t.waypoints[i]).object_pose;
    if (i > 0) {
      s.joint_len += (t.waypoints[i] - t.waypoints[i - 1]).norm();
      s.trans_len_m += (pose.position - prev_pose.position).norm();
      s.rot_len_rad +=
          geom::orientation_angle(prev_pose.orientation, pose.orientation);
    }
    prev_pose = pose;
  }
  return s;
}

BenchmarkResult run_benchmark(const std::vector<NamedScene>& scenes,
                              const std::vector<PlannerId>& planners,
                              int trials, const PlannerConfig& cfg) {
  if (scenes.empty()) throw Error("run_benchmark: no scenes");
  if (planners.empty()) throw Error("run_benchmark: no planners");
  if (trials < 1) throw Error("run_benchmark: trials must be >= 1");

  BenchmarkResult out;
  for (const NamedScene& ns : scenes) {
    for (PlannerId planner : planners) {
      for (int trial = 0; trial < trials; ++trial) {
        PlannerConfig c = cfg;
        c.seed = cfg.seed + static_cast<std::uint64_t>(trial);
        const PlanResult r = run_planner(planner, ns.scene, c);
        TrialRecord rec;
        rec.scene_id = ns.id;
        rec.planner = planner;
        rec.seed = c.seed;
        rec.success = r.success();
        rec.elapsed = r.diagnostics.elapsed;
        if (r.success()) {
          const TrajectoryStats s =
              trajectory_stats(ns.scene.robot, *r.trajectory);
          rec.waypoints = s.waypoints;
          rec.joint_len = s.joint_len;
          rec.trans_len_m = s.trans_len_m;
          rec.rot_len_rad = s.rot_len_rad;
        }
        out.trials.push_back(std::move(rec));
      }
    }
  }
  const double cap = cfg.budget_mode == BudgetMode::WallClock
                         ? cfg.time_limit
                         : static_cast<double>(cfg.iteration_limit);
  out.metrics = aggregate_metrics(out.trials, cap);
  return out;
}

MetricsTable aggregate_metrics(const std::vector<TrialRecord>& trials,
                               double budget_cap) {
  MetricsTable table;
  for (const TrialRecord& t : trials) {
    MetricsRow* row = nullptr;
    for (MetricsRow& r : table.rows)
      if (r.scene_id == t.scene_id && r.planner == t.planner) row = &r;
    if (!row) {
      table.rows.push_back(MetricsRow{t.scene_id, t.planner});
      row = &table.rows.back();
    }
    ++row->trials;
    if (t.success) {
      ++row->successes;
      row->avg_success_time += t.elapsed;
      row->avg_time += t.elapsed;
    } else {
      // Failed trials contribute the budget cap to the mean time.
      row->avg_time += budget_cap;
    }
  }
  for (MetricsRow& r : table.rows) {
    r.success_rate = static_cast<double>(r.successes) / r.trials;
    r.avg_time /= r.trials;
    r.avg_success_time = r.successes > 0
                             ? r.avg_success_time / r.successes
                             : std::numeric_limits<double>::quiet_NaN();
  }
  return table;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string trials_to_csv(const std::vector<TrialRecord>& trials) {
  std::string out =
      "scene,planner,seed,success,elapsed_s,waypoints,joint_len,trans_len_m,"
      "rot_len_rad\n";
  for (const TrialRecord& t : trials) {
    out += t.scene_id;
    out += ',';
    out += to_string(t.planner);
    out += ',';
    out += std::to_string(t.seed);
    out += ',';
    out += t.success ? '1' : '0';
    out += ',';
    out += format_double(t.elapsed);
    if (t.success) {
      out += ',';
      out += std::to_string(t.waypoints);
      out += ',';
      out += format_double(t.joint_len);
      out += ',';
      out += format_double(t.trans_len_m);
      out += ',';
      out += format_double(t.rot_len_rad);
    } else {
      out += ",,,,";
    }
    out += '\n';
  }
  return out;
}

std::string metrics_to_text(const MetricsTable& table) {
  std::string out = "scene,planner,trials,successes,success_rate,avg_time,avg_success_time\n";
  for (const MetricsRow& r : table.rows) {
    out += r.scene_id;
    out += ',';
    out += to_string(r.planner);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.successes);
    out += ',';
    out += format_double(r.success_rate);
    out += ',';
    out += format_double(r.avg_time);
    out += ',';
    out += std::isnan(r.avg_success_time) ? std::string("nan")
                                          : format_double(r.avg_success_time);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory files
// ---------------------------------------------------------------------------

std::string trajectory_to_text(const Trajectory& t, const std::string& scene_id,
                               const std::string& planner, std::uint64_t seed,
                               double elapsed) {
  std::string out;
  out += "# scene: " + scene_id + "\n";
  out += "# planner: " + planner + "\n";
  out += "# seed: " + std::to_string(seed) + "\n";
  out += "# resolution: " + format_double(t.validated_resolution) + "\n";
  out += "# elapsed_s: " + format_double(elapsed) + "\n";
  for (const Configuration& q : t.waypoints) {
    for (int i = 0; i < q.size(); ++i) {
      if (i > 0) out += ' ';
      out += format_double(q[i]);
    }
    out += '\n';
  }
  return out;
}

TrajectoryFile trajectory_from_text(const std::string& text) {
  TrajectoryFile file;
  std::istringstream in(text);
  std::string line;
  bool saw_resolution = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) throw ParseError("malformed header line");
      std::string key = line.substr(1, colon - 1);
      std::string value = line.substr(colon + 1);
      auto trim = [](std::string& s) {
        while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
      };
      trim(key);
      trim(value);
      if (key == "scene") file.scene_id = value;
      else if (key == "planner") file.planner = value;
      else if (key == "seed") file.seed = std::stoull(value);
      else if (key == "resolution") {
        file.resolution = std::stod(value);
        saw_resolution = true;
      } else if (key == "elapsed_s") file.elapsed = std::stod(value);
      else throw ParseError("unknown trajectory header '" + key + "'");
      continue;
    }
    std::istringstream row(line);
    std::vector<double> values;
    double v;
    while (row >> v) values.push_back(v);
    if (values.empty()) throw ParseError("malformed waypoint row");
    Configuration q(values.size());
    for (size_t i = 0; i < values.size(); ++i) q[static_cast<int>(i)] = values[i];
    if (!file.waypoints.empty() && file.waypoints.front().size() != q.size())
      throw ParseError("inconsistent waypoint dimensions");
    file.waypoints.push_back(std::move(q));
  }
  if (file.waypoints.empty()) throw ParseError("trajectory has no waypoints");
  if (!saw_resolution) throw ParseError("trajectory header missing resolution");
  return file;
}

bool validate_trajectory(const Scene& scene, const TrajectoryFile& file,
                         std::string* why) {
  auto reject = [&](const std::string& reason) {
    if (why) *why = reason;
    return false;
  };
  if (file.waypoints.front().size() != scene.robot.dof())
    return reject("waypoint dimension does not match the robot");
  if ((file.waypoints.front() - scene.start).norm() != 0.0)
    return reject("first waypoint is not the scene start");
  if ((file.waypoints.back() - scene.goal).norm() != 0.0)
    return reject("last waypoint is not the scene goal");

  const ValidityChecker checker(scene, 0.0, file.resolution);
  const double fine = file.resolution / 10.0;
  for (size_t i = 0; i < file.waypoints.size(); ++i) {
    if (!scene.robot.limits.contains(file.waypoints[i]))
      return reject("waypoint " + std::to_string(i) + " violates joint limits");
    if (i + 1 < file.waypoints.size() &&
        !checker.segment_valid_at(file.waypoints[i], file.waypoints[i + 1], fine))
      return reject("segment " + std::to_string(i) + " is in collision");
  }
  return true;
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

namespace {

struct View {
  int ax, ay;       // world axes mapped to (right, up)
  double ox, oy;    // SVG offset
  double scale;
  const char* name;

  double x(const geom::Vec3& p) const { return ox + (p[ax]) * scale; }
  double y(const geom::Vec3& p) const { return oy - (p[ay]) * scale; }
};

void svg_number(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  out += buf;
}

void svg_polygon(std::string& out, const View& view,
                 const std::vector<geom::Vec3>& pts, const char* style) {
  out += "  <polygon points=\"";
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i > 0) out += ' ';
    svg_number(out, view.x(pts[i]));
    out += ',';
    svg_number(out, view.y(pts[i]));
  }
  out += "\" ";
  out += style;
  out += "/>\n";
}

std::vector<geom::Vec3> primitive_outline(const geom::Primitive& prim,
                                          const geom::Pose& pose, int ax,
                                          int ay) {
  std::vector<geom::Vec3> pts;
  auto circle_points = [&](const geom::Vec3& center, double r) {
    for (int i = 0; i < 24; ++i) {
      const double a = 2.0 * M_PI * i / 24;
      geom::Vec3 p = center;
      p[ax] += r * std::cos(a);
      p[ay] += r * std::sin(a);
      pts.push_back(p);
    }
  };
  switch (prim.kind) {
    case geom::PrimitiveKind::Sphere:
      circle_points(pose.position, prim.radius);
      break;
    case geom::PrimitiveKind::Capsule: {
      const geom::Vec3 axis = pose.orientation * geom::Vec3::UnitZ();
      circle_points(pose.position - axis * prim.half_length, prim.radius);
      circle_points(pose.position + axis * prim.half_length, prim.radius);
      break;
    }
    case geom::PrimitiveKind::Box:
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          for (int sz : {-1, 1})
            pts.push_back(pose.apply(geom::Vec3(sx * prim.half_extents.x(),
                                                sy * prim.half_extents.y(),
                                                sz * prim.half_extents.z())));
      break;
  }

  // 2-D hull of the projections lifted back as 3-D points for the view.
  std::vector<geom::Vec2> flat;
  flat.reserve(pts.size());
  for (const geom::Vec3& p : pts) flat.push_back(geom::Vec2(p[ax], p[ay]));
  std::vector<geom::Vec3> hull3;
  try {
    const geom::Polygon2D hull = geom::convex_hull_2d(flat);
    for (const geom::Vec2& v : hull.vertices) {
      geom::Vec3 p = geom::Vec3::Zero();
      p[ax] = v.x();
      p[ay] = v.y();
      hull3.push_back(p);
    }
  } catch (const DegenerateInput&) {
    for (const geom::Vec3& p : pts) {
      geom::Vec3 q = geom::Vec3::Zero();
      q[ax] = p[ax];
      q[ay] = p[ay];
      hull3.push_back(q);
    }
  }
  return hull3;
}

}  // namespace

std::string render_svg(const Scene& scene,
                       const std::optional<Trajectory>& trajectory) {
  // Channels are recomputed with the reference parameters so the drawing is
  // a pure function of the scene.
  std::vector<Channel> channels;
  try {
    const PlannerConfig cfg = default_config();
    const TopoGraph topo = build_topo_graph(scene, cfg.contact_tol);
    const auto loops = detect_simple_loops(topo, cfg.max_loop_len);
    channels = extract_channels(loops, scene, cfg.filter).channels;
  } catch (const Error&) {
    // Diagnostics only; draw without channels when topology fails.
  }

  const geom::Vec3 lo = scene.workspace.min();
  const geom::Vec3 hi = scene.workspace.max();
  const double scale = 200.0;
  const double margin = 24.0;
  const double w_top = (hi.x() - lo.x()) * scale;
  const double h_top = (hi.y() - lo.y()) * scale;
  const double h_side = (hi.z() - lo.z()) * scale;
  const double total_w = margin * 3 + w_top * 2;
  const double total_h = margin * 2 + std::max(h_top, h_side) + 16.0;

  View top{0, 1, margin - lo.x() * scale, margin + hi.y() * scale, scale, "top"};
  View side{0, 2, margin * 2 + w_top - lo.x() * scale,
            margin + hi.z() * scale, scale, "side"};

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"";
  svg_number(out, total_w);
  out += "\" height=\"";
  svg_number(out, total_h);
  out += "\">\n";

  for (const View& view : {top, side}) {
    // Workspace frame rectangle in this view's two axes.
    std::vector<geom::Vec3> frame(4, geom::Vec3::Zero());
    frame[0][view.ax] = lo[view.ax];
    frame[0][view.ay] = lo[view.ay];
    frame[1][view.ax] = hi[view.ax];
    frame[1][view.ay] = lo[view.ay];
    frame[2][view.ax] = hi[view.ax];
    frame[2][view.ay] = hi[view.ay];
    frame[3][view.ax] = lo[view.ax];
    frame[3][view.ay] = hi[view.ay];
    svg_polygon(out, view, frame,
                "fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"");

    for (const SubObstacle& sub : scene.subs) {
      const auto outline = primitive_outline(sub.shape, sub.pose, view.ax, view.ay);
      if (outline.size() >= 3)
        svg_polygon(out, view, outline,
                    "fill=\"#b0b0b0\" fill-opacity=\"0.8\" stroke=\"#606060\" "
                    "stroke-width=\"0.5\"");
    }

    for (const Channel& c : channels) {
      std::vector<geom::Vec3> poly;
      for (const geom::Vec2& v : c.polygon.vertices)
        poly.push_back(c.plane.lift(v));
      svg_polygon(out, view, poly,
                  "fill=\"#4080ff\" fill-opacity=\"0.25\" stroke=\"#2040c0\" "
                  "stroke-width=\"1\"");
    }

    if (trajectory) {
      out += "  <polyline points=\"";
      for (size_t i = 0; i < trajectory->waypoints.size(); ++i) {
        const geom::Vec3 p =
            forward_kinematics(scene.robot, trajectory->waypoints[i])
                .object_pose.position;
        if (i > 0) out += ' ';
        svg_number(out, view.x(p));
        out += ',';
        svg_number(out, view.y(p));
      }
      out += "\" fill=\"none\" stroke=\"#d03030\" stroke-width=\"1.5\"/>\n";
    }
  }

  out += "</svg>\n";
  return out;
}

}  // namespace tapom
