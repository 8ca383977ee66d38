#include "tapom/channel_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

namespace tapom {

using geom::Pose;
using geom::Quat;
using geom::Vec2;
using geom::Vec3;

namespace {

constexpr double kAxisConeRad = 15.0 * M_PI / 180.0;

/// Object pose with its long axis along `axis_dir` (plus roll about it),
/// centered at `position`.
Pose object_pose_with_axis(const RobotModel& robot, const Vec3& position,
                           const Vec3& axis_dir, double roll) {
  const Vec3 local_axis = robot.attached_object.long_axis_local();
  const Quat align = Quat::FromTwoVectors(local_axis, axis_dir);
  const Quat spin(Eigen::AngleAxisd(roll, local_axis));
  return Pose{position, (align * spin).normalized()};
}

}  // namespace

NodeWeights node_weights(const Channel& c, const ValidityChecker& checker,
                         const ChannelGraphParams& params, RngStream& rng) {
  const RobotModel& robot = checker.scene().robot;
  NodeWeights w;

  int hits = 0;
  for (int i = 0; i < params.n_samples; ++i) {
    const Vec2 p2 = geom::sample_in_polygon(c.polygon, rng);
    const Vec3 position = c.plane.lift(p2);
    const Vec3 dir = geom::sample_direction_in_cone(c.plane.normal,
                                                    kAxisConeRad, rng);
    const double roll = rng.uniform(0.0, 2.0 * M_PI);
    const Pose target = object_pose_with_axis(robot, position, dir, roll);
    const Configuration seed = sample_configuration(robot, rng);
    const auto q = ik_solve(robot, target, seed);
    if (q && checker.config_valid(*q)) ++hits;
  }
  w.w_reach = params.n_samples > 0
                  ? static_cast<double>(hits) / params.n_samples
                  : 0.0;

  if (params.pass_use_area_ratio) {
    const Vec3 ext = robot.attached_object.obb_extents_sorted();
    const double cross_section = ext(1) * ext(2);
    const double area = geom::polygon_measures(c.polygon).area;
    w.w_pass = std::min(1.0, area / std::max(cross_section, 1e-12));
  } else {
    const double required = robot.object_required_radius();
    w.w_pass = std::min(1.0, c.incircle_radius / std::max(required, 1e-12));
  }
  return w;
}

namespace {

ChannelEdge make_edge(int from, int to, double xi, const Vec3& pa,
                      const Vec3& pb) {
  ChannelEdge e;
  e.from = from;
  e.to = to;
  e.xi = xi;
  e.d = std::max((pb - pa).norm(), 1e-6);
  e.w_e = e.xi / e.d;
  return e;
}

double visibility_ratio(const ValidityChecker& checker, int n_pairs,
                        RngStream& rng,
                        const std::function<Vec3(RngStream&)>& sample_a,
                        const std::function<Vec3(RngStream&)>& sample_b) {
  int ok = 0;
  for (int i = 0; i < n_pairs; ++i) {
    const Vec3 a = sample_a(rng);
    const Vec3 b = sample_b(rng);
    if (checker.workspace_segment_free(a, b)) ++ok;
  }
  return n_pairs > 0 ? static_cast<double>(ok) / n_pairs : 0.0;
}

}  // namespace

ChannelEdge edge_weight(const Channel& ci, const Channel& cj,
                        const ValidityChecker& checker, int n_pairs,
                        RngStream& rng) {
  const double xi = visibility_ratio(
      checker, n_pairs, rng,
      [&](RngStream& r) { return ci.plane.lift(geom::sample_in_polygon(ci.polygon, r)); },
      [&](RngStream& r) { return cj.plane.lift(geom::sample_in_polygon(cj.polygon, r)); });
  return make_edge(0, 0, xi, ci.center, cj.center);
}

int ChannelGraph::edge_between(int a, int b) const {
  for (size_t i = 0; i < edges.size(); ++i) {
    if ((edges[i].from == a && edges[i].to == b) ||
        (edges[i].from == b && edges[i].to == a))
      return static_cast<int>(i);
  }
  return -1;
}

ChannelGraph build_channel_graph(const std::vector<Channel>& channels,
                                 const ValidityChecker& checker,
                                 const Configuration& q_start,
                                 const Configuration& q_goal,
                                 const ChannelGraphParams& params,
                                 RngStream& rng) {
  ChannelGraph g;
  const RobotModel& robot = checker.scene().robot;

  for (size_t i = 0; i < channels.size(); ++i) {
    RngStream node_rng = rng.derive("node_weights", i);
    const NodeWeights w = node_weights(channels[i], checker, params, node_rng);
    ChannelGraphNode node;
    node.channel_index = static_cast<int>(i);
    node.label = channels[i].id;
    node.position = channels[i].center;
    node.w_reach = w.w_reach;
    node.w_pass = w.w_pass;
    node.w_v = params.alpha * w.w_reach + params.beta * w.w_pass;
    g.nodes.push_back(std::move(node));
  }

  auto endpoint_node = [&](const Configuration& q, const std::string& label) {
    ChannelGraphNode node;
    node.channel_index = -1;
    node.label = label;
    node.position = forward_kinematics(robot, q).object_pose.position;
    node.w_v = 1.0;
    g.nodes.push_back(std::move(node));
    return static_cast<int>(g.nodes.size()) - 1;
  };
  g.start_node = endpoint_node(q_start, "start");
  g.goal_node = endpoint_node(q_goal, "goal");

  auto sampler_for = [&](int node) {
    return [&, node](RngStream& r) -> Vec3 {
      const ChannelGraphNode& n = g.nodes[static_cast<size_t>(node)];
      if (n.channel_index < 0) return n.position;  // endpoints: single point
      const Channel& c = channels[static_cast<size_t>(n.channel_index)];
      return c.plane.lift(geom::sample_in_polygon(c.polygon, r));
    };
  };

  const int total = static_cast<int>(g.nodes.size());
  for (int a = 0; a < total; ++a) {
    for (int b = a + 1; b < total; ++b) {
      RngStream pair_rng = rng.derive("edge_weights",
                                      static_cast<std::uint64_t>(a) * 1000 + b);
      const bool endpoints_only =
          g.nodes[static_cast<size_t>(a)].channel_index < 0 &&
          g.nodes[static_cast<size_t>(b)].channel_index < 0;
      const int pairs = endpoints_only ? 1 : params.n_pairs;
      const double xi = visibility_ratio(checker, pairs, pair_rng,
                                         sampler_for(a), sampler_for(b));
      ChannelEdge e = make_edge(a, b, xi,
                                g.nodes[static_cast<size_t>(a)].position,
                                g.nodes[static_cast<size_t>(b)].position);
      if (e.w_e > params.epsilon) g.edges.push_back(e);
    }
  }

  g.adjacency.assign(g.nodes.size(), {});
  for (const ChannelEdge& e : g.edges) {
    g.adjacency[static_cast<size_t>(e.from)].push_back(e.to);
    g.adjacency[static_cast<size_t>(e.to)].push_back(e.from);
  }
  for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());

  if (g.adjacency[static_cast<size_t>(g.start_node)].empty())
    throw DisconnectedEndpoints("no channel-graph edge reaches the start");
  if (g.adjacency[static_cast<size_t>(g.goal_node)].empty())
    throw DisconnectedEndpoints("no channel-graph edge reaches the goal");
  return g;
}

std::vector<ChannelPath> enumerate_paths(const ChannelGraph& g, int L_max) {
  std::vector<ChannelPath> out;
  std::deque<std::vector<int>> queue;
  queue.push_back({g.start_node});

  while (!queue.empty()) {
    std::vector<int> path = std::move(queue.front());
    queue.pop_front();
    const int last = path.back();
    for (int next : g.adjacency[static_cast<size_t>(last)]) {
      if (next == g.goal_node) {
        ChannelPath p;
        p.nodes = path;
        p.nodes.push_back(next);
        out.push_back(std::move(p));
        continue;
      }
      if (std::find(path.begin(), path.end(), next) != path.end()) continue;
      // Channel-node count excludes the endpoints.
      if (static_cast<int>(path.size()) - 1 >= L_max) continue;
      std::vector<int> extended = path;
      extended.push_back(next);
      queue.push_back(std::move(extended));
    }
  }
  return out;
}

double score_weighted_path(const std::vector<double>& node_w,
                           const std::vector<double>& edge_w, double gamma) {
  double sum = 0.0;
  for (size_t i = 0; i + 1 < node_w.size(); ++i) sum += node_w[i] * edge_w[i];
  sum += node_w.back();
  return sum / std::pow(static_cast<double>(node_w.size()), gamma);
}

double score_path(const ChannelGraph& g, const ChannelPath& path,
                  double gamma) {
  std::vector<double> node_w, edge_w;
  node_w.reserve(path.nodes.size());
  for (int n : path.nodes) node_w.push_back(g.nodes[static_cast<size_t>(n)].w_v);
  for (size_t i = 0; i + 1 < path.nodes.size(); ++i) {
    const int e = g.edge_between(path.nodes[i], path.nodes[i + 1]);
    edge_w.push_back(e >= 0 ? g.edges[static_cast<size_t>(e)].w_e : 0.0);
  }
  return score_weighted_path(node_w, edge_w, gamma);
}

ChannelPath select_best_path(const ChannelGraph& g,
                             std::vector<ChannelPath> paths, double gamma) {
  if (paths.empty()) throw NoFeasiblePath("no candidate channel paths");
  for (ChannelPath& p : paths) p.score = score_path(g, p, gamma);

  auto labels = [&](const ChannelPath& p) {
    std::vector<std::string> out;
    out.reserve(p.nodes.size());
    for (int n : p.nodes) out.push_back(g.nodes[static_cast<size_t>(n)].label);
    return out;
  };
  const ChannelPath* best = &paths[0];
  for (const ChannelPath& p : paths) {
    if (p.score > best->score + 1e-15) {
      best = &p;
    } else if (std::abs(p.score - best->score) <= 1e-15) {
      if (p.nodes.size() < best->nodes.size() ||
          (p.nodes.size() == best->nodes.size() && labels(p) < labels(*best)))
        best = &p;
    }
  }
  return *best;
}

std::string channel_graph_dot(const ChannelGraph& g) {
  std::ostringstream os;
  os << "graph channels {\n";
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const ChannelGraphNode& n = g.nodes[i];
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s\\nw=%.4f", n.label.c_str(), n.w_v);
    os << "  n" << i << " [label=\"" << buf << "\"];\n";
  }
  for (const ChannelEdge& e : g.edges) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "xi=%.3f d=%.3f w=%.4f", e.xi, e.d, e.w_e);
    os << "  n" << e.from << " -- n" << e.to << " [label=\"" << buf << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace tapom
