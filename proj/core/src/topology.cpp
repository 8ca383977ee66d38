#include "tapom/topology.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace tapom {

using geom::Vec2;
using geom::Vec3;

int TopoGraph::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].a == a && edges[i].b == b) return static_cast<int>(i);
  return -1;
}

TopoGraph build_topo_graph(const Scene& scene, double contact_tol) {
  TopoGraph g;
  g.node_count = static_cast<int>(scene.subs.size());
  g.adjacency.assign(scene.subs.size(), {});

  std::map<std::pair<int, int>, Vec3> declared;
  for (const ContactAnnotation& c : scene.contacts) {
    int a = scene.sub_index(c.a);
    int b = scene.sub_index(c.b);
    if (a > b) std::swap(a, b);
    declared[{a, b}] = c.point;
  }

  for (int a = 0; a < g.node_count; ++a) {
    for (int b = a + 1; b < g.node_count; ++b) {
      const auto it = declared.find({a, b});
      if (it != declared.end()) {
        g.edges.push_back({a, b, it->second});
        continue;
      }
      const geom::DistanceResult d = geom::pairwise_distance(
          scene.subs[a].shape, scene.subs[a].pose, scene.subs[b].shape,
          scene.subs[b].pose);
      if (d.distance < -contact_tol)
        throw AmbiguousContact("sub-obstacles '" + scene.subs[a].id + "' and '" +
                               scene.subs[b].id +
                               "' overlap; declare an explicit contact point");
      if (d.distance <= contact_tol)
        g.edges.push_back({a, b, 0.5 * (d.point_a + d.point_b)});
    }
  }

  for (size_t i = 0; i < g.edges.size(); ++i) {
    g.adjacency[g.edges[i].a].push_back(g.edges[i].b);
    g.adjacency[g.edges[i].b].push_back(g.edges[i].a);
  }
  for (auto& nbrs : g.adjacency) std::sort(nbrs.begin(), nbrs.end());
  return g;
}

namespace {

std::vector<int> canonical_cycle(std::vector<int> cycle) {
  const size_t n = cycle.size();
  const size_t min_pos =
      std::min_element(cycle.begin(), cycle.end()) - cycle.begin();
  std::rotate(cycle.begin(), cycle.begin() + static_cast<long>(min_pos),
              cycle.end());
  if (cycle[1] > cycle[n - 1]) {
    std::reverse(cycle.begin() + 1, cycle.end());
  }
  return cycle;
}

}  // namespace

std::vector<Loop> detect_simple_loops(const TopoGraph& g, int max_loop_len) {
  std::vector<std::vector<int>> cycles;

  // Rooted DFS: every cycle is discovered exactly once from its smallest
  // node, visiting only larger nodes, and kept in one orientation.
  std::vector<int> path;
  std::vector<char> on_path(static_cast<size_t>(g.node_count), 0);

  auto dfs = [&](auto&& self, int root, int node) -> void {
    for (int next : g.adjacency[static_cast<size_t>(node)]) {
      if (next == root && path.size() >= 3) {
        if (path[1] < path
                [path.size() - 1])  // one orientation per cycle
          cycles.push_back(path);
        continue;
      }
      if (next <= root || on_path[static_cast<size_t>(next)]) continue;
      if (static_cast<int>(path.size()) >= max_loop_len) continue;
      path.push_back(next);
      on_path[static_cast<size_t>(next)] = 1;
      self(self, root, next);
      on_path[static_cast<size_t>(next)] = 0;
      path.pop_back();
    }
  };

  for (int root = 0; root < g.node_count; ++root) {
    path = {root};
    on_path.assign(static_cast<size_t>(g.node_count), 0);
    on_path[static_cast<size_t>(root)] = 1;
    dfs(dfs, root, root);
  }

  for (auto& c : cycles) c = canonical_cycle(std::move(c));
  std::sort(cycles.begin(), cycles.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  cycles.erase(std::unique(cycles.begin(), cycles.end()), cycles.end());

  std::vector<Loop> loops;
  loops.reserve(cycles.size());
  for (const auto& c : cycles) {
    Loop loop;
    loop.nodes = c;
    loop.contact_points.reserve(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
      const int e = g.edge_index(c[i], c[(i + 1) % c.size()]);
      loop.contact_points.push_back(g.edges[static_cast<size_t>(e)].contact);
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

namespace {

// Largest t in [0, probe] where the probe point still hugs the loop's
// sub-obstacles (within `band` of a surface). Measures how deep the channel
// walls extend along the normal.
double wall_extent(const Vec3& start, const Vec3& dir, double probe,
                   double band, const Scene& scene,
                   const std::vector<int>& loop_subs) {
  const double step = 1e-3;
  double t = 0.0;
  while (t + step <= probe) {
    const Vec3 p = start + (t + step) * dir;
    double nearest = std::numeric_limits<double>::infinity();
    for (int s : loop_subs)
      nearest = std::min(nearest, geom::point_distance(
                                      p, scene.subs[static_cast<size_t>(s)].shape,
                                      scene.subs[static_cast<size_t>(s)].pose));
    if (nearest > band) break;
    t += step;
  }
  return t;
}

}  // namespace

ChannelExtraction extract_channels(const std::vector<Loop>& loops,
                                   const Scene& scene,
                                   const ChannelFilterParams& params) {
  ChannelExtraction out;
  for (size_t li = 0; li < loops.size(); ++li) {
    const Loop& loop = loops[li];

    // (d) artifact filter: a real opening spans several parent obstacles.
    if (!params.allow_single_parent_loops) {
      std::set<int> parents;
      for (int n : loop.nodes)
        parents.insert(scene.subs[static_cast<size_t>(n)].parent);
      if (parents.size() < 2) {
        out.rejections.push_back({li, "single_parent"});
        continue;
      }
    }

    // (a) supporting plane.
    geom::PlaneFit fit;
    try {
      fit = geom::fit_plane(loop.contact_points);
    } catch (const DegenerateInput&) {
      out.rejections.push_back({li, "degenerate"});
      continue;
    }
    if (fit.residual_rms > params.max_residual) {
      out.rejections.push_back({li, "residual"});
      continue;
    }

    std::vector<Vec2> projected;
    projected.reserve(loop.contact_points.size());
    for (const Vec3& p : loop.contact_points)
      projected.push_back(geom::project_to_plane(p, fit.plane));

    geom::Polygon2D polygon;
    try {
      polygon = geom::convex_hull_2d(projected);
    } catch (const DegenerateInput&) {
      out.rejections.push_back({li, "degenerate"});
      continue;
    }

    // (b) area.
    const geom::PolygonMeasures measures = geom::polygon_measures(polygon);
    if (measures.area < params.min_area) {
      out.rejections.push_back({li, "area"});
      continue;
    }

    // (c) interior validity: the shrunk polygon, sampled on a grid, must be
    // obstacle-free when lifted back to 3-D.
    const auto shrunk = geom::shrink_polygon(polygon, params.shrink_margin);
    if (!shrunk) {
      out.rejections.push_back({li, "blocked"});
      continue;
    }
    Vec2 lo = shrunk->vertices[0], hi = shrunk->vertices[0];
    for (const Vec2& v : shrunk->vertices) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
    const int grid = std::max(
        2, static_cast<int>(std::ceil(std::sqrt(params.interior_samples))));
    std::vector<Vec2> samples;
    const geom::PolygonMeasures shrunk_measures = geom::polygon_measures(*shrunk);
    samples.push_back(shrunk_measures.centroid);
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) {
        const Vec2 p(lo.x() + (hi.x() - lo.x()) * i / (grid - 1.0),
                     lo.y() + (hi.y() - lo.y()) * j / (grid - 1.0));
        if (geom::point_in_polygon(p, *shrunk, 1e-12)) samples.push_back(p);
      }
    bool blocked = false;
    for (const Vec2& s : samples) {
      const Vec3 world = fit.plane.lift(s);
      for (const SubObstacle& sub : scene.subs) {
        // Strictly positive clearance, with 1 nm slack so samples landing
        // exactly on a surface do not pass on rounding luck.
        if (!(geom::point_distance(world, sub.shape, sub.pose) > 1e-9)) {
          blocked = true;
          break;
        }
      }
      if (blocked) break;
    }
    if (blocked) {
      out.rejections.push_back({li, "blocked"});
      continue;
    }

    Channel ch;
    ch.id = "ch" + std::to_string(out.channels.size());
    ch.plane = fit.plane;
    ch.polygon = polygon;
    ch.center = fit.plane.lift(measures.centroid);
    ch.incircle_radius = measures.incircle_radius;
    ch.source_loop = loop;

    // Thickness: the shallowest wall depth along +-normal over the contacts.
    double thickness = std::numeric_limits<double>::infinity();
    const double band = 2e-3;
    for (const Vec3& p : loop.contact_points) {
      const double up = wall_extent(p, fit.plane.normal,
                                    params.max_thickness_probe, band, scene,
                                    loop.nodes);
      const double down = wall_extent(p, -fit.plane.normal,
                                      params.max_thickness_probe, band, scene,
                                      loop.nodes);
      thickness = std::min(thickness, up + down);
    }
    ch.thickness = std::isfinite(thickness) ? thickness : 0.0;

    out.channels.push_back(std::move(ch));
  }
  return out;
}

std::string topo_graph_dot(const TopoGraph& g, const Scene& scene) {
  std::ostringstream os;
  os << "graph topology {\n";
  for (int i = 0; i < g.node_count; ++i) {
    const SubObstacle& sub = scene.subs[static_cast<size_t>(i)];
    os << "  n" << i << " [label=\"" << sub.id << "\"];\n";
  }
  for (const TopoEdge& e : g.edges) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "(%.3f, %.3f, %.3f)", e.contact.x(),
                  e.contact.y(), e.contact.z());
    os << "  n" << e.a << " -- n" << e.b << " [label=\"" << buf << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace tapom
