#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "tapom/geometry.hpp"
#include "tapom/rng.hpp"

namespace testutil {

using tapom::RngStream;
using tapom::geom::Pose;
using tapom::geom::Primitive;
using tapom::geom::Quat;
using tapom::geom::Vec2;
using tapom::geom::Vec3;

// ---------------------------------------------------------------------------
// Dense surface-sampling distance oracle.
//
// Samples one surface on a parameter grid, evaluates the exact point
// distance to the other primitive, and refines around the best sample by
// shrinking the parameter window. Checks both directions. Independent of
// the support-function path used by the implementation.
// ---------------------------------------------------------------------------

inline Vec3 surface_point(const Primitive& prim, const Pose& pose, double u,
                          double v) {
  switch (prim.kind) {
    case tapom::geom::PrimitiveKind::Sphere: {
      const double theta = u * 2.0 * M_PI;
      const double phi = v * M_PI;
      const Vec3 local(prim.radius * std::cos(theta) * std::sin(phi),
                       prim.radius * std::sin(theta) * std::sin(phi),
                       prim.radius * std::cos(phi));
      return pose.apply(local);
    }
    case tapom::geom::PrimitiveKind::Capsule: {
      // v in [0, 1]: lower cap, cylinder, upper cap (equal parameter thirds).
      const double theta = u * 2.0 * M_PI;
      Vec3 local;
      if (v < 1.0 / 3.0) {
        const double phi = (v * 3.0) * 0.5 * M_PI;  // 0 at pole
        local = Vec3(prim.radius * std::cos(theta) * std::sin(phi),
                     prim.radius * std::sin(theta) * std::sin(phi),
                     -prim.half_length - prim.radius * std::cos(phi));
      } else if (v > 2.0 / 3.0) {
        const double phi = ((v - 2.0 / 3.0) * 3.0) * 0.5 * M_PI;
        local = Vec3(prim.radius * std::cos(theta) * std::sin(phi),
                     prim.radius * std::sin(theta) * std::sin(phi),
                     prim.half_length + prim.radius * std::cos(phi));
      } else {
        const double z = ((v - 1.0 / 3.0) * 3.0) * 2.0 * prim.half_length -
                         prim.half_length;
        local = Vec3(prim.radius * std::cos(theta),
                     prim.radius * std::sin(theta), z);
      }
      return pose.apply(local);
    }
    case tapom::geom::PrimitiveKind::Box: {
      // u picks one of six faces with its fractional part as one coordinate.
      const int face = std::min(5, static_cast<int>(u * 6.0));
      const double a = u * 6.0 - face;
      const Vec3& he = prim.half_extents;
      Vec3 local;
      const double s = 2.0 * a - 1.0;
      const double t = 2.0 * v - 1.0;
      switch (face) {
        case 0: local = Vec3(he.x(), s * he.y(), t * he.z()); break;
        case 1: local = Vec3(-he.x(), s * he.y(), t * he.z()); break;
        case 2: local = Vec3(s * he.x(), he.y(), t * he.z()); break;
        case 3: local = Vec3(s * he.x(), -he.y(), t * he.z()); break;
        case 4: local = Vec3(s * he.x(), t * he.y(), he.z()); break;
        default: local = Vec3(s * he.x(), t * he.y(), -he.z()); break;
      }
      return pose.apply(local);
    }
  }
  return Vec3::Zero();
}

inline double directed_surface_distance(const Primitive& a, const Pose& pa,
                                        const Primitive& b, const Pose& pb,
                                        int grid) {
  double best = std::numeric_limits<double>::infinity();
  double bu = 0, bv = 0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double u = (i + 0.5) / grid;
      const double v = (j + 0.5) / grid;
      const double d =
          tapom::geom::point_distance(surface_point(a, pa, u, v), b, pb);
      if (d < best) {
        best = d;
        bu = u;
        bv = v;
      }
    }
  // Local refinement around the best parameter cell.
  double span = 1.0 / grid;
  for (int round = 0; round < 40; ++round) {
    for (int i = -3; i <= 3; ++i)
      for (int j = -3; j <= 3; ++j) {
        const double u = std::clamp(bu + i * span / 3.0, 0.0, 1.0);
        const double v = std::clamp(bv + j * span / 3.0, 0.0, 1.0);
        const double d =
            tapom::geom::point_distance(surface_point(a, pa, u, v), b, pb);
        if (d < best) {
          best = d;
          bu = u;
          bv = v;
        }
      }
    span *= 0.6;
  }
  return best;
}

inline double surface_distance_oracle(const Primitive& a, const Pose& pa,
                                      const Primitive& b, const Pose& pb,
                                      int grid = 100) {
  return std::min(directed_surface_distance(a, pa, b, pb, grid),
                  directed_surface_distance(b, pb, a, pa, grid));
}

inline Primitive random_primitive(RngStream& rng) {
  switch (rng.uniform_int(3)) {
    case 0:
      return Primitive::sphere(rng.uniform(0.05, 0.4));
    case 1:
      return Primitive::capsule(rng.uniform(0.03, 0.2), rng.uniform(0.05, 0.4));
    default:
      return Primitive::box(Vec3(rng.uniform(0.05, 0.4), rng.uniform(0.05, 0.4),
                                 rng.uniform(0.05, 0.4)));
  }
}

inline Pose random_pose(RngStream& rng, double span = 1.0) {
  const Vec3 pos(rng.uniform(-span, span), rng.uniform(-span, span),
                 rng.uniform(-span, span));
  Quat q(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1),
         rng.uniform(-1, 1));
  if (q.norm() < 1e-6) q = Quat::Identity();
  q.normalize();
  return Pose{pos, q};
}

// ---------------------------------------------------------------------------
// Graph oracles.
// ---------------------------------------------------------------------------

struct TestGraph {
  int nodes = 0;
  std::vector<std::pair<int, int>> edges;  // a < b
};

inline TestGraph random_graph(RngStream& rng, int max_nodes = 8,
                              int max_edges = 14) {
  TestGraph g;
  g.nodes = 3 + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(max_nodes - 2)));
  std::vector<std::pair<int, int>> all;
  for (int a = 0; a < g.nodes; ++a)
    for (int b = a + 1; b < g.nodes; ++b) all.push_back({a, b});
  // Deterministic shuffle.
  for (size_t i = all.size(); i > 1; --i)
    std::swap(all[i - 1], all[rng.uniform_int(i)]);
  const size_t count = std::min<size_t>(
      all.size(), rng.uniform_int(static_cast<std::uint64_t>(max_edges) + 1));
  g.edges.assign(all.begin(), all.begin() + static_cast<long>(count));
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

inline std::vector<int> canonical_cycle_of(std::vector<int> cycle) {
  const size_t n = cycle.size();
  const size_t min_pos =
      std::min_element(cycle.begin(), cycle.end()) - cycle.begin();
  std::rotate(cycle.begin(), cycle.begin() + static_cast<long>(min_pos),
              cycle.end());
  if (cycle[1] > cycle[n - 1]) std::reverse(cycle.begin() + 1, cycle.end());
  return cycle;
}

/// Every simple cycle of length 3..max_len, found by brute-force edge-subset
/// enumeration: a subset is a cycle iff its vertices all have degree 2 and
/// it is connected. Completely independent of any DFS.
inline std::set<std::vector<int>> cycle_oracle(const TestGraph& g, int max_len) {
  std::set<std::vector<int>> cycles;
  const size_t m = g.edges.size();
  if (m < 3) return cycles;
  for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
    const int bits = __builtin_popcountll(mask);
    if (bits < 3 || bits > max_len) continue;
    std::vector<int> degree(static_cast<size_t>(g.nodes), 0);
    std::vector<std::vector<int>> adj(static_cast<size_t>(g.nodes));
    for (size_t e = 0; e < m; ++e) {
      if (!(mask >> e & 1)) continue;
      const auto [a, b] = g.edges[e];
      degree[static_cast<size_t>(a)]++;
      degree[static_cast<size_t>(b)]++;
      adj[static_cast<size_t>(a)].push_back(b);
      adj[static_cast<size_t>(b)].push_back(a);
    }
    int active = 0;
    bool ok = true;
    int first = -1;
    for (int v = 0; v < g.nodes; ++v) {
      if (degree[static_cast<size_t>(v)] == 0) continue;
      if (degree[static_cast<size_t>(v)] != 2) {
        ok = false;
        break;
      }
      if (first < 0) first = v;
      ++active;
    }
    if (!ok || first < 0) continue;
    // Walk the cycle from `first`; it must visit every active vertex.
    std::vector<int> walk{first};
    int prev = -1, cur = first;
    while (true) {
      const auto& nb = adj[static_cast<size_t>(cur)];
      const int next = nb[0] == prev ? nb[1] : nb[0];
      if (next == first) break;
      walk.push_back(next);
      prev = cur;
      cur = next;
    }
    if (static_cast<int>(walk.size()) != active) continue;  // disconnected
    cycles.insert(canonical_cycle_of(walk));
  }
  return cycles;
}

/// All simple paths from `start` to `goal` with at most `max_inner` nodes
/// between the endpoints, by plain recursive enumeration.
inline std::set<std::vector<int>> path_oracle(
    const std::vector<std::vector<int>>& adjacency, int start, int goal,
    int max_inner) {
  std::set<std::vector<int>> out;
  std::vector<int> path{start};
  std::vector<char> used(adjacency.size(), 0);
  used[static_cast<size_t>(start)] = 1;
  auto rec = [&](auto&& self, int node) -> void {
    for (int next : adjacency[static_cast<size_t>(node)]) {
      if (next == goal) {
        auto full = path;
        full.push_back(goal);
        out.insert(full);
        continue;
      }
      if (used[static_cast<size_t>(next)]) continue;
      if (static_cast<int>(path.size()) - 1 >= max_inner) continue;
      used[static_cast<size_t>(next)] = 1;
      path.push_back(next);
      self(self, next);
      path.pop_back();
      used[static_cast<size_t>(next)] = 0;
    }
  };
  rec(rec, start);
  return out;
}

}  // namespace testutil
