#pragma once

#include <string>
#include <vector>

#include "tapom/scene.hpp"

namespace tapom {

struct TopoEdge {
  int a, b;  // sub-obstacle indices, a < b
  geom::Vec3 contact;
};

/// Sub-obstacle connectivity graph: one node per sub-obstacle, one edge per
/// touching pair with exactly one contact point.
struct TopoGraph {
  int node_count = 0;
  std::vector<TopoEdge> edges;
  std::vector<std::vector<int>> adjacency;  // node -> sorted neighbor nodes

  int edge_index(int a, int b) const;  // -1 when absent
};

/// Builds the contact graph. An edge exists where the scene declares a
/// contact or where the pair's distance is within `contact_tol`; declared
/// points override detected ones. Throws AmbiguousContact when a pair
/// overlaps deeper than `contact_tol` with no declared contact.
TopoGraph build_topo_graph(const Scene& scene, double contact_tol);

struct Loop {
  std::vector<int> nodes;               // canonical cycle, first != last
  std::vector<geom::Vec3> contact_points;  // per edge (i, i+1) and (last, first)
};

/// All simple cycles of length 3..max_loop_len, one canonical copy each
/// (smallest node first, second < last), sorted by length then
/// lexicographically.
std::vector<Loop> detect_simple_loops(const TopoGraph& g, int max_loop_len);

struct ChannelFilterParams {
  double max_residual = 0.02;      // m, plane-fit RMS bound
  double min_area = 1e-4;          // m^2
  double shrink_margin = 0.01;     // m, inward offset before interior checks
  int interior_samples = 25;       // grid samples clipped to the polygon
  double max_thickness_probe = 0.2;  // m, per side along the normal
  bool allow_single_parent_loops = false;
};

/// A traversable opening: planar convex region bounded by a loop's
/// projected contact points.
struct Channel {
  std::string id;
  geom::Plane plane;
  geom::Polygon2D polygon;  // in plane frame, CCW
  geom::Vec3 center;        // polygon centroid lifted to 3-D
  double incircle_radius = 0.0;
  double thickness = 0.0;   // free band along +-normal at the boundary
  Loop source_loop;
};

struct ChannelRejection {
  std::size_t loop_index;
  std::string reason;  // "residual", "area", "blocked", "single_parent", ...
};

struct ChannelExtraction {
  std::vector<Channel> channels;
  std::vector<ChannelRejection> rejections;
};

/// Fits a plane to each loop's contact points, hulls their projections, and
/// keeps channels whose plane residual, area, interior clearance, and
/// parent-obstacle diversity all pass. Deterministic for a fixed scene.
ChannelExtraction extract_channels(const std::vector<Loop>& loops,
                                   const Scene& scene,
                                   const ChannelFilterParams& params);

/// Contact graph in DOT syntax (diagnostics).
std::string topo_graph_dot(const TopoGraph& g, const Scene& scene);

}  // namespace tapom
