#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tapom/topology.hpp"

namespace tapom {

struct NodeWeights {
  double w_reach = 0.0;  // fraction of feasible sampled object placements
  double w_pass = 0.0;   // geometric fit score, capped at 1
};

struct ChannelGraphParams {
  double alpha = 1.0;
  double beta = 2.0;
  double epsilon = 0.25;  // edge admission threshold on w_e
  int n_samples = 100;    // reachability samples per channel
  int n_pairs = 100;      // visibility samples per edge
  bool pass_use_area_ratio = false;
};

/// Reachability and passability of a channel.
///
/// Reachability places the object at uniformly drawn polygon-interior
/// points with its long axis within 15 degrees of the plane normal and
/// counts IK-feasible, collision-free placements. Passability compares the
/// channel incircle against the radius the object needs (or the polygon
/// area against the object cross-section when area-ratio mode is on).
NodeWeights node_weights(const Channel& c, const ValidityChecker& checker,
                         const ChannelGraphParams& params, RngStream& rng);

struct ChannelEdge {
  int from = 0, to = 0;   // node indices
  double xi = 0.0;        // valid straight-line connection ratio
  double d = 0.0;         // center distance, clamped >= 1e-6
  double w_e = 0.0;       // xi / d
};

/// Visibility-over-distance edge weight between two channels.
ChannelEdge edge_weight(const Channel& ci, const Channel& cj,
                        const ValidityChecker& checker, int n_pairs,
                        RngStream& rng);

struct ChannelGraphNode {
  int channel_index = -1;  // -1 for start/goal
  std::string label;
  geom::Vec3 position = geom::Vec3::Zero();  // channel center / object position
  double w_reach = 0.0, w_pass = 0.0;
  double w_v = 1.0;  // endpoint nodes carry weight 1
};

struct ChannelGraph {
  std::vector<ChannelGraphNode> nodes;
  std::vector<ChannelEdge> edges;
  std::vector<std::vector<int>> adjacency;  // node -> sorted neighbors
  int start_node = -1, goal_node = -1;

  int edge_between(int a, int b) const;  // -1 when absent
};

/// Builds the weighted channel graph with start/goal nodes attached.
/// Throws DisconnectedEndpoints when no edge incident to the start or the
/// goal survives the epsilon threshold.
ChannelGraph build_channel_graph(const std::vector<Channel>& channels,
                                 const ValidityChecker& checker,
                                 const Configuration& q_start,
                                 const Configuration& q_goal,
                                 const ChannelGraphParams& params,
                                 RngStream& rng);

struct ChannelPath {
  std::vector<int> nodes;  // start, channels..., goal
  double score = 0.0;
};

/// All simple start-to-goal paths with at most L_max channel nodes, in BFS
/// order (shortest first).
std::vector<ChannelPath> enumerate_paths(const ChannelGraph& g, int L_max);

/// Composite path score: sum of node-weight x outgoing-edge-weight terms
/// plus the terminal node weight, divided by node_count^gamma.
double score_path(const ChannelGraph& g, const ChannelPath& path, double gamma);

/// Same scoring on raw weight sequences (node_w has one more entry than
/// edge_w); exposed for direct formula checks.
double score_weighted_path(const std::vector<double>& node_w,
                           const std::vector<double>& edge_w, double gamma);

/// Highest-scoring path; ties broken by fewer nodes, then by label order.
/// Throws NoFeasiblePath on an empty candidate list.
ChannelPath select_best_path(const ChannelGraph& g,
                             std::vector<ChannelPath> paths, double gamma);

/// Channel graph in DOT syntax with node/edge weights as labels.
std::string channel_graph_dot(const ChannelGraph& g);

}  // namespace tapom
