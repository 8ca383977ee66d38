#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tapom/lowlevel.hpp"

namespace tapom {

/// Full planner configuration. The documented defaults below are the
/// planner's reference parameter set; the iteration-budget fields provide a
/// bit-reproducible alternative to wall-clock budgets for tests and CI.
struct PlannerConfig {
  // Channel-graph weights and search bounds.
  double alpha = 1.0;
  double beta = 2.0;
  double gamma = 3.0;
  int L_max = 4;
  double epsilon = 0.25;

  // Keyframes and sequences.
  int N_key = 20;
  int k_select = 5;
  int S_max = 64;

  // Budgets.
  double kappa = 2.0;
  double B_min = 20.0;       // seconds (wall-clock mode)
  double time_limit = 60.0;  // seconds
  BudgetMode budget_mode = BudgetMode::WallClock;
  double B_min_iters = 4000;             // iteration-mode analog of B_min
  std::uint64_t iteration_limit = 400000;  // iteration-mode analog of time_limit

  // Topology.
  int max_loop_len = 8;
  double contact_tol = 1e-4;  // m
  ChannelFilterParams filter;

  // Validity.
  double clearance_margin = 0.0;  // m
  double resolution = 5e-4;       // fraction of the joint-range diagonal

  // Sampling.
  std::uint64_t seed = 0;
  int n_samples = 100;  // reachability samples per channel
  int n_pairs = 100;    // visibility samples per edge

  // Tree growth.
  double eta_fraction = 0.05;    // step = fraction x joint-range diagonal
  double local_delta_rot = 0.5;  // rad, local-region half width
  double local_delta_trans = 0.25;  // m
  int local_rrt_iters = 300;     // per-keyframe exploration budget

  // Behavior switches.
  bool disable_highlevel = false;   // ablation: plain full-space BiRRT
  bool disable_prioritize = false;  // ablation: keyframe-id sequence order
  bool birrt_direct_shortcut = true;
  bool pass_use_area_ratio = false;

  Budget segment_budget() const {
    return budget_mode == BudgetMode::WallClock
               ? Budget{BudgetMode::WallClock, B_min}
               : Budget{BudgetMode::Iterations, B_min_iters};
  }
};

/// The reference configuration.
PlannerConfig default_config();

enum class PlanStatus {
  Success,
  Timeout,
  NoChannelsFallbackFailed,
  AllSequencesFailed,
  InvalidScene,
};

std::string to_string(PlanStatus s);

struct PhaseTimings {
  double topology = 0.0;      // seconds
  double channel_graph = 0.0;
  double keyframes = 0.0;
  double connection = 0.0;
};

struct PlanDiagnostics {
  int loop_count = 0;
  int channel_count = 0;
  int rejected_loop_count = 0;
  int candidate_path_count = 0;
  std::vector<std::string> chosen_path;  // node labels of the selected path
  int attempted_sequences = 0;
  bool used_fallback = false;
  double elapsed = 0.0;  // seconds, or iterations in iteration mode
  std::uint64_t iterations_used = 0;
};

struct PlanResult {
  PlanStatus status = PlanStatus::InvalidScene;
  std::optional<Trajectory> trajectory;
  PhaseTimings timings;
  PlanDiagnostics diagnostics;
  std::string failure_reason;

  bool success() const { return status == PlanStatus::Success; }
};

/// End-to-end planning: topology analysis, channel-path selection, keyframe
/// sampling, local exploration, and budgeted segment connection, with
/// fallback to full-space bidirectional search when the scene has no usable
/// channel structure. Next-best channel paths are retried when keyframe
/// sampling finds a channel unreachable.
PlanResult plan(const Scene& scene, const PlannerConfig& cfg);

}  // namespace tapom
