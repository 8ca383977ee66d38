#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "tapom/channel_graph.hpp"

namespace tapom {

enum class BudgetMode { WallClock, Iterations };

/// Planning budget: wall-clock seconds, or an iteration count for
/// bit-reproducible runs.
struct Budget {
  BudgetMode mode = BudgetMode::WallClock;
  double value = 0.0;  // seconds or iterations

  Budget scaled(double k) const { return Budget{mode, value * k}; }
};

/// Shared accounting for a planning run: total iterations consumed and the
/// global deadline. Checked inside every tree-growth loop.
class RunBudget {
 public:
  RunBudget(BudgetMode mode, double time_limit_s, std::uint64_t iteration_limit)
      : mode_(mode),
        iteration_limit_(iteration_limit),
        deadline_(std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(time_limit_s))) {}

  void charge(std::uint64_t n = 1) { used_ += n; }
  std::uint64_t used() const { return used_; }
  BudgetMode mode() const { return mode_; }

  bool exhausted() const {
    if (mode_ == BudgetMode::Iterations) return used_ >= iteration_limit_;
    return std::chrono::steady_clock::now() >= deadline_;
  }

  /// Elapsed metric in the unit the mode defines (seconds or iterations).
  double elapsed(std::chrono::steady_clock::time_point t0) const {
    if (mode_ == BudgetMode::Iterations) return static_cast<double>(used_);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }

 private:
  BudgetMode mode_;
  std::uint64_t used_ = 0;
  std::uint64_t iteration_limit_;
  std::chrono::steady_clock::time_point deadline_;
};

/// A collision-free configuration whose object pose lies in a channel.
struct Keyframe {
  int id = -1;  // global creation order, tie-break key
  int channel_index = -1;
  Configuration q;
  geom::Pose pose;
  double priority = 0.0;
  int tree_id = -1;
};

struct KeyframeParams {
  int N_key = 20;
  int k_select = 5;
  int attempt_cap_factor = 50;  // cap = factor * N_key pose draws
};

/// Samples collision-free keyframes in a channel and reduces them to
/// k_select by greedy max-min dispersion in joint space (first pick:
/// farthest from the channel-center reference configuration). Returns an
/// empty vector when the attempt cap passes with zero valid keyframes --
/// the channel is unreachable.
std::vector<Keyframe> sample_keyframes(const Channel& c,
                                       const ValidityChecker& checker,
                                       const KeyframeParams& params,
                                       RngStream& rng, int first_id = 0,
                                       RunBudget* run = nullptr);

/// Local exploration bounds: a per-dimension box around the keyframe
/// intersected with the joint limits, plus the constraint that the object
/// stays within a ball around the channel center.
struct LocalRegion {
  Eigen::VectorXd lo, hi;
  geom::Vec3 workspace_center = geom::Vec3::Zero();
  double workspace_radius = 0.0;

  static LocalRegion around(const Keyframe& k, const RobotModel& model,
                            const Channel& c, double delta_rot,
                            double delta_trans);
  bool contains(const RobotModel& model, const Configuration& q) const;
};

struct ExplorationTree {
  std::vector<Configuration> nodes;
  std::vector<int> parents;  // parents[0] == -1
  int channel_index = -1;
  LocalRegion region;
  std::vector<int> root_keyframe_ids;
};

/// Standard RRT confined to the region, rooted at the keyframe.
ExplorationTree grow_local_rrt(const Keyframe& k, const LocalRegion& region,
                               const ValidityChecker& checker,
                               int iteration_budget, double eta,
                               RngStream& rng, RunBudget* run = nullptr);

/// Pairwise closest-node connection attempts followed by merges, repeated
/// to a fixpoint. Merged trees are re-rooted at the first tree's root.
std::vector<ExplorationTree> connect_and_merge(
    std::vector<ExplorationTree> trees, const ValidityChecker& checker);

/// priority = node count of the merged tree holding the keyframe's root;
/// sorts descending, ties by keyframe id.
void prioritize(std::vector<Keyframe>& keyframes,
                const std::vector<ExplorationTree>& trees);

/// Cartesian product of per-channel keyframes between the endpoints,
/// sorted by descending priority sum (ties by id sequence), truncated to
/// S_max sequences. Each sequence is a list of keyframe ids per channel.
std::vector<std::vector<int>> get_all_paths(
    const std::vector<std::vector<int>>& keyframes_by_channel,
    const std::vector<Keyframe>& all, int S_max);

struct Trajectory {
  std::vector<Configuration> waypoints;
  double validated_resolution = 0.0;
  std::vector<int> keyframe_ids;  // source keyframe sequence, may be empty
};

struct BirrtOptions {
  double eta = 0.0;  // extension step (absolute C-space distance)
  bool direct_shortcut = true;
  bool greedy_connect = true;
};

/// Bidirectional RRT between two valid configurations under a budget.
/// Tries the straight segment first (shortcut), then alternates
/// extend/connect between the two trees.
std::optional<std::vector<Configuration>> birrt(
    const Configuration& q_a, const Configuration& q_b,
    const ValidityChecker& checker, const Budget& budget,
    const BirrtOptions& opts, RngStream& rng, RunBudget* run = nullptr);

struct ConnectReport {
  std::optional<Trajectory> trajectory;
  std::vector<double> attempted_budgets;  // per attempted segment, in order
  int segments_attempted = 0;
};

/// Connects a keyframe sequence segment by segment with geometrically
/// growing budgets (B_min, then x kappa after each success). A failed
/// segment discards the sequence immediately.
ConnectReport birrt_connect(const std::vector<Configuration>& sequence,
                            const std::vector<int>& keyframe_ids,
                            const ValidityChecker& checker, const Budget& B_min,
                            double kappa, const BirrtOptions& opts,
                            RngStream& rng, RunBudget* run = nullptr);

/// Textbook RRT-Connect over the full joint limits; same step and segment
/// validation as the keyframe planner.
std::optional<Trajectory> rrt_connect_baseline(const Configuration& q_start,
                                               const Configuration& q_goal,
                                               const ValidityChecker& checker,
                                               const Budget& time_limit,
                                               double eta, RngStream& rng,
                                               RunBudget* run = nullptr);

/// Plain bidirectional RRT baseline (single-step extends, no greedy
/// connect phase).
std::optional<Trajectory> birrt_plain_baseline(const Configuration& q_start,
                                               const Configuration& q_goal,
                                               const ValidityChecker& checker,
                                               const Budget& time_limit,
                                               double eta, RngStream& rng,
                                               RunBudget* run = nullptr);

}  // namespace tapom
