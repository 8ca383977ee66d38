#include "tapom/lowlevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tapom {

using geom::Pose;
using geom::Quat;
using geom::Vec2;
using geom::Vec3;

namespace {

constexpr double kAxisConeRad = 15.0 * M_PI / 180.0;

Pose object_pose_with_axis(const RobotModel& robot, const Vec3& position,
                           const Vec3& axis_dir, double roll) {
  const Vec3 local_axis = robot.attached_object.long_axis_local();
  const Quat align = Quat::FromTwoVectors(local_axis, axis_dir);
  const Quat spin(Eigen::AngleAxisd(roll, local_axis));
  return Pose{position, (align * spin).normalized()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Keyframe sampling and dispersion-based selection
// ---------------------------------------------------------------------------

std::vector<Keyframe> sample_keyframes(const Channel& c,
                                       const ValidityChecker& checker,
                                       const KeyframeParams& params,
                                       RngStream& rng, int first_id,
                                       RunBudget* run) {
  const RobotModel& robot = checker.scene().robot;

  // Reference configuration at the channel center, used as the dispersion
  // anchor. Falls back to the limits midpoint when the center is infeasible.
  Configuration q_ref = robot.limits.midpoint();
  {
    const Pose center_pose =
        object_pose_with_axis(robot, c.center, c.plane.normal, 0.0);
    if (const auto q = ik_solve(robot, center_pose, q_ref)) q_ref = *q;
  }

  std::vector<Configuration> candidates;
  std::vector<Pose> candidate_poses;
  const int cap = params.attempt_cap_factor * params.N_key;
  for (int attempt = 0;
       attempt < cap && static_cast<int>(candidates.size()) < params.N_key;
       ++attempt) {
    if (run) {
      if (run->exhausted()) break;
      run->charge();
    }
    const Vec2 p2 = geom::sample_in_polygon(c.polygon, rng);
    const double band = 0.5 * c.thickness;
    const double offset = band > 0 ? rng.uniform(-band, band) : 0.0;
    const Vec3 position = c.plane.lift(p2) + offset * c.plane.normal;
    const Vec3 dir =
        geom::sample_direction_in_cone(c.plane.normal, kAxisConeRad, rng);
    const double roll = rng.uniform(0.0, 2.0 * M_PI);
    const Pose target = object_pose_with_axis(robot, position, dir, roll);
    const Configuration seed = sample_configuration(robot, rng);
    const auto q = ik_solve(robot, target, seed);
    if (!q) continue;
    if (!checker.pose_valid(target) || !checker.config_valid(*q)) continue;
    candidates.push_back(*q);
    candidate_poses.push_back(forward_kinematics(robot, *q).object_pose);
  }
  if (candidates.empty()) return {};  // channel unreachable

  // Greedy max-min dispersion: first the candidate farthest from the
  // reference, then whatever maximizes the minimum distance to the picks.
  const int want = std::min<int>(params.k_select,
                                 static_cast<int>(candidates.size()));
  std::vector<int> picked;
  std::vector<char> used(candidates.size(), 0);
  {
    int best = 0;
    double best_d = -1.0;
    for (size_t i = 0; i < candidates.size(); ++i) {
      const double d = (candidates[i] - q_ref).norm();
      if (d > best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    picked.push_back(best);
    used[static_cast<size_t>(best)] = 1;
  }
  while (static_cast<int>(picked.size()) < want) {
    int best = -1;
    double best_d = -1.0;
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (used[i]) continue;
      double min_d = std::numeric_limits<double>::infinity();
      for (int p : picked)
        min_d = std::min(min_d,
                         (candidates[i] - candidates[static_cast<size_t>(p)]).norm());
      if (min_d > best_d) {
        best_d = min_d;
        best = static_cast<int>(i);
      }
    }
    picked.push_back(best);
    used[static_cast<size_t>(best)] = 1;
  }

  std::vector<Keyframe> out;
  out.reserve(picked.size());
  for (size_t i = 0; i < picked.size(); ++i) {
    Keyframe k;
    k.id = first_id + static_cast<int>(i);
    k.channel_index = -1;  // caller assigns
    k.q = candidates[static_cast<size_t>(picked[i])];
    k.pose = candidate_poses[static_cast<size_t>(picked[i])];
    out.push_back(std::move(k));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local exploration
// ---------------------------------------------------------------------------

LocalRegion LocalRegion::around(const Keyframe& k, const RobotModel& model,
                                const Channel& c, double delta_rot,
                                double delta_trans) {
  LocalRegion r;
  const int n = model.limits.dof();
  r.lo = Eigen::VectorXd(n);
  r.hi = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) {
    const double delta =
        model.dimension_is_translation(i) ? delta_trans : delta_rot;
    r.lo[i] = std::max(model.limits.lo[i], k.q[i] - delta);
    r.hi[i] = std::min(model.limits.hi[i], k.q[i] + delta);
  }
  r.workspace_center = c.center;
  r.workspace_radius = 2.0 * c.incircle_radius;
  return r;
}

bool LocalRegion::contains(const RobotModel& model,
                           const Configuration& q) const {
  for (int i = 0; i < q.size(); ++i)
    if (q[i] < lo[i] - 1e-12 || q[i] > hi[i] + 1e-12) return false;
  const Vec3 obj = forward_kinematics(model, q).object_pose.position;
  return (obj - workspace_center).norm() <= workspace_radius + 1e-12;
}

namespace {

int nearest_node(const std::vector<Configuration>& nodes,
                 const Configuration& q) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < nodes.size(); ++i) {
    const double d = (nodes[i] - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

Configuration steer(const Configuration& from, const Configuration& to,
                    double eta) {
  const double d = (to - from).norm();
  if (d <= eta) return to;
  return from + (to - from) * (eta / d);
}

}  // namespace

ExplorationTree grow_local_rrt(const Keyframe& k, const LocalRegion& region,
                               const ValidityChecker& checker,
                               int iteration_budget, double eta,
                               RngStream& rng, RunBudget* run) {
  ExplorationTree tree;
  tree.channel_index = k.channel_index;
  tree.region = region;
  tree.root_keyframe_ids = {k.id};
  tree.nodes.push_back(k.q);
  tree.parents.push_back(-1);

  const RobotModel& model = checker.scene().robot;
  const int n = model.limits.dof();
  for (int iter = 0; iter < iteration_budget; ++iter) {
    if (run) {
      if (run->exhausted()) break;
      run->charge();
    }
    Configuration q_rand(n);
    for (int i = 0; i < n; ++i) q_rand[i] = rng.uniform(region.lo[i], region.hi[i]);
    const int near = nearest_node(tree.nodes, q_rand);
    const Configuration q_new = steer(tree.nodes[static_cast<size_t>(near)],
                                      q_rand, eta);
    if (!region.contains(model, q_new)) continue;
    if (!checker.segment_valid(tree.nodes[static_cast<size_t>(near)], q_new))
      continue;
    tree.nodes.push_back(q_new);
    tree.parents.push_back(near);
  }
  return tree;
}

namespace {

// Re-roots `tree` at node index `new_root` by reversing the parent chain.
void reroot(ExplorationTree& tree, int new_root) {
  std::vector<int> chain;
  for (int v = new_root; v != -1; v = tree.parents[static_cast<size_t>(v)])
    chain.push_back(v);
  for (size_t i = chain.size(); i-- > 1;)
    tree.parents[static_cast<size_t>(chain[i])] = chain[i - 1];
  tree.parents[static_cast<size_t>(new_root)] = -1;
}

}  // namespace

std::vector<ExplorationTree> connect_and_merge(
    std::vector<ExplorationTree> trees, const ValidityChecker& checker) {
  bool merged_any = true;
  while (merged_any) {
    merged_any = false;
    for (size_t i = 0; i < trees.size() && !merged_any; ++i) {
      for (size_t j = i + 1; j < trees.size() && !merged_any; ++j) {
        // Closest node pair across the two trees.
        int best_a = 0, best_b = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t a = 0; a < trees[i].nodes.size(); ++a)
          for (size_t b = 0; b < trees[j].nodes.size(); ++b) {
            const double d = (trees[i].nodes[a] - trees[j].nodes[b]).squaredNorm();
            if (d < best_d) {
              best_d = d;
              best_a = static_cast<int>(a);
              best_b = static_cast<int>(b);
            }
          }
        if (!checker.segment_valid(trees[i].nodes[static_cast<size_t>(best_a)],
                                   trees[j].nodes[static_cast<size_t>(best_b)]))
          continue;

        ExplorationTree& dst = trees[i];
        ExplorationTree src = std::move(trees[j]);
        trees.erase(trees.begin() + static_cast<long>(j));
        reroot(src, best_b);
        const int offset = static_cast<int>(dst.nodes.size());
        for (size_t a = 0; a < src.nodes.size(); ++a) {
          dst.nodes.push_back(src.nodes[a]);
          const int p = src.parents[a];
          dst.parents.push_back(p == -1 ? best_a : p + offset);
        }
        // The bridge edge: src's new root hangs off dst's closest node.
        dst.root_keyframe_ids.insert(dst.root_keyframe_ids.end(),
                                     src.root_keyframe_ids.begin(),
                                     src.root_keyframe_ids.end());
        merged_any = true;
      }
    }
  }
  return trees;
}

void prioritize(std::vector<Keyframe>& keyframes,
                const std::vector<ExplorationTree>& trees) {
  for (Keyframe& k : keyframes) {
    k.priority = 0.0;
    k.tree_id = -1;
    for (size_t t = 0; t < trees.size(); ++t) {
      const auto& ids = trees[t].root_keyframe_ids;
      if (std::find(ids.begin(), ids.end(), k.id) != ids.end()) {
        k.priority = static_cast<double>(trees[t].nodes.size());
        k.tree_id = static_cast<int>(t);
        break;
      }
    }
  }
  std::sort(keyframes.begin(), keyframes.end(),
            [](const Keyframe& a, const Keyframe& b) {
              if (a.priority != b.priority) return a.priority > b.priority;
              return a.id < b.id;
            });
}

std::vector<std::vector<int>> get_all_paths(
    const std::vector<std::vector<int>>& keyframes_by_channel,
    const std::vector<Keyframe>& all, int S_max) {
  for (const auto& ks : keyframes_by_channel)
    if (ks.empty()) return {};

  std::vector<double> priority_by_id;
  for (const Keyframe& k : all) {
    if (k.id >= static_cast<int>(priority_by_id.size()))
      priority_by_id.resize(static_cast<size_t>(k.id) + 1, 0.0);
    priority_by_id[static_cast<size_t>(k.id)] = k.priority;
  }

  std::vector<std::vector<int>> product{{}};
  for (const auto& ks : keyframes_by_channel) {
    std::vector<std::vector<int>> next;
    next.reserve(product.size() * ks.size());
    for (const auto& prefix : product)
      for (int id : ks) {
        auto seq = prefix;
        seq.push_back(id);
        next.push_back(std::move(seq));
      }
    product = std::move(next);
  }

  auto sum_priority = [&](const std::vector<int>& seq) {
    double s = 0.0;
    for (int id : seq) s += priority_by_id[static_cast<size_t>(id)];
    return s;
  };
  std::stable_sort(product.begin(), product.end(),
                   [&](const auto& a, const auto& b) {
                     const double sa = sum_priority(a), sb = sum_priority(b);
                     if (sa != sb) return sa > sb;
                     return a < b;
                   });
  if (static_cast<int>(product.size()) > S_max) product.resize(static_cast<size_t>(S_max));
  return product;
}

// ---------------------------------------------------------------------------
// Bidirectional RRT
// ---------------------------------------------------------------------------

namespace {

struct Tree {
  std::vector<Configuration> nodes;
  std::vector<int> parents;

  int add(const Configuration& q, int parent) {
    nodes.push_back(q);
    parents.push_back(parent);
    return static_cast<int>(nodes.size()) - 1;
  }
  std::vector<Configuration> path_from_root(int idx) const {
    std::vector<Configuration> out;
    for (int v = idx; v != -1; v = parents[static_cast<size_t>(v)])
      out.push_back(nodes[static_cast<size_t>(v)]);
    std::reverse(out.begin(), out.end());
    return out;
  }
};

class BudgetClock {
 public:
  explicit BudgetClock(const Budget& b)
      : budget_(b), start_(std::chrono::steady_clock::now()) {}

  void charge(std::uint64_t n = 1) { iters_ += n; }
  bool exhausted() const {
    if (budget_.mode == BudgetMode::Iterations)
      return static_cast<double>(iters_) >= budget_.value;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
               .count() >= budget_.value;
  }

 private:
  Budget budget_;
  std::uint64_t iters_ = 0;
  std::chrono::steady_clock::time_point start_;
};

enum class ExtendStatus { Trapped, Advanced, Reached };

ExtendStatus extend_tree(Tree& tree, const Configuration& target, double eta,
                         const ValidityChecker& checker, int& new_index) {
  const int near = nearest_node(tree.nodes, target);
  const Configuration q_new = steer(tree.nodes[static_cast<size_t>(near)],
                                    target, eta);
  if (!checker.segment_valid(tree.nodes[static_cast<size_t>(near)], q_new))
    return ExtendStatus::Trapped;
  new_index = tree.add(q_new, near);
  return (q_new - target).norm() < 1e-12 ? ExtendStatus::Reached
                                         : ExtendStatus::Advanced;
}

}  // namespace

std::optional<std::vector<Configuration>> birrt(
    const Configuration& q_a, const Configuration& q_b,
    const ValidityChecker& checker, const Budget& budget,
    const BirrtOptions& opts, RngStream& rng, RunBudget* run) {
  if ((q_a - q_b).norm() < 1e-15) return std::vector<Configuration>{q_a};

  BudgetClock clock(budget);
  auto charge = [&](std::uint64_t n = 1) {
    clock.charge(n);
    if (run) run->charge(n);
  };
  auto out_of_budget = [&]() {
    return clock.exhausted() || (run && run->exhausted());
  };

  if (opts.direct_shortcut) {
    charge();
    if (checker.segment_valid(q_a, q_b))
      return std::vector<Configuration>{q_a, q_b};
  }

  const RobotModel& model = checker.scene().robot;
  const int n = model.limits.dof();
  Tree ta, tb;
  ta.add(q_a, -1);
  tb.add(q_b, -1);
  Tree* grow = &ta;
  Tree* other = &tb;
  bool grow_is_start = true;

  while (!out_of_budget()) {
    charge();
    Configuration q_rand(n);
    for (int i = 0; i < n; ++i)
      q_rand[i] = rng.uniform(model.limits.lo[i], model.limits.hi[i]);

    int new_idx = -1;
    if (extend_tree(*grow, q_rand, opts.eta, checker, new_idx) !=
        ExtendStatus::Trapped) {
      const Configuration& q_new = grow->nodes[static_cast<size_t>(new_idx)];
      // Connect the other tree toward the new node.
      int other_idx = -1;
      ExtendStatus status = ExtendStatus::Advanced;
      while (status == ExtendStatus::Advanced && !out_of_budget()) {
        charge();
        status = extend_tree(*other, q_new, opts.eta, checker,
                             other_idx);
        if (!opts.greedy_connect && status == ExtendStatus::Advanced) break;
      }
      if (status == ExtendStatus::Reached) {
        auto path_grow = grow->path_from_root(new_idx);
        auto path_other = other->path_from_root(other_idx);
        // Meeting configuration appears in both paths; drop one copy.
        std::reverse(path_other.begin(), path_other.end());
        path_other.erase(path_other.begin());
        std::vector<Configuration> full = std::move(path_grow);
        full.insert(full.end(), path_other.begin(), path_other.end());
        if (!grow_is_start) std::reverse(full.begin(), full.end());
        return full;
      }
    }
    std::swap(grow, other);
    grow_is_start = !grow_is_start;
  }
  return std::nullopt;
}

namespace {

std::optional<Trajectory> finalize_trajectory(
    std::vector<Configuration> waypoints, const ValidityChecker& checker,
    std::vector<int> keyframe_ids) {
  // Certify at 10x finer resolution before emitting; a trajectory that
  // fails the finer check is treated as a planning failure.
  const double fine = checker.resolution() / 10.0;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i)
    if (!checker.segment_valid_at(waypoints[i], waypoints[i + 1], fine))
      return std::nullopt;
  Trajectory t;
  t.waypoints = std::move(waypoints);
  t.validated_resolution = fine;
  t.keyframe_ids = std::move(keyframe_ids);
  return t;
}

}  // namespace

ConnectReport birrt_connect(const std::vector<Configuration>& sequence,
                            const std::vector<int>& keyframe_ids,
                            const ValidityChecker& checker, const Budget& B_min,
                            double kappa, const BirrtOptions& opts,
                            RngStream& rng, RunBudget* run) {
  ConnectReport report;
  if (sequence.size() < 2) {
    if (sequence.size() == 1)
      report.trajectory = finalize_trajectory({sequence[0]}, checker, keyframe_ids);
    return report;
  }

  Budget b_cur = B_min;
  std::vector<Configuration> waypoints{sequence.front()};
  for (size_t i = 0; i + 1 < sequence.size(); ++i) {
    if (run && run->exhausted()) return report;
    report.attempted_budgets.push_back(b_cur.value);
    ++report.segments_attempted;
    RngStream seg_rng = rng.derive("segment", i);
    const auto part =
        birrt(sequence[i], sequence[i + 1], checker, b_cur, opts, seg_rng, run);
    if (!part) return report;  // discard the whole sequence
    waypoints.insert(waypoints.end(), part->begin() + 1, part->end());
    b_cur = b_cur.scaled(kappa);
  }
  report.trajectory =
      finalize_trajectory(std::move(waypoints), checker, keyframe_ids);
  return report;
}

std::optional<Trajectory> rrt_connect_baseline(const Configuration& q_start,
                                               const Configuration& q_goal,
                                               const ValidityChecker& checker,
                                               const Budget& time_limit,
                                               double eta, RngStream& rng,
                                               RunBudget* run) {
  BirrtOptions opts;
  opts.eta = eta;
  opts.direct_shortcut = false;
  opts.greedy_connect = true;
  const auto path = birrt(q_start, q_goal, checker, time_limit, opts, rng, run);
  if (!path) return std::nullopt;
  return finalize_trajectory(*path, checker, {});
}

std::optional<Trajectory> birrt_plain_baseline(const Configuration& q_start,
                                               const Configuration& q_goal,
                                               const ValidityChecker& checker,
                                               const Budget& time_limit,
                                               double eta, RngStream& rng,
                                               RunBudget* run) {
  BirrtOptions opts;
  opts.eta = eta;
  opts.direct_shortcut = false;
  opts.greedy_connect = false;
  const auto path = birrt(q_start, q_goal, checker, time_limit, opts, rng, run);
  if (!path) return std::nullopt;
  return finalize_trajectory(*path, checker, {});
}

}  // namespace tapom
