#include "tapom/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace tapom {

PlannerConfig default_config() { return PlannerConfig{}; }

std::string to_string(PlanStatus s) {
  switch (s) {
    case PlanStatus::Success:
      return "success";
    case PlanStatus::Timeout:
      return "timeout";
    case PlanStatus::NoChannelsFallbackFailed:
      return "no_channels_fallback_failed";
    case PlanStatus::AllSequencesFailed:
      return "all_sequences_failed";
    case PlanStatus::InvalidScene:
      return "invalid_scene";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Phase {
  double* slot;
  Clock::time_point start = Clock::now();
  explicit Phase(double* s) : slot(s) {}
  ~Phase() { *slot += seconds_since(start); }
};

}  // namespace

PlanResult plan(const Scene& scene, const PlannerConfig& cfg) {
  const Clock::time_point t0 = Clock::now();
  PlanResult result;
  RunBudget run(cfg.budget_mode, cfg.time_limit, cfg.iteration_limit);
  RngStream rng(cfg.seed);

  auto finish = [&](PlanStatus status, const std::string& reason = "") {
    result.status = status;
    result.failure_reason = reason;
    result.diagnostics.iterations_used = run.used();
    result.diagnostics.elapsed = run.elapsed(t0);
    return result;
  };

  ValidityChecker checker(scene, cfg.clearance_margin, cfg.resolution);
  if (!checker.config_valid(scene.start))
    return finish(PlanStatus::InvalidScene, "start invalid under this config");
  if (!checker.config_valid(scene.goal))
    return finish(PlanStatus::InvalidScene, "goal invalid under this config");

  const double eta = cfg.eta_fraction * scene.robot.limits.range_diagonal();
  BirrtOptions birrt_opts;
  birrt_opts.eta = eta;
  birrt_opts.direct_shortcut = cfg.birrt_direct_shortcut;
  birrt_opts.greedy_connect = true;

  // Full-space bidirectional search with whatever budget remains. Used when
  // the scene offers no channel structure (or the high level is ablated).
  auto fallback = [&](const std::string& why) -> PlanResult {
    result.diagnostics.used_fallback = true;
    Phase phase(&result.timings.connection);
    const Budget remaining{cfg.budget_mode,
                           std::numeric_limits<double>::infinity()};
    RngStream fb_rng = rng.derive("fallback");
    const auto path = birrt(scene.start, scene.goal, checker, remaining,
                            birrt_opts, fb_rng, &run);
    if (path) {
      const double fine = checker.resolution() / 10.0;
      bool ok = true;
      for (size_t i = 0; ok && i + 1 < path->size(); ++i)
        ok = checker.segment_valid_at((*path)[i], (*path)[i + 1], fine);
      if (ok) {
        Trajectory t;
        t.waypoints = *path;
        t.validated_resolution = fine;
        result.trajectory = std::move(t);
        return finish(PlanStatus::Success);
      }
    }
    if (run.exhausted()) return finish(PlanStatus::Timeout, why + "; fallback timed out");
    return finish(PlanStatus::NoChannelsFallbackFailed, why);
  };

  if (cfg.disable_highlevel) return fallback("high-level module disabled");

  // --- Topology: contact graph, loops, channels ---------------------------
  std::vector<Channel> channels;
  {
    Phase phase(&result.timings.topology);
    TopoGraph topo;
    try {
      topo = build_topo_graph(scene, cfg.contact_tol);
    } catch (const AmbiguousContact& e) {
      return finish(PlanStatus::InvalidScene, e.what());
    }
    const std::vector<Loop> loops = detect_simple_loops(topo, cfg.max_loop_len);
    ChannelExtraction extraction = extract_channels(loops, scene, cfg.filter);
    result.diagnostics.loop_count = static_cast<int>(loops.size());
    result.diagnostics.rejected_loop_count =
        static_cast<int>(extraction.rejections.size());
    channels = std::move(extraction.channels);
    result.diagnostics.channel_count = static_cast<int>(channels.size());
  }
  if (run.exhausted()) return finish(PlanStatus::Timeout, "after topology");
  if (channels.empty()) return fallback("no channels in the scene");

  // --- Channel graph and candidate paths ----------------------------------
  ChannelGraph graph;
  std::vector<ChannelPath> candidates;
  {
    Phase phase(&result.timings.channel_graph);
    ChannelGraphParams params;
    params.alpha = cfg.alpha;
    params.beta = cfg.beta;
    params.epsilon = cfg.epsilon;
    params.n_samples = cfg.n_samples;
    params.n_pairs = cfg.n_pairs;
    params.pass_use_area_ratio = cfg.pass_use_area_ratio;
    RngStream graph_rng = rng.derive("channel_graph");
    try {
      graph = build_channel_graph(channels, checker, scene.start, scene.goal,
                                  params, graph_rng);
    } catch (const DisconnectedEndpoints&) {
      return fallback("channel graph disconnected from the endpoints");
    }
    candidates = enumerate_paths(graph, cfg.L_max);
    for (ChannelPath& p : candidates) p.score = score_path(graph, p, cfg.gamma);
    auto labels = [&](const ChannelPath& p) {
      std::vector<std::string> out;
      for (int n : p.nodes) out.push_back(graph.nodes[static_cast<size_t>(n)].label);
      return out;
    };
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](const ChannelPath& a, const ChannelPath& b) {
                       if (a.score != b.score) return a.score > b.score;
                       if (a.nodes.size() != b.nodes.size())
                         return a.nodes.size() < b.nodes.size();
                       return labels(a) < labels(b);
                     });
    result.diagnostics.candidate_path_count = static_cast<int>(candidates.size());
  }
  if (run.exhausted()) return finish(PlanStatus::Timeout, "after channel graph");
  if (candidates.empty()) return fallback("no start-goal channel path");

  // --- Keyframes, local exploration, budgeted connection ------------------
  // Keyframes and merged local trees are cached per channel so that retrying
  // the next-best candidate path does not redo completed work.
  std::map<int, std::vector<Keyframe>> keyframe_cache;
  std::map<int, std::vector<ExplorationTree>> tree_cache;
  int next_keyframe_id = 0;

  KeyframeParams kf_params;
  kf_params.N_key = cfg.N_key;
  kf_params.k_select = cfg.k_select;

  auto channel_keyframes = [&](int ci) -> std::vector<Keyframe>& {
    auto it = keyframe_cache.find(ci);
    if (it != keyframe_cache.end()) return it->second;
    RngStream kf_rng = rng.derive("keyframes", static_cast<std::uint64_t>(ci));
    std::vector<Keyframe> kfs =
        sample_keyframes(channels[static_cast<size_t>(ci)], checker, kf_params,
                         kf_rng, next_keyframe_id, &run);
    next_keyframe_id += static_cast<int>(kfs.size());
    for (Keyframe& k : kfs) k.channel_index = ci;

    if (!kfs.empty()) {
      std::vector<ExplorationTree> trees;
      trees.reserve(kfs.size());
      for (size_t i = 0; i < kfs.size(); ++i) {
        const LocalRegion region = LocalRegion::around(
            kfs[i], scene.robot, channels[static_cast<size_t>(ci)],
            cfg.local_delta_rot, cfg.local_delta_trans);
        RngStream tree_rng = rng.derive(
            "local_tree",
            static_cast<std::uint64_t>(ci) * 1024 + static_cast<std::uint64_t>(i));
        trees.push_back(grow_local_rrt(kfs[i], region, checker,
                                       cfg.local_rrt_iters, eta, tree_rng,
                                       &run));
      }
      trees = connect_and_merge(std::move(trees), checker);
      prioritize(kfs, trees);
      tree_cache[ci] = std::move(trees);
    }
    return keyframe_cache[ci] = std::move(kfs);
  };

  int sequence_counter = 0;
  for (const ChannelPath& candidate : candidates) {
    if (run.exhausted()) return finish(PlanStatus::Timeout, "candidate loop");

    std::vector<int> path_channels;
    for (int n : candidate.nodes) {
      const int ci = graph.nodes[static_cast<size_t>(n)].channel_index;
      if (ci >= 0) path_channels.push_back(ci);
    }

    // Keyframe stage; an unreachable channel abandons this candidate.
    bool reachable = true;
    std::vector<Keyframe> all_keyframes;
    std::vector<std::vector<int>> ids_by_channel;
    {
      Phase phase(&result.timings.keyframes);
      for (int ci : path_channels) {
        const std::vector<Keyframe>& kfs = channel_keyframes(ci);
        if (kfs.empty()) {
          reachable = false;
          break;
        }
        std::vector<Keyframe> ordered = kfs;  // priority order from cache
        if (cfg.disable_prioritize) {
          for (Keyframe& k : ordered) k.priority = 0.0;
          std::sort(ordered.begin(), ordered.end(),
                    [](const Keyframe& a, const Keyframe& b) { return a.id < b.id; });
        }
        std::vector<int> ids;
        ids.reserve(ordered.size());
        for (const Keyframe& k : ordered) ids.push_back(k.id);
        ids_by_channel.push_back(std::move(ids));
        all_keyframes.insert(all_keyframes.end(), ordered.begin(), ordered.end());
      }
    }
    if (!reachable) continue;

    const std::vector<std::vector<int>> sequences =
        get_all_paths(ids_by_channel, all_keyframes, cfg.S_max);

    auto config_of = [&](int id) -> const Configuration& {
      for (const Keyframe& k : all_keyframes)
        if (k.id == id) return k.q;
      throw Error("unknown keyframe id");
    };

    Phase phase(&result.timings.connection);
    for (const std::vector<int>& seq : sequences) {
      if (run.exhausted()) return finish(PlanStatus::Timeout, "sequence loop");
      std::vector<Configuration> waypoints{scene.start};
      for (int id : seq) waypoints.push_back(config_of(id));
      waypoints.push_back(scene.goal);

      RngStream connect_rng =
          rng.derive("connect", static_cast<std::uint64_t>(sequence_counter));
      ++sequence_counter;
      ++result.diagnostics.attempted_sequences;
      const ConnectReport report =
          birrt_connect(waypoints, seq, checker, cfg.segment_budget(),
                        cfg.kappa, birrt_opts, connect_rng, &run);
      if (std::getenv("TAPOM_TRACE")) {
        std::fprintf(stderr, "[trace] seq %d kf(", sequence_counter - 1);
        for (size_t k = 0; k < seq.size(); ++k)
          std::fprintf(stderr, "%s%d", k ? "," : "", seq[k]);
        std::fprintf(stderr, ") segments=%d/%zu %s used=%llu\n",
                     report.segments_attempted, waypoints.size() - 1,
                     report.trajectory ? "ok" : "fail",
                     static_cast<unsigned long long>(run.used()));
      }
      if (report.trajectory) {
        result.trajectory = report.trajectory;
        for (int n : candidate.nodes)
          result.diagnostics.chosen_path.push_back(
              graph.nodes[static_cast<size_t>(n)].label);
        return finish(PlanStatus::Success);
      }
    }
  }

  if (run.exhausted()) return finish(PlanStatus::Timeout, "budget exhausted");
  return finish(PlanStatus::AllSequencesFailed,
                "every keyframe sequence failed to connect");
}

}  // namespace tapom
