#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tapom/planner.hpp"

namespace tapom {

enum class PlannerId {
  Tapom,
  TapomNoHighlevel,
  TapomNoPrioritize,
  RrtConnect,
  BirrtPlain,
};

std::string to_string(PlannerId id);
std::optional<PlannerId> planner_from_string(const std::string& name);
std::vector<PlannerId> all_planners();

/// One benchmark trial. `elapsed` is wall seconds in wall-clock mode and
/// consumed iteration units in iteration mode; trajectory stats are present
/// only on success.
struct TrialRecord {
  std::string scene_id;
  PlannerId planner = PlannerId::Tapom;
  std::uint64_t seed = 0;
  bool success = false;
  double elapsed = 0.0;
  int waypoints = 0;
  double joint_len = 0.0;
  double trans_len_m = 0.0;
  double rot_len_rad = 0.0;
};

struct MetricsRow {
  std::string scene_id;
  PlannerId planner = PlannerId::Tapom;
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  double avg_time = 0.0;          // failures counted at the budget cap
  double avg_success_time = 0.0;  // NaN when there are no successes
};

struct MetricsTable {
  std::vector<MetricsRow> rows;
};

struct NamedScene {
  std::string id;
  Scene scene;
};

/// Dispatches one planner run (the keyframe planner, its two ablations, or
/// a baseline) under the shared budget configuration.
PlanResult run_planner(PlannerId id, const Scene& scene,
                       const PlannerConfig& cfg);

struct BenchmarkResult {
  std::vector<TrialRecord> trials;
  MetricsTable metrics;
};

/// Runs `trials` seeds (cfg.seed + 0 .. + trials-1) for every
/// (scene, planner) pair and aggregates success rate, average time
/// (failures at the cap), and average successful time.
BenchmarkResult run_benchmark(const std::vector<NamedScene>& scenes,
                              const std::vector<PlannerId>& planners,
                              int trials, const PlannerConfig& cfg);

/// Pure aggregation step, recomputable from the per-trial records.
MetricsTable aggregate_metrics(const std::vector<TrialRecord>& trials,
                               double budget_cap);

struct TrajectoryStats {
  int waypoints = 0;
  double joint_len = 0.0;
  double trans_len_m = 0.0;
  double rot_len_rad = 0.0;
};

TrajectoryStats trajectory_stats(const RobotModel& robot, const Trajectory& t);

/// Shortest round-trip decimal formatting (locale independent).
std::string format_double(double v);

/// CSV with the fixed column set
/// scene,planner,seed,success,elapsed_s,waypoints,joint_len,trans_len_m,rot_len_rad.
std::string trials_to_csv(const std::vector<TrialRecord>& trials);

std::string metrics_to_text(const MetricsTable& table);

// --- Trajectory files ------------------------------------------------------

/// Waypoint rows (one configuration per line, space separated, full
/// precision) under a '#'-prefixed metadata header.
std::string trajectory_to_text(const Trajectory& t, const std::string& scene_id,
                               const std::string& planner, std::uint64_t seed,
                               double elapsed);

struct TrajectoryFile {
  std::string scene_id;
  std::string planner;
  std::uint64_t seed = 0;
  double resolution = 0.0;  // certificate resolution fraction
  double elapsed = 0.0;
  std::vector<Configuration> waypoints;
};

TrajectoryFile trajectory_from_text(const std::string& text);

/// Independent re-validation: exact endpoint match, limits, and segment
/// validity at 10x finer resolution than the certificate.
bool validate_trajectory(const Scene& scene, const TrajectoryFile& file,
                         std::string* why = nullptr);

/// Orthographic two-view (top + side) SVG of the scene, its channels, and
/// optionally the object's path along a trajectory. Byte-stable for
/// identical inputs.
std::string render_svg(const Scene& scene,
                       const std::optional<Trajectory>& trajectory);

}  // namespace tapom
