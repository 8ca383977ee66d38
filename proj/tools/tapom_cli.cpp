// Command line front end: plan / bench / analyze / validate.
//
// Exit codes: 0 success, 1 planning failure (or invalid trajectory for
// `validate`), 2 input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tapom/harness.hpp"
#include "tapom/topology.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPlanningFailure = 1;
constexpr int kExitInputError = 2;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tapom::Error("cannot write '" + path + "'");
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw tapom::Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scene_id_from_path(const std::string& path) {
  return fs::path(path).stem().string();
}

// --- planner config overrides (JSON) ---------------------------------------

void apply_config_json(tapom::PlannerConfig& cfg, const json& j,
                       const std::string& path) {
  auto num = [&](const json& v, const std::string& p) {
    if (!v.is_number()) throw tapom::SchemaError(p, "expected a number");
    return v.get<double>();
  };
  auto integer = [&](const json& v, const std::string& p) {
    if (!v.is_number_integer()) throw tapom::SchemaError(p, "expected an integer");
    return v.get<std::int64_t>();
  };
  auto boolean = [&](const json& v, const std::string& p) {
    if (!v.is_boolean()) throw tapom::SchemaError(p, "expected a boolean");
    return v.get<bool>();
  };

  if (!j.is_object()) throw tapom::SchemaError(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const std::string p = path + "." + key;
    if (key == "alpha") cfg.alpha = num(value, p);
    else if (key == "beta") cfg.beta = num(value, p);
    else if (key == "gamma") cfg.gamma = num(value, p);
    else if (key == "L_max") cfg.L_max = static_cast<int>(integer(value, p));
    else if (key == "epsilon") cfg.epsilon = num(value, p);
    else if (key == "N_key") cfg.N_key = static_cast<int>(integer(value, p));
    else if (key == "k_select") cfg.k_select = static_cast<int>(integer(value, p));
    else if (key == "S_max") cfg.S_max = static_cast<int>(integer(value, p));
    else if (key == "kappa") cfg.kappa = num(value, p);
    else if (key == "B_min") cfg.B_min = num(value, p);
    else if (key == "time_limit") cfg.time_limit = num(value, p);
    else if (key == "budget_mode") {
      const std::string mode = value.is_string() ? value.get<std::string>() : "";
      if (mode == "wall_clock") cfg.budget_mode = tapom::BudgetMode::WallClock;
      else if (mode == "iterations") cfg.budget_mode = tapom::BudgetMode::Iterations;
      else throw tapom::SchemaError(p, "expected 'wall_clock' or 'iterations'");
    } else if (key == "B_min_iters") cfg.B_min_iters = num(value, p);
    else if (key == "iteration_limit")
      cfg.iteration_limit = static_cast<std::uint64_t>(integer(value, p));
    else if (key == "max_loop_len") cfg.max_loop_len = static_cast<int>(integer(value, p));
    else if (key == "contact_tol") cfg.contact_tol = num(value, p);
    else if (key == "clearance_margin") cfg.clearance_margin = num(value, p);
    else if (key == "resolution") cfg.resolution = num(value, p);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(integer(value, p));
    else if (key == "n_samples") cfg.n_samples = static_cast<int>(integer(value, p));
    else if (key == "n_pairs") cfg.n_pairs = static_cast<int>(integer(value, p));
    else if (key == "eta_fraction") cfg.eta_fraction = num(value, p);
    else if (key == "local_delta_rot") cfg.local_delta_rot = num(value, p);
    else if (key == "local_delta_trans") cfg.local_delta_trans = num(value, p);
    else if (key == "local_rrt_iters") cfg.local_rrt_iters = static_cast<int>(integer(value, p));
    else if (key == "disable_highlevel") cfg.disable_highlevel = boolean(value, p);
    else if (key == "disable_prioritize") cfg.disable_prioritize = boolean(value, p);
    else if (key == "birrt_direct_shortcut") cfg.birrt_direct_shortcut = boolean(value, p);
    else if (key == "pass_use_area_ratio") cfg.pass_use_area_ratio = boolean(value, p);
    else if (key == "filter") {
      if (!value.is_object()) throw tapom::SchemaError(p, "expected an object");
      for (const auto& [fk, fv] : value.items()) {
        const std::string fp = p + "." + fk;
        if (fk == "max_residual") cfg.filter.max_residual = num(fv, fp);
        else if (fk == "min_area") cfg.filter.min_area = num(fv, fp);
        else if (fk == "shrink_margin") cfg.filter.shrink_margin = num(fv, fp);
        else if (fk == "interior_samples")
          cfg.filter.interior_samples = static_cast<int>(integer(fv, fp));
        else if (fk == "max_thickness_probe")
          cfg.filter.max_thickness_probe = num(fv, fp);
        else if (fk == "allow_single_parent_loops")
          cfg.filter.allow_single_parent_loops = boolean(fv, fp);
        else throw tapom::SchemaError(fp, "unknown config field");
      }
    } else {
      throw tapom::SchemaError(p, "unknown config field");
    }
  }
}

tapom::PlannerConfig load_config(const std::string& config_path,
                                 std::optional<std::uint64_t> seed_override) {
  tapom::PlannerConfig cfg = tapom::default_config();
  if (!config_path.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(config_path));
    } catch (const json::exception& e) {
      throw tapom::ParseError(std::string("config: invalid JSON: ") + e.what());
    }
    apply_config_json(cfg, doc, "$");
  }
  if (seed_override) cfg.seed = *seed_override;
  return cfg;
}

std::string channel_graph_dot_for(const tapom::Scene& scene,
                                  const tapom::PlannerConfig& cfg) {
  const tapom::TopoGraph topo = tapom::build_topo_graph(scene, cfg.contact_tol);
  const auto loops = tapom::detect_simple_loops(topo, cfg.max_loop_len);
  const auto channels = tapom::extract_channels(loops, scene, cfg.filter).channels;
  tapom::ChannelGraphParams params;
  params.alpha = cfg.alpha;
  params.beta = cfg.beta;
  params.epsilon = cfg.epsilon;
  params.n_samples = cfg.n_samples;
  params.n_pairs = cfg.n_pairs;
  params.pass_use_area_ratio = cfg.pass_use_area_ratio;
  const tapom::ValidityChecker checker(scene, cfg.clearance_margin, cfg.resolution);
  tapom::RngStream rng = tapom::RngStream(cfg.seed).derive("channel_graph");
  const tapom::ChannelGraph g = tapom::build_channel_graph(
      channels, checker, scene.start, scene.goal, params, rng);
  return tapom::channel_graph_dot(g);
}

int cmd_plan(const std::string& scene_path, const std::string& config_path,
             std::optional<std::uint64_t> seed, const std::string& out_path,
             const std::string& svg_path, const std::string& dot_path) {
  const tapom::Scene scene = tapom::load_scene_file(scene_path);
  const tapom::PlannerConfig cfg = load_config(config_path, seed);

  const tapom::PlanResult result = tapom::plan(scene, cfg);
  std::cout << "status: " << tapom::to_string(result.status) << "\n";
  if (!result.failure_reason.empty())
    std::cout << "reason: " << result.failure_reason << "\n";
  std::cout << "elapsed: " << tapom::format_double(result.diagnostics.elapsed)
            << (cfg.budget_mode == tapom::BudgetMode::WallClock ? " s" : " iters")
            << "\n";
  std::cout << "loops: " << result.diagnostics.loop_count
            << "  channels: " << result.diagnostics.channel_count
            << "  candidate_paths: " << result.diagnostics.candidate_path_count
            << "  sequences: " << result.diagnostics.attempted_sequences
            << (result.diagnostics.used_fallback ? "  (fallback)" : "") << "\n";
  if (!result.diagnostics.chosen_path.empty()) {
    std::cout << "path:";
    for (const auto& label : result.diagnostics.chosen_path)
      std::cout << " " << label;
    std::cout << "\n";
  }

  if (!dot_path.empty()) {
    try {
      write_file(dot_path, channel_graph_dot_for(scene, cfg));
    } catch (const tapom::DisconnectedEndpoints& e) {
      std::cerr << "dot export skipped: " << e.what() << "\n";
    }
  }
  if (!svg_path.empty())
    write_file(svg_path, tapom::render_svg(scene, result.trajectory));

  if (!result.success()) return kExitPlanningFailure;

  const std::string text = tapom::trajectory_to_text(
      *result.trajectory, scene_id_from_path(scene_path), "tapom", cfg.seed,
      result.diagnostics.elapsed);
  write_file(out_path, text);
  std::cout << "trajectory: " << out_path << " ("
            << result.trajectory->waypoints.size() << " waypoints)\n";
  return kExitOk;
}

int cmd_bench(const std::string& scene_dir, const std::string& planners_arg,
              int trials, const std::string& csv_path,
              const std::string& config_path,
              std::optional<std::uint64_t> seed) {
  std::vector<tapom::NamedScene> scenes;
  if (!fs::is_directory(scene_dir))
    throw tapom::Error("'" + scene_dir + "' is not a directory");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(scene_dir))
    if (entry.path().extension() == ".json" &&
        entry.path().filename() != "manifest.json")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths)
    scenes.push_back({scene_id_from_path(p), tapom::load_scene_file(p)});
  if (scenes.empty()) throw tapom::Error("no scene files in '" + scene_dir + "'");

  std::vector<tapom::PlannerId> planners;
  std::stringstream ss(planners_arg);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto id = tapom::planner_from_string(name);
    if (!id) throw tapom::Error("unknown planner '" + name + "'");
    planners.push_back(*id);
  }
  if (planners.empty()) throw tapom::Error("no planners given");
  if (trials < 1) throw tapom::Error("trials must be >= 1");

  const tapom::PlannerConfig cfg = load_config(config_path, seed);
  const tapom::BenchmarkResult result =
      tapom::run_benchmark(scenes, planners, trials, cfg);

  if (!csv_path.empty()) write_file(csv_path, tapom::trials_to_csv(result.trials));
  std::cout << tapom::metrics_to_text(result.metrics);
  return kExitOk;
}

int cmd_analyze(const std::string& scene_path, const std::string& dot_path,
                const std::string& config_path) {
  const tapom::Scene scene = tapom::load_scene_file(scene_path);
  const tapom::PlannerConfig cfg = load_config(config_path, std::nullopt);

  const tapom::TopoGraph topo = tapom::build_topo_graph(scene, cfg.contact_tol);
  const auto loops = tapom::detect_simple_loops(topo, cfg.max_loop_len);
  const auto extraction = tapom::extract_channels(loops, scene, cfg.filter);

  std::cout << "obstacles: " << scene.obstacles.size()
            << "  sub_obstacles: " << scene.subs.size()
            << "  contact_edges: " << topo.edges.size()
            << "  loops: " << loops.size()
            << "  channels: " << extraction.channels.size() << "\n";
  for (const tapom::Channel& c : extraction.channels) {
    const auto m = tapom::geom::polygon_measures(c.polygon);
    std::cout << c.id << ": area=" << tapom::format_double(m.area)
              << " incircle=" << tapom::format_double(c.incircle_radius)
              << " thickness=" << tapom::format_double(c.thickness)
              << " center=(" << tapom::format_double(c.center.x()) << ", "
              << tapom::format_double(c.center.y()) << ", "
              << tapom::format_double(c.center.z()) << ")\n";
  }
  for (const tapom::ChannelRejection& r : extraction.rejections)
    std::cout << "rejected loop " << r.loop_index << ": " << r.reason << "\n";

  if (!dot_path.empty()) write_file(dot_path, tapom::topo_graph_dot(topo, scene));
  return kExitOk;
}

int cmd_validate(const std::string& scene_path, const std::string& traj_path) {
  const tapom::Scene scene = tapom::load_scene_file(scene_path);
  const tapom::TrajectoryFile file =
      tapom::trajectory_from_text(read_file(traj_path));
  std::string why;
  if (tapom::validate_trajectory(scene, file, &why)) {
    std::cout << "valid (" << file.waypoints.size() << " waypoints)\n";
    return kExitOk;
  }
  std::cout << "invalid: " << why << "\n";
  return kExitPlanningFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology-aware manipulation planning toolkit"};
  app.require_subcommand(1);

  std::string scene_path, config_path, out_path = "traj.txt";
  std::string svg_path, dot_path, traj_path, scene_dir, csv_path;
  std::string planners_arg = "tapom";
  int trials = 10;
  std::optional<std::uint64_t> seed;

  auto* plan_cmd = app.add_subcommand("plan", "Plan a trajectory for a scene");
  plan_cmd->add_option("scene", scene_path, "Scene JSON file")->required();
  plan_cmd->add_option("--config", config_path, "Planner config JSON");
  plan_cmd->add_option("--seed", seed, "Random seed");
  plan_cmd->add_option("--out", out_path, "Trajectory output path");
  plan_cmd->add_option("--svg", svg_path, "Write a scene/trajectory SVG");
  plan_cmd->add_option("--dot", dot_path, "Write the channel graph as DOT");

  auto* bench_cmd = app.add_subcommand("bench", "Benchmark planners on a scene directory");
  bench_cmd->add_option("scene-dir", scene_dir, "Directory of scene JSON files")->required();
  bench_cmd->add_option("--planners", planners_arg, "Comma-separated planner list");
  bench_cmd->add_option("--trials", trials, "Trials per (scene, planner)");
  bench_cmd->add_option("--csv", csv_path, "Per-trial CSV output path");
  bench_cmd->add_option("--config", config_path, "Planner config JSON");
  bench_cmd->add_option("--seed", seed, "Base random seed");

  auto* analyze_cmd = app.add_subcommand("analyze", "Topology analysis only, no planning");
  analyze_cmd->add_option("scene", scene_path, "Scene JSON file")->required();
  analyze_cmd->add_option("--dot", dot_path, "Write the contact graph as DOT");
  analyze_cmd->add_option("--config", config_path, "Planner config JSON");

  auto* validate_cmd = app.add_subcommand("validate", "Re-validate a trajectory file");
  validate_cmd->add_option("scene", scene_path, "Scene JSON file")->required();
  validate_cmd->add_option("trajectory", traj_path, "Trajectory text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (plan_cmd->parsed())
      return cmd_plan(scene_path, config_path, seed, out_path, svg_path, dot_path);
    if (bench_cmd->parsed())
      return cmd_bench(scene_dir, planners_arg, trials, csv_path, config_path, seed);
    if (analyze_cmd->parsed())
      return cmd_analyze(scene_path, dot_path, config_path);
    if (validate_cmd->parsed()) return cmd_validate(scene_path, traj_path);
  } catch (const tapom::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}
