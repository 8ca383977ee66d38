#include <benchmark/benchmark.h>

#include "tapom/harness.hpp"
#include "tapom/topology.hpp"

using namespace tapom;

namespace {

const Scene& frame_scene() {
  static const Scene scene =
      load_scene_file(std::string(TAPOM_FIXTURE_DIR) + "/frame.json");
  return scene;
}

PlannerConfig iteration_config(std::uint64_t seed) {
  PlannerConfig cfg = default_config();
  cfg.budget_mode = BudgetMode::Iterations;
  cfg.iteration_limit = 150000;
  cfg.B_min_iters = 8000;
  cfg.eta_fraction = 0.01;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

static void ConfigValidity(benchmark::State& state) {
  const Scene& scene = frame_scene();
  const ValidityChecker checker(scene, 0.0, 5e-4);
  RngStream rng(3);
  std::vector<Configuration> qs;
  for (int i = 0; i < 256; ++i) qs.push_back(sample_configuration(scene.robot, rng));
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(checker.config_valid(qs[i++ % qs.size()]));
  }
}
BENCHMARK(ConfigValidity);

static void SegmentValidity(benchmark::State& state) {
  const Scene& scene = frame_scene();
  const ValidityChecker checker(scene, 0.0, 5e-4);
  Configuration a = scene.start;
  Configuration b = scene.start;
  b[1] += 0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(checker.segment_valid(a, b));
  }
}
BENCHMARK(SegmentValidity);

static void TopologyAnalysis(benchmark::State& state) {
  const Scene& scene = frame_scene();
  for (auto _ : state) {
    const TopoGraph g = build_topo_graph(scene, 1e-4);
    const auto loops = detect_simple_loops(g, 8);
    auto channels = extract_channels(loops, scene, ChannelFilterParams{});
    benchmark::DoNotOptimize(channels);
  }
}
BENCHMARK(TopologyAnalysis);

static void PlanFrameFixture(benchmark::State& state) {
  const Scene& scene = frame_scene();
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const PlanResult r = plan(scene, iteration_config(seed++));
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(PlanFrameFixture)->Unit(benchmark::kMillisecond);
