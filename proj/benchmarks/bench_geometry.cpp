#include <benchmark/benchmark.h>

#include "tapom/geometry.hpp"
#include "tapom/rng.hpp"

using namespace tapom;
using geom::Pose;
using geom::Primitive;
using geom::Quat;
using geom::Vec2;
using geom::Vec3;

namespace {

Pose pose_at(double x, double y, double z) {
  Pose p;
  p.position = Vec3(x, y, z);
  return p;
}

}  // namespace

static void SphereSphereDistance(benchmark::State& state) {
  const Primitive a = Primitive::sphere(0.1);
  const Primitive b = Primitive::sphere(0.2);
  const Pose pa = pose_at(0, 0, 0);
  const Pose pb = pose_at(0.5, 0.2, -0.1);
  for (auto _ : state) {
    auto r = geom::pairwise_distance(a, pa, b, pb);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(SphereSphereDistance);

static void BoxBoxDistance(benchmark::State& state) {
  const Primitive a = Primitive::box(Vec3(0.1, 0.2, 0.15));
  const Primitive b = Primitive::box(Vec3(0.05, 0.1, 0.3));
  const Pose pa = pose_at(0, 0, 0);
  Pose pb = pose_at(0.5, 0.2, -0.1);
  pb.orientation = Quat(Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()));
  for (auto _ : state) {
    auto r = geom::pairwise_distance(a, pa, b, pb);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BoxBoxDistance);

static void CapsuleBoxDistance(benchmark::State& state) {
  const Primitive a = Primitive::capsule(0.05, 0.3);
  const Primitive b = Primitive::box(Vec3(0.1, 0.1, 0.1));
  Pose pa = pose_at(0, 0, 0);
  pa.orientation = Quat(Eigen::AngleAxisd(0.5, Vec3::UnitY()));
  const Pose pb = pose_at(0.4, 0.1, 0.2);
  for (auto _ : state) {
    auto r = geom::pairwise_distance(a, pa, b, pb);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(CapsuleBoxDistance);

static void ConvexHull2D(benchmark::State& state) {
  RngStream rng(1);
  std::vector<Vec2> pts;
  for (int i = 0; i < state.range(0); ++i)
    pts.push_back(Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)));
  for (auto _ : state) {
    auto hull = geom::convex_hull_2d(pts);
    benchmark::DoNotOptimize(hull);
  }
}
BENCHMARK(ConvexHull2D)->Arg(16)->Arg(128)->Arg(1024);

static void PlaneFit(benchmark::State& state) {
  RngStream rng(2);
  std::vector<Vec3> pts;
  for (int i = 0; i < 32; ++i)
    pts.push_back(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                       rng.uniform(-0.01, 0.01)));
  for (auto _ : state) {
    auto fit = geom::fit_plane(pts);
    benchmark::DoNotOptimize(fit);
  }
}
BENCHMARK(PlaneFit);

BENCHMARK_MAIN();
