#include <doctest.h>

#include "helpers.hpp"
#include "tapom/topology.hpp"

using namespace tapom;
using geom::Vec3;

namespace {

std::string fixture(const std::string& name) {
  return std::string(TAPOM_FIXTURE_DIR) + "/" + name;
}

// Scene of free-floating spheres; contacts form whatever graph a test needs.
Scene sphere_scene(const std::vector<Vec3>& centers, double radius,
                   const std::vector<ContactAnnotation>& contacts = {}) {
  Scene s;
  s.workspace = Eigen::AlignedBox3d(Vec3(-10, -10, -10), Vec3(10, 10, 10));
  JointLimits limits;
  limits.lo = Eigen::VectorXd(6);
  limits.hi = Eigen::VectorXd(6);
  limits.lo << -9, -9, -9, -M_PI, -M_PI_2, -M_PI;
  limits.hi << 9, 9, 9, M_PI, M_PI_2, M_PI;
  s.robot = RobotModel::free_flyer(limits, geom::Primitive::sphere(0.01));
  s.start = Eigen::VectorXd::Zero(6);
  s.start[0] = -9;
  s.goal = Eigen::VectorXd::Zero(6);
  s.goal[0] = 9;
  for (size_t i = 0; i < centers.size(); ++i) {
    Obstacle obs;
    obs.id = "o" + std::to_string(i);
    obs.sub_indices = {static_cast<int>(i)};
    s.obstacles.push_back(obs);
    SubObstacle sub;
    sub.id = "s" + std::to_string(i);
    sub.shape = geom::Primitive::sphere(radius);
    sub.pose.position = centers[i];
    sub.parent = static_cast<int>(i);
    s.subs.push_back(sub);
  }
  s.contacts = contacts;
  return s;
}

// Turns an abstract test graph into a sphere scene with declared contacts,
// spheres spread far apart so detection never fires.
Scene graph_scene(const testutil::TestGraph& g) {
  std::vector<Vec3> centers;
  for (int i = 0; i < g.nodes; ++i)
    centers.push_back(Vec3(3.0 * i, 0.5 * (i % 3), 0));
  std::vector<ContactAnnotation> contacts;
  for (const auto& [a, b] : g.edges)
    contacts.push_back({"s" + std::to_string(a), "s" + std::to_string(b),
                        0.5 * (centers[static_cast<size_t>(a)] +
                               centers[static_cast<size_t>(b)])});
  return sphere_scene(centers, 0.1, contacts);
}

}  // namespace

TEST_CASE("touching spheres produce a contact edge at the midpoint") {
  const Scene s = sphere_scene({Vec3(0, 0, 0), Vec3(2, 0, 0)}, 1.0);
  const TopoGraph g = build_topo_graph(s, 1e-6);
  REQUIRE(g.edges.size() == 1);
  CHECK((g.edges[0].contact - Vec3(1, 0, 0)).norm() < 1e-9);

  const Scene apart = sphere_scene({Vec3(0, 0, 0), Vec3(3, 0, 0)}, 1.0);
  CHECK(build_topo_graph(apart, 1e-6).edges.empty());
}

TEST_CASE("declared contacts override detection") {
  const Scene s = sphere_scene({Vec3(0, 0, 0), Vec3(2, 0, 0)}, 1.0,
                               {{"s0", "s1", Vec3(1, 0.25, 0)}});
  const TopoGraph g = build_topo_graph(s, 1e-6);
  REQUIRE(g.edges.size() == 1);
  CHECK((g.edges[0].contact - Vec3(1, 0.25, 0)).norm() == 0.0);
}

TEST_CASE("extended undeclared overlap raises AmbiguousContact") {
  const Scene s = sphere_scene({Vec3(0, 0, 0), Vec3(1.0, 0, 0)}, 1.0);
  CHECK_THROWS_AS(build_topo_graph(s, 1e-4), AmbiguousContact);
}

TEST_CASE("the frame fixture yields 4 nodes, 4 edges, and one channel") {
  const Scene s = load_scene_file(fixture("frame.json"));
  const TopoGraph g = build_topo_graph(s, 1e-4);
  CHECK(g.node_count == 4);
  CHECK(g.edges.size() == 4);
  const auto loops = detect_simple_loops(g, 8);
  REQUIRE(loops.size() == 1);
  CHECK(loops[0].nodes.size() == 4);

  const auto extraction = extract_channels(loops, s, ChannelFilterParams{});
  REQUIRE(extraction.channels.size() == 1);
  const Channel& c = extraction.channels[0];
  CHECK(geom::polygon_measures(c.polygon).area ==
        doctest::Approx(0.16).epsilon(0.10));
  CHECK(c.incircle_radius == doctest::Approx(0.2).epsilon(0.10));
  CHECK((c.center - Vec3(0, 0, 0)).norm() < 1e-9);
}

TEST_CASE("loop detection on canonical graphs") {
  testutil::TestGraph k3{3, {{0, 1}, {0, 2}, {1, 2}}};
  CHECK(detect_simple_loops(build_topo_graph(graph_scene(k3), 1e-6), 8).size() ==
        1);

  testutil::TestGraph k4{4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};
  const auto loops =
      detect_simple_loops(build_topo_graph(graph_scene(k4), 1e-6), 8);
  CHECK(loops.size() == 7);  // four triangles, three 4-cycles

  testutil::TestGraph tree{5, {{0, 1}, {0, 2}, {1, 3}, {1, 4}}};
  CHECK(detect_simple_loops(build_topo_graph(graph_scene(tree), 1e-6), 8)
            .empty());
}

TEST_CASE("loop detection matches the edge-subset oracle on random graphs") {
  RngStream rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const testutil::TestGraph g = testutil::random_graph(rng);
    const auto loops =
        detect_simple_loops(build_topo_graph(graph_scene(g), 1e-6), 8);
    const auto expected = testutil::cycle_oracle(g, 8);
    REQUIRE(loops.size() == expected.size());
    std::set<std::vector<int>> got;
    for (const Loop& loop : loops) {
      CHECK(loop.nodes == testutil::canonical_cycle_of(loop.nodes));
      got.insert(loop.nodes);
    }
    CHECK(got == expected);
    CHECK(got.size() == loops.size());  // no duplicates under canonical form
  }
}

TEST_CASE("loops are sorted by length then lexicographically") {
  testutil::TestGraph g{5, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4},
                            {0, 3}}};
  const auto loops =
      detect_simple_loops(build_topo_graph(graph_scene(g), 1e-6), 8);
  for (size_t i = 1; i < loops.size(); ++i) {
    const bool ordered =
        loops[i - 1].nodes.size() < loops[i].nodes.size() ||
        (loops[i - 1].nodes.size() == loops[i].nodes.size() &&
         loops[i - 1].nodes < loops[i].nodes);
    CHECK(ordered);
  }
}

TEST_CASE("single-parent loops are rejected unless the override is set") {
  const Scene s = load_scene_file(fixture("wall_with_slit.json"));
  const TopoGraph g = build_topo_graph(s, 1e-4);
  const auto loops = detect_simple_loops(g, 8);

  ChannelFilterParams params;
  const auto strict = extract_channels(loops, s, params);
  bool saw_single_parent = false;
  for (const auto& r : strict.rejections)
    saw_single_parent |= r.reason == "single_parent";
  CHECK(saw_single_parent);
  CHECK(strict.channels.empty());

  params.allow_single_parent_loops = true;
  const auto relaxed = extract_channels(loops, s, params);
  REQUIRE(relaxed.channels.size() == 1);
  CHECK(geom::polygon_measures(relaxed.channels[0].polygon).area ==
        doctest::Approx(0.3 * 0.1).epsilon(0.05));
}

TEST_CASE("non-coplanar loops are rejected with the residual reason") {
  // Four spheres with declared contacts twisted far out of plane.
  std::vector<Vec3> centers{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0),
                            Vec3(0, 1, 0)};
  std::vector<ContactAnnotation> contacts{
      {"s0", "s1", Vec3(0.5, 0, 0.3)},
      {"s1", "s2", Vec3(1, 0.5, -0.3)},
      {"s2", "s3", Vec3(0.5, 1, 0.3)},
      {"s3", "s0", Vec3(0, 0.5, -0.3)},
  };
  const Scene s = sphere_scene(centers, 0.05, contacts);
  const auto loops = detect_simple_loops(build_topo_graph(s, 1e-6), 8);
  REQUIRE(loops.size() == 1);
  const auto extraction = extract_channels(loops, s, ChannelFilterParams{});
  CHECK(extraction.channels.empty());
  REQUIRE(extraction.rejections.size() == 1);
  CHECK(extraction.rejections[0].reason == "residual");
}

TEST_CASE("channel extraction is deterministic and channels pass re-checks") {
  const Scene s = load_scene_file(fixture("two_chamber.json"));
  const TopoGraph g = build_topo_graph(s, 1e-4);
  const auto loops = detect_simple_loops(g, 8);
  const auto a = extract_channels(loops, s, ChannelFilterParams{});
  const auto b = extract_channels(loops, s, ChannelFilterParams{});
  REQUIRE(a.channels.size() == b.channels.size());
  for (size_t i = 0; i < a.channels.size(); ++i) {
    CHECK(a.channels[i].id == b.channels[i].id);
    CHECK((a.channels[i].center - b.channels[i].center).norm() == 0.0);

    // Hull property: every projected contact point is inside the polygon.
    for (const Vec3& p : a.channels[i].source_loop.contact_points) {
      const geom::Vec2 proj = geom::project_to_plane(p, a.channels[i].plane);
      CHECK(geom::point_in_polygon(proj, a.channels[i].polygon, 1e-9));
    }
    // Interior re-check: the lifted centroid is collision free.
    for (const SubObstacle& sub : s.subs)
      CHECK(geom::point_distance(a.channels[i].center, sub.shape, sub.pose) >
            0.0);
  }
}
