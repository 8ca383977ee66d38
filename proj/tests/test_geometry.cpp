#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "tapom/geometry.hpp"

using namespace tapom;
using namespace tapom::geom;

TEST_CASE("sphere pair distances are collinear and exact") {
  const auto r = pairwise_distance(Primitive::sphere(1.0), Pose{},
                                   Primitive::sphere(1.0),
                                   Pose{Vec3(3, 0, 0), Quat::Identity()});
  CHECK(r.distance == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((r.point_a - Vec3(1, 0, 0)).norm() < 1e-12);
  CHECK((r.point_b - Vec3(2, 0, 0)).norm() < 1e-12);

  const auto tangent = pairwise_distance(Primitive::sphere(1.0), Pose{},
                                         Primitive::sphere(1.0),
                                         Pose{Vec3(2, 0, 0), Quat::Identity()});
  CHECK(std::abs(tangent.distance) < 1e-12);
}

TEST_CASE("box vs capsule distance matches the dense surface oracle") {
  const Primitive box = Primitive::box(Vec3(1, 1, 1));
  const Primitive cap = Primitive::capsule(0.5, 1.0);
  const Pose cap_pose{Vec3(3, 0, 0),
                      Quat::FromTwoVectors(Vec3::UnitZ(), Vec3::UnitY())};
  const auto r = pairwise_distance(box, Pose{}, cap, cap_pose);
  CHECK(r.distance == doctest::Approx(1.5).epsilon(1e-9));

  // >= 1e5 oracle samples (320x320 grid) on each surface.
  const double oracle = testutil::surface_distance_oracle(box, Pose{}, cap,
                                                          cap_pose, 320);
  CHECK(std::abs(r.distance - oracle) < 1e-3);
}

TEST_CASE("pairwise_distance is symmetric and witness points lie at range") {
  RngStream rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const Primitive a = testutil::random_primitive(rng);
    const Primitive b = testutil::random_primitive(rng);
    const Pose pa = testutil::random_pose(rng);
    const Pose pb = testutil::random_pose(rng);
    const auto fwd = pairwise_distance(a, pa, b, pb);
    const auto rev = pairwise_distance(b, pb, a, pa);
    CHECK(std::abs(fwd.distance - rev.distance) < 1e-12);
    CHECK((fwd.point_a - rev.point_b).norm() < 1e-9);
    CHECK((fwd.point_b - rev.point_a).norm() < 1e-9);
    if (fwd.distance > 1e-6) {
      CHECK((fwd.point_a - fwd.point_b).norm() ==
            doctest::Approx(fwd.distance).epsilon(1e-6));
    }
  }
}

TEST_CASE("pairwise_distance agrees with the sampling oracle on random pairs") {
  RngStream rng(7);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 100; ++trial) {
    const Primitive a = testutil::random_primitive(rng);
    const Primitive b = testutil::random_primitive(rng);
    const Pose pa = testutil::random_pose(rng);
    const Pose pb = testutil::random_pose(rng);
    const double oracle = testutil::surface_distance_oracle(a, pa, b, pb, 60);
    if (oracle < 1e-3) continue;  // the oracle only measures separation
    const auto r = pairwise_distance(a, pa, b, pb);
    CHECK(std::abs(r.distance - oracle) < 1e-3);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("overlapping shapes report non-positive distance") {
  RngStream rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Primitive a = testutil::random_primitive(rng);
    const Primitive b = testutil::random_primitive(rng);
    // Force deep overlap: b centered within a tiny offset of a's center.
    const Pose pa = testutil::random_pose(rng);
    Pose pb = testutil::random_pose(rng);
    pb.position = pa.position + Vec3(rng.uniform(-0.01, 0.01),
                                     rng.uniform(-0.01, 0.01),
                                     rng.uniform(-0.01, 0.01));
    const auto r = pairwise_distance(a, pa, b, pb);
    CHECK(r.distance <= 0.0);
  }
}

TEST_CASE("fit_plane recovers exact planes and the symmetric saddle residual") {
  const auto flat =
      fit_plane({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)});
  CHECK(flat.residual_rms <= 1e-12);
  CHECK((flat.plane.normal - Vec3(0, 0, 1)).norm() < 1e-12);

  // Symmetric +-eps saddle perturbation: best plane is z = 0 and the RMS
  // equals eps exactly (verified against the SVD of the centered covariance
  // by construction).
  const double eps = 1e-3;
  const auto saddle = fit_plane(
      {Vec3(0, 0, eps), Vec3(1, 0, -eps), Vec3(0, 1, -eps), Vec3(1, 1, eps)});
  CHECK(saddle.residual_rms == doctest::Approx(eps).epsilon(1e-9));

  CHECK_THROWS_AS(fit_plane({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}),
                  DegenerateInput);
}

TEST_CASE("fit_plane normal is canonical and permutation invariant") {
  RngStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> pts;
    const Pose frame = testutil::random_pose(rng);
    for (int i = 0; i < 8; ++i)
      pts.push_back(frame.apply(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                     rng.uniform(-0.01, 0.01))));
    const auto fit = fit_plane(pts);
    // First non-zero normal component is positive.
    for (int i = 0; i < 3; ++i) {
      if (std::abs(fit.plane.normal[i]) > 1e-12) {
        CHECK(fit.plane.normal[i] > 0);
        break;
      }
    }
    std::vector<Vec3> shuffled = pts;
    for (size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.uniform_int(i)]);
    const auto refit = fit_plane(shuffled);
    CHECK((fit.plane.normal - refit.plane.normal).norm() < 1e-9);
  }
}

TEST_CASE("convex hull drops interior and collinear points") {
  const auto square = convex_hull_2d(
      {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0.0}});
  CHECK(square.vertices.size() == 4);
  CHECK(polygon_measures(square).area == doctest::Approx(1.0));

  CHECK_THROWS_AS(convex_hull_2d({{0, 0}, {1, 1}, {2, 2}}), DegenerateInput);
}

TEST_CASE("convex hull contains every input and is convex") {
  RngStream rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 100; ++i) {
      const double r = std::sqrt(rng.uniform01());
      const double a = rng.uniform(0, 2 * M_PI);
      pts.push_back(Vec2(r * std::cos(a), r * std::sin(a)));
    }
    const auto hull = convex_hull_2d(pts);
    const size_t n = hull.vertices.size();
    for (size_t i = 0; i < n; ++i) {
      const Vec2& a = hull.vertices[i];
      const Vec2& b = hull.vertices[(i + 1) % n];
      const Vec2& c = hull.vertices[(i + 2) % n];
      const double cross =
          (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
      CHECK(cross >= 0.0);
    }
    for (const Vec2& p : pts) CHECK(point_in_polygon(p, hull, 1e-12));
  }
}

TEST_CASE("polygon measures: squares, triangles, hexagons") {
  const auto square = convex_hull_2d({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto ms = polygon_measures(square);
  CHECK(ms.area == doctest::Approx(1.0));
  CHECK((ms.centroid - Vec2(0.5, 0.5)).norm() < 1e-12);
  CHECK(ms.incircle_radius == doctest::Approx(0.5).epsilon(1e-9));

  const auto tri = convex_hull_2d({{0, 0}, {1, 0}, {0, 1}});
  const auto mt = polygon_measures(tri);
  CHECK(mt.area == doctest::Approx(0.5));
  CHECK((mt.centroid - Vec2(1.0 / 3, 1.0 / 3)).norm() < 1e-12);

  std::vector<Vec2> hex;
  for (int i = 0; i < 6; ++i)
    hex.push_back(Vec2(std::cos(i * M_PI / 3), std::sin(i * M_PI / 3)));
  const auto mh = polygon_measures(convex_hull_2d(hex));
  CHECK(mh.incircle_radius ==
        doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-9));
}

TEST_CASE("incircle disk fits and a slightly larger one does not") {
  RngStream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 12; ++i)
      pts.push_back(Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    Polygon2D hull;
    try {
      hull = convex_hull_2d(pts);
    } catch (const DegenerateInput&) {
      continue;
    }
    const auto m = polygon_measures(hull);
    const size_t n = hull.vertices.size();
    double min_edge_dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
      const Vec2& a = hull.vertices[i];
      const Vec2& b = hull.vertices[(i + 1) % n];
      Vec2 inward(-(b - a).y(), (b - a).x());
      inward.normalize();
      min_edge_dist =
          std::min(min_edge_dist, inward.dot(m.incircle_center) - inward.dot(a));
    }
    CHECK(min_edge_dist >= m.incircle_radius - 1e-9);
    CHECK(min_edge_dist < m.incircle_radius * (1 + 1e-6) + 1e-15);
  }
}

TEST_CASE("projection to plane round-trips and residual is normal-parallel") {
  Plane xy;
  xy.normal = Vec3::UnitZ();
  xy.offset = 0;
  xy.u = Vec3::UnitX();
  xy.v = Vec3::UnitY();
  CHECK((project_to_plane(Vec3(0, 0, 5), xy) - Vec2(0, 0)).norm() < 1e-12);

  RngStream rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec3> pts;
    const Pose frame = testutil::random_pose(rng);
    for (int i = 0; i < 5; ++i)
      pts.push_back(frame.apply(
          Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-0.2, 0.2))));
    Plane plane;
    try {
      plane = fit_plane(pts).plane;
    } catch (const DegenerateInput&) {
      continue;
    }
    // Idempotence for points already on the plane.
    const Vec3 on_plane = plane.lift(Vec2(rng.uniform(-1, 1), rng.uniform(-1, 1)));
    const Vec3 lifted = plane.lift(project_to_plane(on_plane, plane));
    CHECK((lifted - on_plane).norm() < 1e-12);

    // Reconstruction error is parallel to the normal.
    const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Vec3 recon = plane.lift(project_to_plane(p, plane));
    const Vec3 residual = recon - p;
    CHECK(residual.cross(plane.normal).norm() < 1e-9 * (1 + residual.norm()));
  }
}

TEST_CASE("polygon shrink stays inside and sampling stays inside") {
  const auto square = convex_hull_2d({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto shrunk = shrink_polygon(square, 0.2);
  REQUIRE(shrunk.has_value());
  CHECK(polygon_measures(*shrunk).area == doctest::Approx(0.36));
  CHECK_FALSE(shrink_polygon(square, 0.51).has_value());

  RngStream rng(17);
  for (int i = 0; i < 200; ++i)
    CHECK(point_in_polygon(sample_in_polygon(square, rng), square));
}
