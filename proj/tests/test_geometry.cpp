#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "korn/geometry.hpp"
#include "korn/korn_lab.hpp"
#include "korn/random.hpp"

using namespace korn;

namespace {

DomainSpec spec_of(DomainKind k, int res, int depth = 0) {
  DomainSpec s;
  s.kind = k;
  s.resolution = res;
  s.depth = depth;
  return s;
}

// Brute force over every boundary face.
double brute_distance(const GridDomain& d, const Point& x) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : d.boundary_faces()) {
    const auto [lo, hi] = d.face_box(f);
    best = std::min(best, point_box_distance(x, lo, hi));
  }
  return best;
}

}  // namespace

TEST_CASE("unit square: cell count and exact distances") {
  const GridDomain d = build_domain(spec_of(DomainKind::UnitSquare, 16));
  CHECK(d.size() == 256);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x = d.center(i);
    const double oracle = std::min({x[0], 1.0 - x[0], x[1], 1.0 - x[1]});
    CHECK(d.delta(i) <= 0.5);
    CHECK(d.delta(i) == doctest::Approx(oracle).epsilon(1e-14));
  }
}

TEST_CASE("L-shape distances match the polygon oracle") {
  const GridDomain d = build_domain(spec_of(DomainKind::LShape, 16));
  CHECK(d.size() == 256 - 64);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x = d.center(i);
    // distance to the six edges of the L
    const auto seg = [&](double ax, double ay, double bx, double by) {
      const Eigen::Vector2d p(x[0], x[1]), a(ax, ay), b(bx, by);
      const double t = std::clamp((p - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
      return (p - (a + t * (b - a))).norm();
    };
    const double oracle = std::min({seg(0, 0, 0.5, 0), seg(0.5, 0, 0.5, 0.5), seg(0.5, 0.5, 1, 0.5),
                                    seg(1, 0.5, 1, 1), seg(1, 1, 0, 1), seg(0, 1, 0, 0)});
    CHECK(d.delta(i) == doctest::Approx(oracle).epsilon(1e-13));
  }
}

TEST_CASE("slit square: cells along the slit are within h of it") {
  const GridDomain d = build_domain(spec_of(DomainKind::SlitSquare, 32));
  const double h = d.h();
  CHECK(d.size() == 64 * 64);
  CHECK(d.component_count() == 1);
  int near = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x = d.center(i);
    if (x[0] > 0.0 && x[0] < 1.0 && std::abs(x[1]) < h) {
      ++near;
      CHECK(d.delta(i) <= h);
      CHECK(d.delta(i) == doctest::Approx(std::min(std::abs(x[1]), 1.0 - x[0])).epsilon(1e-13));
    }
  }
  CHECK(near == 2 * 32);
  // the slit blocks adjacency across y = 0 for 0 < x < 1
  const int above = d.cell_at({48, 32, 0}), below = d.cell_at({48, 31, 0});
  REQUIRE(above >= 0);
  REQUIRE(below >= 0);
  const auto nb = d.face_neighbors(static_cast<std::size_t>(above));
  CHECK(std::find(nb.begin(), nb.end(), below) == nb.end());
  const int left_above = d.cell_at({10, 32, 0}), left_below = d.cell_at({10, 31, 0});
  const auto nb2 = d.face_neighbors(static_cast<std::size_t>(left_above));
  CHECK(std::find(nb2.begin(), nb2.end(), left_below) != nb2.end());
}

TEST_CASE("koch depth 0 is an equilateral triangle") {
  const auto poly = koch_polygon(0);
  REQUIRE(poly.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK((poly[k] - poly[(k + 1) % 3]).norm() == doctest::Approx(1.0));
  const GridDomain d = build_domain(spec_of(DomainKind::KochPrefractal, 64, 0));
  const double area = std::sqrt(3.0) / 4.0;
  CHECK(d.volume() == doctest::Approx(area).epsilon(0.05));
  // every occupied center satisfies the three half-plane tests
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Eigen::Vector2d x(d.center(i)[0], d.center(i)[1]);
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d a = poly[k], b = poly[(k + 1) % 3];
      const double cross = (b - a).x() * (x - a).y() - (b - a).y() * (x - a).x();
      CHECK(cross > 0.0);  // counter-clockwise: interior on the left
    }
  }
  CHECK(koch_polygon(3).size() == 3 * 64);
}

TEST_CASE("build_domain errors") {
  CHECK_THROWS_AS(build_domain(spec_of(DomainKind::UnitSquare, 4)), Error);
  CHECK_THROWS_AS(build_domain(spec_of(DomainKind::KochPrefractal, 32, 7)), Error);
  CHECK_THROWS_AS(domain_kind_from_string("torus"), Error);
}

TEST_CASE("domain invariants on every bundled domain") {
  for (auto s : {spec_of(DomainKind::UnitSquare, 16), spec_of(DomainKind::LShape, 16),
                 spec_of(DomainKind::SlitSquare, 16), spec_of(DomainKind::KochPrefractal, 27, 2),
                 spec_of(DomainKind::Cube3d, 8)}) {
    CAPTURE(to_string(s.kind));
    const GridDomain d = build_domain(s);
    const double h = d.h();
    const int n = d.dim();
    CHECK(d.component_count() == 1);
    for (std::size_t i = 0; i < d.size(); ++i) {
      REQUIRE(d.delta(i) > 0.0);
      for (int j : d.face_neighbors(i))
        CHECK(std::abs(d.delta(i) - d.delta(static_cast<std::size_t>(j))) <=
              (d.center(i) - d.center(static_cast<std::size_t>(j))).norm() + 2 * h);
    }
    // distance consistency: the ball of radius delta - h sqrt(n) is occupied
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
      const auto i = static_cast<std::size_t>(rng.bits() % d.size());
      const double rad = d.delta(i) - h * std::sqrt(static_cast<double>(n));
      if (rad <= 0) continue;
      const Lattice c = d.cell(i);
      const int R = static_cast<int>(std::ceil(rad / h));
      for (int dz = (n == 3 ? -R : 0); dz <= (n == 3 ? R : 0); ++dz)
        for (int dy = -R; dy <= R; ++dy)
          for (int dx = -R; dx <= R; ++dx) {
            if (h * std::sqrt(double(dx * dx + dy * dy + dz * dz)) > rad) continue;
            CHECK(d.occupied({c[0] + dx, c[1] + dy, c[2] + dz}));
          }
    }
    // delta is exact against brute force
    for (int trial = 0; trial < 30; ++trial) {
      const auto i = static_cast<std::size_t>(rng.bits() % d.size());
      CHECK(d.delta(i) == doctest::Approx(brute_distance(d, d.center(i))).epsilon(1e-13));
    }
  }
}

TEST_CASE("build_domain is deterministic") {
  const auto s = spec_of(DomainKind::KochPrefractal, 32, 3);
  const GridDomain a = build_domain(s), b = build_domain(s);
  CHECK(a.occupancy_mask() == b.occupancy_mask());
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.delta(i) == b.delta(i));
}

TEST_CASE("FaceIndex agrees with brute force for points and boxes") {
  const GridDomain d = build_domain(spec_of(DomainKind::SlitSquare, 16));
  Rng rng(11);
  for (int bucket : {1, 3, 8}) {
    const FaceIndex idx(d, bucket);
    for (int t = 0; t < 100; ++t) {
      const Point x(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2), 0.0);
      CHECK(idx.distance(x) == doctest::Approx(brute_distance(d, x)).epsilon(1e-13));
      const Point hi = x + Point(rng.uniform(0, 0.3), rng.uniform(0, 0.3), 0.0);
      double best = std::numeric_limits<double>::infinity();
      for (const auto& f : d.boundary_faces()) {
        const auto [a, b] = d.face_box(f);
        best = std::min(best, box_box_distance(x, hi, a, b));
      }
      CHECK(idx.distance(x, hi) == doctest::Approx(best).epsilon(1e-13));
    }
  }
}

TEST_CASE("box distances") {
  CHECK(point_box_distance(Point(2, 0, 0), Point(0, 0, 0), Point(1, 1, 0)) == doctest::Approx(1.0));
  CHECK(point_box_distance(Point(2, 2, 0), Point(0, 0, 0), Point(1, 1, 0)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(point_box_distance(Point(0.5, 0.5, 0), Point(0, 0, 0), Point(1, 1, 0)) == 0.0);
  CHECK(box_box_distance(Point(0, 0, 0), Point(1, 1, 1), Point(2, 3, 1), Point(4, 4, 1)) ==
        doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("boundary cloud") {
  SUBCASE("unit square covers all four sides") {
    const GridDomain d = build_domain(spec_of(DomainKind::UnitSquare, 32));
    const PointCloud c = boundary_cloud(d, 0.25);
    CHECK(c.points.size() >= 16);
    int sides[4] = {0, 0, 0, 0};
    for (const auto& p : c.points) {
      sides[0] += std::abs(p[0]) < 1e-12;
      sides[1] += std::abs(p[0] - 1) < 1e-12;
      sides[2] += std::abs(p[1]) < 1e-12;
      sides[3] += std::abs(p[1] - 1) < 1e-12;
    }
    for (int s : sides) CHECK(s >= 2);
    // max gap along the boundary <= 2 spacing: every face midpoint has a
    // kept point within that distance
    for (const auto& f : d.boundary_faces()) {
      const auto [lo, hi] = d.face_box(f);
      const Point m = 0.5 * (lo + hi);
      double best = 1e9;
      for (const auto& p : c.points) best = std::min(best, (p - m).norm());
      CHECK(best <= 2 * 0.25);
    }
  }
  SUBCASE("slit faces from both sides are boundary") {
    const GridDomain d = build_domain(spec_of(DomainKind::SlitSquare, 16));
    int up = 0, down = 0;
    for (const auto& f : d.boundary_faces()) {
      const auto [lo, hi] = d.face_box(f);
      if (f.axis == 1 && std::abs(lo[1]) < 1e-12 && lo[0] >= 0.0 && hi[0] <= 1.0) (f.side > 0 ? down : up)++;
    }
    CHECK(up == 16);
    CHECK(down == 16);
    const PointCloud c = boundary_cloud(d, d.h());
    int on_slit = 0;
    for (const auto& p : c.points) on_slit += std::abs(p[1]) < 1e-12 && p[0] > 0 && p[0] < 1;
    CHECK(on_slit >= 8);
  }
  SUBCASE("koch point count grows about 4/3 per depth at fixed spacing") {
    std::vector<double> counts;
    for (int depth : {1, 2, 3}) {
      const GridDomain d = build_domain(spec_of(DomainKind::KochPrefractal, 243, depth));
      counts.push_back(static_cast<double>(boundary_cloud(d, 2.0 / 243).points.size()));
    }
    for (int k = 0; k < 2; ++k) CHECK(counts[k + 1] / counts[k] == doctest::Approx(4.0 / 3.0).epsilon(0.15));
  }
  SUBCASE("errors") {
    const GridDomain d = build_domain(spec_of(DomainKind::UnitSquare, 16));
    CHECK_THROWS_AS(boundary_cloud(d, 0.5 * d.h()), Error);
  }
}

TEST_CASE("greedy cover count brackets the optimum") {
  std::vector<Point> line;
  for (int i = 0; i < 10; ++i) line.push_back(Point(i, 0, 0));
  const auto c = greedy_cover_count(line, 1.0);
  // a radius-1 ball holds at most 3 unit-spaced points
  CHECK(c >= 4);
  CHECK(c <= 10);
  CHECK(greedy_cover_count(line, 100.0) == 1);
  CHECK(greedy_cover_count(line, 0.5) == 10);
}

TEST_CASE("assouad estimator") {
  SUBCASE("segment is one-dimensional") {
    PointCloud c;
    for (int i = 0; i <= 4000; ++i) c.points.push_back(Point(i / 4000.0, 0, 0));
    const std::vector<RadiusPair> pairs{{0.01, 0.1}, {0.005, 0.1}, {0.0025, 0.1}, {0.01, 0.2}, {0.005, 0.4}};
    CHECK(assouad_estimate(c, pairs).exponent == doctest::Approx(1.0).epsilon(0.1));
  }
  SUBCASE("{1/k} behaves like a line near 0") {
    PointCloud c;
    c.points.push_back(Point::Zero());
    for (int k = 1; k <= 200; ++k) c.points.push_back(Point(1.0 / k, 0, 0));
    // scales where the spacing 1/k^2 near the tip 1/200 is below r
    const std::vector<RadiusPair> pairs{{2.5e-4, 1e-3}, {1.25e-4, 1e-3}, {6.25e-5, 1e-3}, {5e-4, 2e-3}, {1.25e-4, 2e-3}};
    CHECK(assouad_estimate(c, pairs).exponent >= 0.85);
  }
  SUBCASE("square boundary") {
    const GridDomain d = build_domain(spec_of(DomainKind::UnitSquare, 64));
    CHECK(boundary_assouad(d).exponent == doctest::Approx(1.0).epsilon(0.15));
  }
  SUBCASE("monotone under subsetting") {
    PointCloud a, b;
    for (int i = 0; i <= 2000; ++i) a.points.push_back(Point(i / 2000.0, 0, 0));
    b = a;
    for (int i = 0; i <= 40; ++i)
      for (int j = 0; j <= 40; ++j) b.points.push_back(Point(0.4 + i / 400.0, 0.3 + j / 400.0, 0));
    const std::vector<RadiusPair> pairs{{0.02, 0.1}, {0.01, 0.1}, {0.005, 0.1}, {0.02, 0.2}};
    CHECK(assouad_estimate(a, pairs).exponent <= assouad_estimate(b, pairs).exponent + 0.05);
  }
  SUBCASE("preconditions") {
    PointCloud c;
    c.points.push_back(Point::Zero());
    c.points.push_back(Point(1, 0, 0));
    const std::vector<RadiusPair> two{{0.1, 1}, {0.05, 1}};
    CHECK_THROWS_AS(assouad_estimate(c, two), Error);
    const std::vector<RadiusPair> narrow{{0.1, 1}, {0.05, 1}, {0.5, 1}};
    CHECK_THROWS_AS(assouad_estimate(c, narrow), Error);
    const std::vector<RadiusPair> same{{0.1, 1}, {0.2, 2}, {0.3, 3}};
    CHECK_THROWS_AS(assouad_estimate(c, same), Error);
  }
}

TEST_CASE("least squares line") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto [a, b] = least_squares_line(x, y);
  CHECK(a == doctest::Approx(1.0));
  CHECK(b == doctest::Approx(2.0));
}
