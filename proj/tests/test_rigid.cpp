#include <cmath>
#include <vector>

#include "doctest.h"
#include "korn/random.hpp"
#include "korn/rigid.hpp"

using namespace korn;

namespace {

GridDomain make(DomainKind k, int res, int depth = 0) {
  DomainSpec s;
  s.kind = k;
  s.resolution = res;
  s.depth = depth;
  return build_domain(s);
}

// l^4 ball about the origin; the cell set is symmetric under sign flips
// and axis swaps
GridDomain centered_cube(int n, int m, double r = 1.0) {
  const double h = 2 * r / m;
  Point o = Point::Constant(-r);
  if (n == 2) o[2] = 0;
  return GridDomain::from_predicate(n, h, o, Lattice{m, m, n == 3 ? m : 1},
                                    [n, r](const Point& x) { return norm_N(x, n, 4) <= r; });
}

Skew random_skew(Rng& rng, int n) {
  Skew A(n);
  for (Eigen::Index k = 0; k < A.coeffs.size(); ++k) A.coeffs[k] = rng.normal();
  return A;
}

Field add_rigid(const Field& u, const Skew& A, const Point& b) {
  Field v = u;
  const Field r = rigid_field(*u.domain, A.coeffs, b);
  v.values += r.values;
  return v;
}

}  // namespace

TEST_CASE("basis fields") {
  const GridDomain d = centered_cube(2, 8);
  const Field f = iij_field(0, 1, d);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x = d.center(i);
    CHECK(f.values(static_cast<Eigen::Index>(i), 0) == x[1]);
    CHECK(f.values(static_cast<Eigen::Index>(i), 1) == -x[0]);
  }
  // I_01 (1, 0) = (0, -1)
  const Skew A(2, Eigen::VectorXd::Constant(1, 1.0));
  const Eigen::Vector2d img = A.matrix() * Eigen::Vector2d(1, 0);
  CHECK(img[0] == 0.0);
  CHECK(img[1] == -1.0);
  CHECK((A.matrix() + A.matrix().transpose()).norm() == 0.0);
  // odd under x -> -x on a centered grid
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Lattice& c = d.cell(i);
    const int j = d.cell_at({7 - c[0], 7 - c[1], 0});
    REQUIRE(j >= 0);
    CHECK(f.values(static_cast<Eigen::Index>(i), 0) == -f.values(j, 0));
    CHECK(f.values(static_cast<Eigen::Index>(i), 1) == -f.values(j, 1));
  }
  CHECK(x_seminorm(f, SeminormParams{}) <= 1e-14 * gagliardo(f, SeminormParams{}));
  CHECK_THROWS_AS(iij_field(1, 1, d), Error);
  CHECK_THROWS_AS(iij_field(0, 2, d), Error);
  CHECK_THROWS_AS(iij_field(1, 0, d), Error);
}

TEST_CASE("Gram matrix of the basis on symmetric regions") {
  for (int n : {2, 3})
    for (double s : {0.3, 0.7}) {
      CAPTURE(n);
      CAPTURE(s);
      const GridDomain d = centered_cube(n, n == 2 ? 20 : 8);
      const Field u = identity_field(d);
      const ProjectionResult r = project(u, {}, s);
      const Eigen::MatrixXd& G = r.gram;
      const Eigen::Index K = G.rows();
      for (Eigen::Index a = 0; a < K; ++a) {
        CHECK(G(a, a) == doctest::Approx(G(0, 0)).epsilon(1e-10));
        for (Eigen::Index b = 0; b < K; ++b)
          if (a != b) CHECK(std::abs(G(a, b)) <= 1e-10 * std::sqrt(G(a, a) * G(b, b)));
      }
      // <x, I_ij> = 0 by the sign flip, so the identity projects to 0
      CHECK(r.coefficients.coeffs.norm() <= 1e-10);
    }
}

TEST_CASE("projection reproduces skew fields on any region") {
  const GridDomain d = make(DomainKind::Cube3d, 8);
  std::vector<int> region;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.center(i)[0] + 2 * d.center(i)[1] < 1.1) region.push_back(static_cast<int>(i));
  Field u = iij_field(0, 1, d);
  u.values *= 3.0;
  const ProjectionResult r = project(u, region, 0.5);
  CHECK(r.coefficients.coeffs[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(r.coefficients.coeffs[1]) <= 1e-12);
  CHECK(std::abs(r.coefficients.coeffs[2]) <= 1e-12);
}

TEST_CASE("projection residual is orthogonal") {
  for (auto k : {DomainKind::LShape, DomainKind::SlitSquare, DomainKind::Cube3d}) {
    const GridDomain d = make(k, k == DomainKind::Cube3d ? 8 : 16);
    for (std::uint64_t seed : {1, 2, 3}) {
      const Field u = random_smooth_field(d, seed);
      const ProjectionResult r = project(u, {}, 0.4);
      CHECK(r.orthogonality <= 1e-10);
      // check it again from the s-form
      const Field res = subtract_skew(u, r.coefficients);
      for (const auto& [i, j] : skew_pairs(d.dim())) {
        const Field I = iij_field(i, j, d);
        const double ip = sform(res, I, {}, 0.4);
        CHECK(std::abs(ip) <= 1e-10 * std::sqrt(sform(u, u, {}, 0.4) * sform(I, I, {}, 0.4)));
      }
    }
  }
}

TEST_CASE("degenerate regions") {
  const GridDomain d = make(DomainKind::Cube3d, 8);
  std::vector<int> line;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d.cell(i)[1] == 3 && d.cell(i)[2] == 4) line.push_back(static_cast<int>(i));
  REQUIRE(line.size() == 8);
  // I_12 is constant along an x-line
  CHECK_THROWS_AS(project(identity_field(d), line, 0.5), Error);
  CHECK_THROWS_AS(project(identity_field(d), {line[0]}, 0.5), Error);
}

TEST_CASE("minimization over rigid motions") {
  Rng rng(31);
  const GridDomain d = make(DomainKind::LShape, 16);
  SeminormParams q;
  q.s = 0.5;
  q.tau = 0.6;
  q.beta = -0.2;

  SUBCASE("rigid fields are recovered") {
    for (double p : {1.5, 2.0, 3.0})
      for (RmKind kind : {RmKind::Full, RmKind::Truncated, RmKind::Weighted}) {
        q.p = p;
        const Skew A = random_skew(rng, 2);
        const Field r = rigid_field(d, A.coeffs, Point(0.3, -1, 0));
        const RmResult m = min_over_rm(r, q, kind);
        CHECK(m.value <= 1e-10 * gagliardo(r, SeminormParams{}));
        CHECK((m.A.coeffs - A.coeffs).norm() <= 1e-8 * A.coeffs.norm());
      }
  }
  SUBCASE("p = 2 full kind is the projection") {
    q.p = 2.0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const Field u = random_smooth_field(d, seed);
      const RmResult m = min_over_rm(u, q, RmKind::Full);
      const ProjectionResult pr = project(u, {}, q.s);
      const double direct = rm_objective(u, pr.coefficients, q, RmKind::Full);
      CHECK(m.value == doctest::Approx(direct).epsilon(1e-10));
      SeminormParams plain;
      plain.s = q.s;
      CHECK(direct == doctest::Approx(gagliardo(subtract_skew(u, pr.coefficients), plain)).epsilon(1e-12));
    }
  }
  SUBCASE("homogeneity and invariance under rigid shifts") {
    const Field u = make_field(d, "vortex");
    for (double p : {1.5, 3.0})
      for (RmKind kind : {RmKind::Full, RmKind::Truncated, RmKind::Weighted}) {
        q.p = p;
        const RmResult base = min_over_rm(u, q, kind);
        Field c = u;
        c.values *= 2.5;
        const RmResult scaled = min_over_rm(c, q, kind);
        CHECK(scaled.value == doctest::Approx(2.5 * base.value).epsilon(1e-8));
        CHECK((scaled.A.coeffs - 2.5 * base.A.coeffs).norm() <= 1e-6 * (1 + base.A.coeffs.norm()));
        const Skew B = random_skew(rng, 2);
        const Field shifted = add_rigid(u, B, Point(2, 1, 0));
        // the objective itself is exactly invariant
        Skew AB = base.A;
        AB.coeffs += B.coeffs;
        CHECK(rm_objective(shifted, AB, q, kind) == doctest::Approx(base.value).epsilon(1e-10));
        const RmResult m = min_over_rm(shifted, q, kind);
        CHECK(m.value == doctest::Approx(base.value).epsilon(1e-8));
        CHECK((m.A.coeffs - AB.coeffs).norm() <= 1e-6 * (1 + AB.coeffs.norm()));
      }
  }
  SUBCASE("coordinate search agrees with Newton") {
    const Field u = random_smooth_field(d, 7);
    RmOptions cs;
    cs.solver = RmSolver::CoordinateSearch;
    for (double p : {1.5, 2.0, 3.0})
      for (RmKind kind : {RmKind::Full, RmKind::Truncated}) {
        q.p = p;
        const RmResult a = min_over_rm(u, q, kind), b = min_over_rm(u, q, kind, cs);
        CHECK(a.converged);
        CHECK(a.value <= b.value * (1 + 1e-10));
        CHECK(b.value == doctest::Approx(a.value).epsilon(1e-6));
      }
  }
  SUBCASE("missing parameters") {
    SeminormParams bare;
    const Field u = identity_field(d);
    CHECK_THROWS_AS(min_over_rm(u, bare, RmKind::Truncated), Error);
    bare.tau = 0.5;
    CHECK_THROWS_AS(min_over_rm(u, bare, RmKind::Weighted), Error);
    CHECK(rm_kind_from_string("weighted") == RmKind::Weighted);
    CHECK_THROWS_AS(rm_kind_from_string("l2"), Error);
  }
}

TEST_CASE("quasi-optimality of the projection") {
  for (auto k : {DomainKind::UnitSquare, DomainKind::LShape}) {
    const GridDomain d = make(k, 16);
    const DomainRadii rr = domain_radii(d);
    for (double p : {1.5, 3.0}) {
      SeminormParams q;
      q.s = 0.5;
      q.p = p;
      const Field u = random_smooth_field(d, 3);
      const double proj = rm_objective(u, project(u, {}, q.s).coefficients, q, RmKind::Full);
      const double best = min_over_rm(u, q, RmKind::Full).value;
      CHECK(best <= proj * (1 + 1e-12));
      CHECK(proj / best <= 50.0);
      CHECK(proj / best <= 50.0 * std::pow(rr.outer / rr.inner, 2 + 2 - 2 * q.s));
    }
  }
}

TEST_CASE("domain radii") {
  const GridDomain d = make(DomainKind::UnitSquare, 16);
  const DomainRadii r = domain_radii(d);
  CHECK(r.inner == doctest::Approx(0.5 - 1.0 / 32));
  CHECK(r.outer == doctest::Approx(std::sqrt(2.0) / 2));
}

TEST_CASE("local projections and the global matrix") {
  const GridDomain d = make(DomainKind::UnitSquare, 32);
  const WhitneyDecomposition w = whitney_decompose(d);
  const RootedTree t = build_tree(w);
  const int N = choose_N(2);

  SUBCASE("rigid field: every local matrix is the same") {
    const Skew A(2, Eigen::VectorXd::Constant(1, -1.75));
    const Field r = rigid_field(d, A.coeffs, Point(1, 2, 0));
    const LocalProjections lp = local_projections(r, w, t, N, 0.5);
    REQUIRE(lp.cube.size() == w.size());
    for (const Skew& At : lp.cube) CHECK(At.coeffs[0] == doctest::Approx(-1.75).epsilon(1e-12));
    for (const auto& b : lp.bridge)
      if (b) CHECK(b->coeffs[0] == doctest::Approx(-1.75).epsilon(1e-12));
    CHECK(chain_difference_sum(w, t, lp.cube, 2.0, 0.5) <= 1e-20);
    const Skew G = global_matrix(w, lp.cube, 2.0, 0.5);
    CHECK(G.coeffs[0] == doctest::Approx(-1.75).epsilon(1e-12));
  }
  SUBCASE("zero-mean identity and weight sum") {
    const Field u = random_smooth_field(d, 4);
    const LocalProjections lp = local_projections(u, w, t, N, 0.5);
    for (double p : {1.5, 2.0, 3.0})
      for (double s : {0.25, 0.75}) {
        const Skew A = global_matrix(w, lp.cube, p, s);
        const Eigen::VectorXd res = zero_mean_residual(w, lp.cube, A, p, s);
        double scale = 0, wsum = 0;
        for (std::size_t c = 0; c < w.size(); ++c) {
          const double l = std::pow(w.cubes[c].side, 2 + p - p * s);
          wsum += l;
          scale += l * lp.cube[c].coeffs.cwiseAbs().maxCoeff();
        }
        CHECK(res.cwiseAbs().maxCoeff() <= 1e-12 * scale);
        CHECK(wsum <= w.covered_volume());
      }
    CHECK(chain_difference_sum(w, t, lp.cube, 2.0, 0.5) > 0.0);
  }
  SUBCASE("under-resolved cubes are rejected") {
    WhitneyOptions o;
    o.min_cells = 0.25;
    const WhitneyDecomposition fine = whitney_decompose(d, o);
    CHECK_THROWS_AS(local_projections(identity_field(d), fine, build_tree(fine), N, 0.5), Error);
  }
}
