#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "korn/discrete_ineq.hpp"
#include "korn/random.hpp"

using namespace korn;

namespace {

RootedTree chain(int n) {
  std::vector<int> parent(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i - 1;
  return RootedTree::from_parents(parent, std::vector<int>(static_cast<std::size_t>(n), 0));
}

RootedTree random_tree(Rng& rng, int n) {
  std::vector<int> parent(static_cast<std::size_t>(n), -1), level(static_cast<std::size_t>(n), 0);
  for (int i = 1; i < n; ++i) {
    parent[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform() * i);
    level[static_cast<std::size_t>(i)] = level[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])] + (rng.uniform() < 0.5);
  }
  return RootedTree::from_parents(parent, level);
}

TreeWeights unit_weights(std::size_t n) {
  TreeWeights w;
  w.nu = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  w.mu = w.nu;
  return w;
}

TreeWeights random_weights(Rng& rng, std::size_t n) {
  TreeWeights w;
  w.nu.resize(static_cast<Eigen::Index>(n));
  w.mu.resize(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.nu.size(); ++i) {
    w.nu[i] = std::exp(rng.uniform(-2, 2));
    w.mu[i] = std::exp(rng.uniform(-2, 2));
  }
  return w;
}

// C_tree straight from the definition, quadratic in |V|, long double
long double c_tree_oracle(const RootedTree& t, const Eigen::VectorXd& nu_d, const Eigen::VectorXd& mu_d, double p,
                          double theta, bool inclusive, const std::vector<long double>* lnu = nullptr,
                          const std::vector<long double>* lmu = nullptr) {
  const auto V = static_cast<int>(t.size());
  const long double pc = p / (p - 1);
  const auto nu = [&](int i) { return lnu ? (*lnu)[static_cast<std::size_t>(i)] : static_cast<long double>(nu_d[i]); };
  const auto mu = [&](int i) { return lmu ? (*lmu)[static_cast<std::size_t>(i)] : static_cast<long double>(mu_d[i]); };
  // root path sum of mu^(-p'/p) over t0 < u <= t (or < t)
  const auto path_sum = [&](int x, bool incl) {
    long double s = 0;
    for (int u = 0; u < V; ++u)
      if (u != t.root && t.precedes(u, x) && (incl || u != x)) s += std::pow(mu(u), -pc / p);
    return s;
  };
  long double best = 0;
  for (int x = 0; x < V; ++x) {
    const long double A = path_sum(x, true);
    long double B = 0;
    for (int u = 0; u < V; ++u)
      if (t.precedes(x, u)) {
        const long double S = path_sum(u, inclusive);
        if (S > 0) B += nu(u) * std::pow(S, (p / pc) * (1 - 1 / theta));
      }
    const long double val = (A > 0 ? std::pow(A, 1 / (theta * pc)) : 0.0L) * std::pow(B, 1.0L / p);
    best = std::max(best, val);
  }
  return best;
}

// dense matrix of the Hardy operator
Eigen::MatrixXd hardy_matrix(const RootedTree& t, bool inclusive) {
  const auto V = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(V, V);
  for (Eigen::Index x = 0; x < V; ++x)
    for (Eigen::Index u = 0; u < V; ++u)
      if (u != t.root && t.precedes(static_cast<int>(u), static_cast<int>(x)) && (inclusive || u != x)) T(x, u) = 1;
  return T;
}

double weighted_norm(const Eigen::VectorXd& w, const Eigen::VectorXd& x, double p) {
  double s = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += w[i] * std::pow(std::abs(x[i]), p);
  return std::pow(s, 1 / p);
}

}  // namespace

TEST_CASE("3-chain with unit weights") {
  const RootedTree t = chain(3);
  const TreeWeights w = unit_weights(3);
  CHECK(c_tree(t, w, 2.0, 2.0).value == doctest::Approx(std::pow(2.0, 0.25)).epsilon(1e-14));
  CHECK(c_tree(t, w, 2.0, 2.0).argmax == 2);
  const HardyEstimate h = hardy_best_constant(t, w, 2.0);
  CHECK(h.converged);
  CHECK(h.value == doctest::Approx(1.0).epsilon(1e-8));
  // maximizer: indicator of the middle node
  const Eigen::VectorXd m = h.maximizer / h.maximizer.cwiseAbs().maxCoeff();
  CHECK(std::abs(m[1]) == doctest::Approx(1.0));
  CHECK(std::abs(m[0]) <= 1e-6);
  CHECK(std::abs(m[2]) <= 1e-6);
  // bound at theta = 2: sqrt(2) 2^(1/4)
  const HardyBound b = hardy_bound(t, w, 2.0, {2.0});
  CHECK(b.bound == doctest::Approx(std::sqrt(2.0) * std::pow(2.0, 0.25)));
}

TEST_CASE("degenerate trees") {
  const RootedTree one = RootedTree::from_parents({-1}, {0});
  CHECK(c_tree(one, unit_weights(1), 2.0, 2.0).value == 0.0);
  const RootedTree two = chain(2);
  CHECK(c_tree(two, unit_weights(2), 2.0, 2.0).value == 0.0);
  for (double p : {1.5, 2.0, 3.0}) CHECK(hardy_best_constant(two, unit_weights(2), p).value == 0.0);
  CHECK_THROWS_AS(poincare_residual(one, unit_weights(1), 2.0, Eigen::VectorXd::Ones(1)), Error);
}

TEST_CASE("argument checks") {
  const RootedTree t = chain(3);
  TreeWeights w = unit_weights(3);
  CHECK_THROWS_AS(c_tree(t, w, 2.0, 1.0), Error);
  CHECK_THROWS_AS(c_tree(t, w, 1.0, 2.0), Error);
  CHECK_THROWS_AS(hardy_bound(t, w, 2.0, {}), Error);
  HardyOptions o;
  o.trials = 0;
  CHECK_THROWS_AS(hardy_best_constant(t, w, 2.0, o), Error);
  w.mu[1] = 0.0;
  CHECK_THROWS_AS(c_tree(t, w, 2.0, 2.0), Error);
  w.mu[1] = 1.0;
  w.nu.resize(2);
  CHECK_THROWS_AS(c_tree(t, w, 2.0, 2.0), Error);
  CHECK(conjugate_exponent(3.0) == doctest::Approx(1.5));
}

TEST_CASE("c_tree against the definition on random trees") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const RootedTree t = random_tree(rng, 3 + trial);
    const TreeWeights w = random_weights(rng, t.size());
    for (double p : {1.5, 2.0, 4.0})
      for (double theta : {1.1, 2.0, 5.0})
        for (bool inc : {false, true}) {
          const double got = c_tree(t, w, p, theta, inc).value;
          const auto want = static_cast<double>(c_tree_oracle(t, w.nu, w.mu, p, theta, inc));
          CHECK(got == doctest::Approx(want).epsilon(1e-12));
        }
  }
}

TEST_CASE("c_tree over weights spanning more than 300 decades") {
  // mu_t = 10^(300 - 55 depth) on a 12-chain; the oracle runs in long double
  const int n = 12;
  const RootedTree t = chain(n);
  TreeWeights w = unit_weights(n);
  std::vector<long double> lmu(n), lnu(n);
  for (int i = 0; i < n; ++i) {
    lmu[static_cast<std::size_t>(i)] = std::pow(10.0L, 300.0L - 55.0L * i);
    lnu[static_cast<std::size_t>(i)] = std::pow(10.0L, 250.0L - 50.0L * i);
    w.mu[i] = static_cast<double>(lmu[static_cast<std::size_t>(i)]);
    w.nu[i] = static_cast<double>(lnu[static_cast<std::size_t>(i)]);
  }
  for (bool inc : {false, true}) {
    const CTreeResult r = c_tree(t, w, 2.0, 2.0, inc);
    CHECK(r.log_space);
    const auto want = static_cast<double>(c_tree_oracle(t, w.nu, w.mu, 2.0, 2.0, inc, &lnu, &lmu));
    CHECK(std::isfinite(r.value));
    CHECK(r.value == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("Hardy operator and its adjoint") {
  Rng rng(5);
  const RootedTree t = random_tree(rng, 40);
  Eigen::VectorXd b(40), y(40);
  for (int i = 0; i < 40; ++i) {
    b[i] = rng.normal();
    y[i] = rng.normal();
  }
  for (bool inc : {false, true}) {
    const Eigen::MatrixXd T = hardy_matrix(t, inc);
    CHECK((hardy_apply(t, b, inc) - T * b).norm() <= 1e-12 * b.norm() * 40);
    CHECK((hardy_adjoint(t, y, inc) - T.transpose() * y).norm() <= 1e-12 * y.norm() * 40);
  }
}

TEST_CASE("p = 2 best constant equals the weighted operator norm") {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const RootedTree t = random_tree(rng, 5 + 3 * trial);
    const TreeWeights w = random_weights(rng, t.size());
    for (bool inc : {false, true}) {
      const Eigen::MatrixXd T = hardy_matrix(t, inc);
      const Eigen::MatrixXd M = w.nu.cwiseSqrt().asDiagonal() * T * w.mu.cwiseSqrt().cwiseInverse().asDiagonal();
      const double want = Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()[0];
      HardyOptions o;
      o.inclusive = inc;
      o.trials = 4;
      o.max_iter = 100000;
      const HardyEstimate h = hardy_best_constant(t, w, 2.0, o);
      CHECK(h.value <= want * (1 + 1e-12));
      CHECK(h.value == doctest::Approx(want).epsilon(1e-6));
    }
  }
}

TEST_CASE("estimate sits between random quotients and the C_tree bound") {
  Rng rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const RootedTree t = random_tree(rng, 10 + 4 * trial);
    const TreeWeights w = random_weights(rng, t.size());
    for (double p : {1.5, 2.0, 3.0})
      for (bool inc : {false, true}) {
        CAPTURE(p);
        HardyOptions o;
        o.inclusive = inc;
        o.trials = 6;
        const double est = hardy_best_constant(t, w, p, o).value;
        CHECK(est <= hardy_bound(t, w, p, default_theta_grid(), inc).bound * (1 + 1e-12));
        double sampled = 0;
        for (int k = 0; k < 200; ++k) {
          Eigen::VectorXd b(static_cast<Eigen::Index>(t.size()));
          for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.normal();
          sampled = std::max(sampled, weighted_norm(w.nu, hardy_apply(t, b, inc), p) / weighted_norm(w.mu, b, p));
        }
        CHECK(est >= sampled * (1 - 1e-9));
      }
  }
}

TEST_CASE("scale invariance") {
  Rng rng(13);
  const RootedTree t = random_tree(rng, 30);
  const TreeWeights w = random_weights(rng, t.size());
  TreeWeights s = w;
  s.nu *= 1e3;
  s.mu *= 1e3;
  Eigen::VectorXd b(30);
  for (int i = 0; i < 30; ++i) b[i] = rng.normal();
  for (double p : {1.5, 2.0, 3.0}) {
    CHECK(c_tree(t, s, p, 2.0).value == doctest::Approx(c_tree(t, w, p, 2.0).value).epsilon(1e-12));
    CHECK(hardy_best_constant(t, s, p).value == doctest::Approx(hardy_best_constant(t, w, p).value).epsilon(1e-9));
    const double r = poincare_residual(t, w, p, b).ratio;
    CHECK(poincare_residual(t, s, p, b).ratio == doctest::Approx(r).epsilon(1e-12));
    CHECK(poincare_residual(t, w, p, -7.5 * b).ratio == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("Poincare residual") {
  SUBCASE("constant sequences") {
    Rng rng(2);
    const RootedTree t = random_tree(rng, 20);
    const PoincareResult r = poincare_residual(t, random_weights(rng, 20), 3.0, Eigen::VectorXd::Constant(20, 4.25));
    CHECK(r.lhs == 0.0);
    CHECK(r.rhs == 0.0);
    CHECK(r.ratio == 0.0);
  }
  SUBCASE("depth on the 3-chain") {
    // b = (0, 1, 2), mean 1: lhs = sqrt(2), rhs = sqrt(2)
    const PoincareResult r = poincare_residual(chain(3), unit_weights(3), 2.0, Eigen::Vector3d(0, 1, 2));
    CHECK(r.lhs == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.rhs == doctest::Approx(std::sqrt(2.0)));
    CHECK(r.ratio == doctest::Approx(1.0));
    // against the inclusive Hardy constant of the chain
    HardyOptions o;
    o.inclusive = true;
    CHECK(r.ratio <= 2 * hardy_best_constant(chain(3), unit_weights(3), 2.0, o).value);
  }
  SUBCASE("ratio bounded by twice the inclusive Hardy bound") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
      const RootedTree t = random_tree(rng, 15 + trial);
      const TreeWeights w = random_weights(rng, t.size());
      for (double p : {1.5, 2.0, 3.0}) {
        const double bound = hardy_bound(t, w, p, default_theta_grid(), true).bound;
        for (int k = 0; k < 50; ++k) {
          Eigen::VectorXd b(static_cast<Eigen::Index>(t.size()));
          for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.normal();
          CHECK(poincare_residual(t, w, p, b).ratio <= 2 * bound + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("mean projection is within a factor 2 of any constant") {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 20;
    Eigen::VectorXd nu(n), b(n);
    for (int i = 0; i < n; ++i) {
      nu[i] = std::exp(rng.uniform(-3, 3));
      b[i] = rng.normal();
    }
    const double p = 1.1 + rng.uniform() * 5;
    const double mean = nu.dot(b) / nu.sum();
    const double a = rng.normal();
    CHECK(weighted_norm(nu, b.array() - mean, p) <= 2 * weighted_norm(nu, b.array() - a, p) * (1 + 1e-12));
  }
}

TEST_CASE("power weights") {
  WhitneyDecomposition d;
  d.dim = 2;
  WhitneyCube q;
  q.side = 0.25;
  d.cubes = {q, q};
  d.cubes[1].side = 0.125;
  const TreeWeights w = power_weights(d, 2.0, 0.5);
  CHECK(w.mu[0] == doctest::Approx(std::pow(0.25, 3.0)));
  CHECK(w.nu[1] == doctest::Approx(std::pow(0.125, 3.0)));
  const RootedTree t = RootedTree::from_parents({-1, 0}, {0, 1});
  const TreeWeights l = power_weights(t, 3, 1.5, -1.0);
  CHECK(l.mu[0] == 1.0);
  CHECK(l.mu[1] == doctest::Approx(std::pow(2.0, -1.5)));
}

TEST_CASE("unit square: C_tree at gamma = 1 - s settles under refinement") {
  // needs the nearly complete family; at the default floor each doubling adds a level
  std::vector<double> c;
  for (int res : {32, 64}) {
    DomainSpec s;
    s.kind = DomainKind::UnitSquare;
    s.resolution = res;
    WhitneyOptions o;
    o.min_cells = 1.0 / 32;
    const WhitneyDecomposition w = whitney_decompose(build_domain(s), o);
    c.push_back(c_tree(build_tree(w), power_weights(w, 2.0, 0.5), 2.0, 2.0).value);
  }
  CHECK(std::isfinite(c[0]));
  CHECK(c[1] == doctest::Approx(c[0]).epsilon(0.10));
}

TEST_CASE("C_tree is nonincreasing in gamma on the bundled trees") {
  for (auto k : {DomainKind::UnitSquare, DomainKind::LShape, DomainKind::SlitSquare, DomainKind::KochPrefractal}) {
    CAPTURE(to_string(k));
    DomainSpec s;
    s.kind = k;
    // dyadic grids; koch needs a triadic one
    s.resolution = k == DomainKind::KochPrefractal ? 81 : 64;
    s.depth = 3;
    WhitneyOptions o;
    o.min_cells = 1.0;
    const WhitneyDecomposition w = whitney_decompose(build_domain(s), o);
    const RootedTree t = build_tree(w);
    for (double p : {1.5, 2.0, 3.0}) {
      double prev = std::numeric_limits<double>::infinity();
      for (double g : {-0.4, -0.2, 0.0, 0.25, 0.5, 0.75, 1.0}) {
        const double c = c_tree(t, power_weights(w, p, g), p, 2.0).value;
        CHECK(std::isfinite(c));
        CHECK(c <= prev * (1 + 1e-12));
        prev = c;
      }
    }
  }
}
