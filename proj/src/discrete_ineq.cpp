#include "korn/discrete_ineq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "korn/random.hpp"

namespace korn {

double conjugate_exponent(double p) {
  if (!(p > 1.0)) throw Error("exponent p must exceed 1");
  return p / (p - 1.0);
}

TreeWeights power_weights(const WhitneyDecomposition& decomp, double p, double gamma) {
  const auto V = static_cast<Eigen::Index>(decomp.cubes.size());
  TreeWeights w;
  w.mu.resize(V);
  for (Eigen::Index v = 0; v < V; ++v)
    w.mu[v] = std::pow(decomp.cubes[static_cast<std::size_t>(v)].side, decomp.dim + p * gamma);
  w.nu = w.mu;
  return w;
}

TreeWeights power_weights(const RootedTree& tree, int dim, double p, double gamma) {
  const auto V = static_cast<Eigen::Index>(tree.size());
  TreeWeights w;
  w.mu.resize(V);
  for (Eigen::Index v = 0; v < V; ++v)
    w.mu[v] = std::exp2(-tree.level[static_cast<std::size_t>(v)] * (dim + p * gamma));
  w.nu = w.mu;
  return w;
}

namespace {

void check_weights(const RootedTree& tree, const TreeWeights& w) {
  const auto V = static_cast<Eigen::Index>(tree.size());
  if (w.nu.size() != V || w.mu.size() != V) throw Error("tree weights: size mismatch");
  for (Eigen::Index v = 0; v < V; ++v)
    if (!(w.nu[v] > 0.0) || !(w.mu[v] > 0.0) || !std::isfinite(w.nu[v]) || !std::isfinite(w.mu[v]))
      throw Error("tree weights must be positive and finite");
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_span(const Eigen::VectorXd& x) {
  return std::log(x.maxCoeff()) - std::log(x.minCoeff());
}

}  // namespace

CTreeResult c_tree(const RootedTree& tree, const TreeWeights& w, double p, double theta, bool inclusive) {
  if (!(theta > 1.0)) throw Error("c_tree: theta must exceed 1");
  check_weights(tree, w);
  const double pc = conjugate_exponent(p);
  const double e = (p / pc) * (1.0 - 1.0 / theta);
  const std::size_t V = tree.size();
  CTreeResult out;
  out.argmax = tree.root;
  out.log_space = std::max(log_span(w.mu), log_span(w.nu)) > 300.0 * std::log(10.0);

  if (!out.log_space) {
    std::vector<double> A(V, 0.0), B(V, 0.0);
    for (int t : tree.order) {
      const auto v = static_cast<std::size_t>(t);
      if (tree.parent[v] < 0) continue;
      A[v] = A[static_cast<std::size_t>(tree.parent[v])] + std::pow(w.mu[t], -pc / p);
    }
    for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
      const auto v = static_cast<std::size_t>(*it);
      const int par = tree.parent[v];
      const double S = inclusive ? A[v] : (par < 0 ? 0.0 : A[static_cast<std::size_t>(par)]);
      B[v] += w.nu[*it] * (S > 0.0 ? std::pow(S, e) : 0.0);
      if (par >= 0) B[static_cast<std::size_t>(par)] += B[v];
    }
    for (std::size_t v = 0; v < V; ++v) {
      const double val = (A[v] > 0.0 ? std::pow(A[v], 1.0 / (theta * pc)) : 0.0) * std::pow(B[v], 1.0 / p);
      if (val > out.value) {
        out.value = val;
        out.argmax = static_cast<int>(v);
      }
    }
    return out;
  }

  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<double> lA(V, ninf), lB(V, ninf);
  for (int t : tree.order) {
    const auto v = static_cast<std::size_t>(t);
    if (tree.parent[v] < 0) continue;
    lA[v] = log_add(lA[static_cast<std::size_t>(tree.parent[v])], -pc / p * std::log(w.mu[t]));
  }
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    const int par = tree.parent[v];
    const double lS = inclusive ? lA[v] : (par < 0 ? ninf : lA[static_cast<std::size_t>(par)]);
    if (lS > ninf) lB[v] = log_add(lB[v], std::log(w.nu[*it]) + e * lS);
    if (par >= 0) lB[static_cast<std::size_t>(par)] = log_add(lB[static_cast<std::size_t>(par)], lB[v]);
  }
  double best = ninf;
  for (std::size_t v = 0; v < V; ++v) {
    if (lA[v] == ninf || lB[v] == ninf) continue;
    const double val = lA[v] / (theta * pc) + lB[v] / p;
    if (val > best) {
      best = val;
      out.argmax = static_cast<int>(v);
    }
  }
  out.value = best == ninf ? 0.0 : std::exp(best);
  return out;
}

HardyBound hardy_bound(const RootedTree& tree, const TreeWeights& w, double p, const std::vector<double>& grid,
                       bool inclusive) {
  if (grid.empty()) throw Error("hardy_bound: empty theta grid");
  const double pc = conjugate_exponent(p);
  HardyBound best;
  best.bound = std::numeric_limits<double>::infinity();
  for (double theta : grid) {
    const CTreeResult c = c_tree(tree, w, p, theta, inclusive);
    const double bound = std::pow(theta / (theta - 1.0), 1.0 / pc) * c.value;
    if (bound < best.bound) best = {c.value, theta, bound, c.argmax};
  }
  return best;
}

Eigen::VectorXd hardy_apply(const RootedTree& tree, const Eigen::VectorXd& b, bool inclusive) {
  // A(t) = sum over t0 < u <= t; the strict form is A(parent(t)).
  const auto V = static_cast<Eigen::Index>(tree.size());
  Eigen::VectorXd A = Eigen::VectorXd::Zero(V), out(V);
  for (int t : tree.order) {
    const int par = tree.parent[static_cast<std::size_t>(t)];
    if (par >= 0) A[t] = A[par] + b[t];
  }
  if (inclusive) return A;
  for (Eigen::Index t = 0; t < V; ++t) {
    const int par = tree.parent[static_cast<std::size_t>(t)];
    out[t] = par < 0 ? 0.0 : A[par];
  }
  return out;
}

Eigen::VectorXd hardy_adjoint(const RootedTree& tree, const Eigen::VectorXd& y, bool inclusive) {
  // Inclusive: (T^T y)_u = sum_{t >= u} y_t for u != t0. Strict: the sum
  // runs over strict descendants.
  const auto V = static_cast<Eigen::Index>(tree.size());
  Eigen::VectorXd D = y;  // subtree sums
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const int par = tree.parent[static_cast<std::size_t>(*it)];
    if (par >= 0) D[par] += D[*it];
  }
  Eigen::VectorXd out(V);
  for (Eigen::Index u = 0; u < V; ++u) {
    if (u == tree.root) {
      out[u] = 0.0;
      continue;
    }
    out[u] = inclusive ? D[u] : D[u] - y[u];
  }
  return out;
}

namespace {

Eigen::VectorXd random_start(Rng& rng, Eigen::Index V) {
  Eigen::VectorXd b(V);
  for (Eigen::Index i = 0; i < V; ++i) b[i] = rng.uniform(-1.0, 1.0);
  return b;
}

HardyEstimate power_iteration(const RootedTree& tree, const TreeWeights& w, const HardyOptions& opt) {
  const auto V = static_cast<Eigen::Index>(tree.size());
  const Eigen::VectorXd isqmu = w.mu.cwiseSqrt().cwiseInverse();
  const auto apply = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd Tb = hardy_apply(tree, isqmu.cwiseProduct(x), opt.inclusive);
    return Eigen::VectorXd(isqmu.cwiseProduct(hardy_adjoint(tree, w.nu.cwiseProduct(Tb), opt.inclusive)));
  };
  HardyEstimate best;
  best.converged = true;
  for (int trial = 0; trial < std::max(1, opt.trials); ++trial) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(trial)));
    Eigen::VectorXd x = random_start(rng, V).cwiseAbs();  // positive start overlaps the Perron vector
    x /= x.norm();
    double lambda = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
      Eigen::VectorXd y = apply(x);
      const double next = x.dot(y);
      const double ny = y.norm();
      if (ny == 0.0) {
        lambda = 0.0;
        converged = true;
        break;
      }
      x = y / ny;
      if (std::abs(next - lambda) <= 1e-8 * std::abs(next)) {
        lambda = next;
        converged = true;
        break;
      }
      lambda = next;
    }
    // Rayleigh quotient of the final iterate is a certified lower bound.
    const double rq = x.dot(apply(x));
    const double value = std::sqrt(std::max(0.0, rq));
    if (trial == 0 || value > best.value) {
      best.value = value;
      best.iterations = it;
      best.maximizer = isqmu.cwiseProduct(x);
    }
    best.converged = best.converged && converged;
  }
  return best;
}

double signed_pow(double x, double e) { return std::copysign(std::pow(std::abs(x), e), x); }

struct Quotient {
  double lhs = 0.0;  // sum nu |Tb|^p
  double rhs = 0.0;  // sum mu |b|^p
  double log_ratio() const {
    return lhs > 0.0 ? std::log(lhs) - std::log(rhs) : -std::numeric_limits<double>::infinity();
  }
};

Quotient evaluate(const RootedTree& tree, const TreeWeights& w, double p, const Eigen::VectorXd& b, bool inclusive,
                  Eigen::VectorXd* Tb = nullptr) {
  Eigen::VectorXd t = hardy_apply(tree, b, inclusive);
  Quotient q;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    q.lhs += w.nu[i] * std::pow(std::abs(t[i]), p);
    q.rhs += w.mu[i] * std::pow(std::abs(b[i]), p);
  }
  if (Tb) *Tb = std::move(t);
  return q;
}

}  // namespace

HardyEstimate hardy_best_constant(const RootedTree& tree, const TreeWeights& w, double p, const HardyOptions& opt) {
  if (opt.trials < 1) throw Error("hardy_best_constant: trials must be >= 1");
  check_weights(tree, w);
  conjugate_exponent(p);
  const auto V = static_cast<Eigen::Index>(tree.size());
  if (p == 2.0) return power_iteration(tree, w, opt);

  HardyEstimate best;
  best.value = 0.0;
  best.converged = true;
  // The p = 2 maximizer is a good first start; the rest are random.
  HardyOptions seed_opt = opt;
  seed_opt.trials = 1;
  const Eigen::VectorXd warm = power_iteration(tree, w, seed_opt).maximizer;
  for (int trial = 0; trial < opt.trials; ++trial) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(trial) + 1000));
    Eigen::VectorXd b = trial == 0 ? warm : random_start(rng, V);
    Eigen::VectorXd Tb;
    Quotient q = evaluate(tree, w, p, b, opt.inclusive, &Tb);
    if (q.rhs == 0.0) continue;
    b /= std::pow(q.rhs, 1.0 / p);
    q = evaluate(tree, w, p, b, opt.inclusive, &Tb);
    if (q.lhs == 0.0) {
      // Flat start: the quotient vanishes identically only for degenerate trees.
      if (trial == 0) best.maximizer = b;
      continue;
    }
    double f = q.log_ratio();
    double step = 0.1;
    bool converged = false;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
      Eigen::VectorXd gy(V), gb(V);
      for (Eigen::Index i = 0; i < V; ++i) {
        gy[i] = w.nu[i] * signed_pow(Tb[i], p - 1.0);
        gb[i] = w.mu[i] * signed_pow(b[i], p - 1.0);
      }
      const Eigen::VectorXd g = p * (hardy_adjoint(tree, gy, opt.inclusive) / q.lhs - gb / q.rhs);
      const double gn = g.norm();
      if (gn == 0.0) {
        converged = true;
        break;
      }
      const double bn = b.norm();
      bool accepted = false;
      while (step > 1e-14) {
        Eigen::VectorXd cand = b + (step * bn / gn) * g;
        Eigen::VectorXd cTb;
        Quotient cq = evaluate(tree, w, p, cand, opt.inclusive, &cTb);
        const double cf = cq.log_ratio();
        if (cf > f) {
          cand /= std::pow(cq.rhs, 1.0 / p);  // project back to the unit sphere
          const double gain = cf - f;
          b = std::move(cand);
          q = evaluate(tree, w, p, b, opt.inclusive, &Tb);
          f = q.log_ratio();
          step = std::min(1.0, 2.0 * step);
          accepted = true;
          // Relative improvement of the constant itself is gain / p.
          if (gain / p < 1e-6) converged = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) converged = true;
      if (converged) break;
    }
    const double value = std::exp(f / p);
    if (value > best.value) {
      best.value = value;
      best.maximizer = b;
      best.iterations = it;
    }
    best.converged = best.converged && converged;
  }
  return best;
}

PoincareResult poincare_residual(const RootedTree& tree, const TreeWeights& w, double p, const Eigen::VectorXd& b) {
  if (tree.size() < 2) throw Error("poincare_residual: tree needs at least 2 nodes");
  check_weights(tree, w);
  const auto V = static_cast<Eigen::Index>(tree.size());
  if (b.size() != V) throw Error("poincare_residual: sequence size mismatch");
  // Shift by the root value first so constant sequences give exact zeros.
  const Eigen::VectorXd d = b.array() - b[tree.root];
  const double mean = w.nu.dot(d) / w.nu.sum();
  double lhs = 0.0, rhs = 0.0;
  for (Eigen::Index t = 0; t < V; ++t) {
    lhs += w.nu[t] * std::pow(std::abs(d[t] - mean), p);
    const int par = tree.parent[static_cast<std::size_t>(t)];
    if (par >= 0) rhs += w.mu[t] * std::pow(std::abs(b[t] - b[par]), p);
  }
  PoincareResult r;
  r.lhs = std::pow(lhs, 1.0 / p);
  r.rhs = std::pow(rhs, 1.0 / p);
  if (r.rhs > 0.0)
    r.ratio = r.lhs / r.rhs;
  else
    r.ratio = r.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return r;
}

}  // namespace korn
