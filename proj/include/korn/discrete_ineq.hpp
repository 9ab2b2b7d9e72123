#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "korn/tree.hpp"

namespace korn {

struct TreeWeights {
  Eigen::VectorXd nu;
  Eigen::VectorXd mu;
};

/// nu_t = mu_t = l_t^(n + p gamma).
TreeWeights power_weights(const WhitneyDecomposition& decomp, double p, double gamma);
/// Same with sides 2^-level (unit coarsest side), for trees read from disk.
TreeWeights power_weights(const RootedTree& tree, int dim, double p, double gamma);

struct CTreeResult {
  double value = 0.0;
  int argmax = 0;
  bool log_space = false;
};

/// Sufficient-condition constant
///   sup_t A(t)^(1/(theta p')) * (sum_{u >= t} nu_u S(u)^((p/p')(1-1/theta)))^(1/p)
/// with A(t) the root-path sum of mu^(-p'/p) over t0 < u <= t and S(u) the
/// same sum over t0 < v < u (t0 < v <= u when `inclusive`).
CTreeResult c_tree(const RootedTree& tree, const TreeWeights& w, double p, double theta, bool inclusive = false);

inline const std::vector<double>& default_theta_grid() {
  static const std::vector<double> grid{1.05, 1.1, 1.25, 1.5, 2.0, 3.0, 5.0};
  return grid;
}

struct HardyBound {
  double c_tree = 0.0;
  double theta = 0.0;
  double bound = 0.0;  // (theta/(theta-1))^(1/p') C_tree, minimized over the grid
  int argmax = 0;
};

HardyBound hardy_bound(const RootedTree& tree, const TreeWeights& w, double p,
                       const std::vector<double>& grid = default_theta_grid(), bool inclusive = false);

struct HardyOptions {
  int trials = 8;
  std::uint64_t seed = 1;
  /// Partial sums over t0 < u <= t instead of t0 < u < t.
  bool inclusive = false;
  int max_iter = 10000;
};

struct HardyEstimate {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
  Eigen::VectorXd maximizer;
};

/// Lower bound on the best constant of
///   (sum_t nu_t |sum_{t0<u<t} b_u|^p)^(1/p) <= C (sum_t mu_t |b_t|^p)^(1/p).
/// p = 2: power iteration on the normal operator. Otherwise normalized
/// gradient ascent on the Rayleigh quotient from `trials` starts.
HardyEstimate hardy_best_constant(const RootedTree& tree, const TreeWeights& w, double p,
                                  const HardyOptions& opt = {});

/// (Tb)_t = sum_{t0 < u < t} b_u (or t0 < u <= t).
Eigen::VectorXd hardy_apply(const RootedTree& tree, const Eigen::VectorXd& b, bool inclusive = false);
/// Adjoint of hardy_apply.
Eigen::VectorXd hardy_adjoint(const RootedTree& tree, const Eigen::VectorXd& y, bool inclusive = false);

struct PoincareResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

/// ||b - mean_nu(b)||_{p,nu} against (sum_{t != t0} |b_t - b_parent|^p mu_t)^(1/p).
PoincareResult poincare_residual(const RootedTree& tree, const TreeWeights& w, double p, const Eigen::VectorXd& b);

double conjugate_exponent(double p);

}  // namespace korn
