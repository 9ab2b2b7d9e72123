#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "korn/seminorms.hpp"
#include "korn/tree.hpp"

namespace korn {

/// A = sum_{i<j} a_ij I_ij, coefficients in skew_pairs(dim) order.
template <class Scalar>
struct SkewMatrix {
  int dim = 2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coeffs;

  SkewMatrix() = default;
  explicit SkewMatrix(int n) : dim(n), coeffs(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n * (n - 1) / 2)) {}
  SkewMatrix(int n, Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a) : dim(n), coeffs(std::move(a)) {}

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix() const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(dim, dim);
    const auto pairs = skew_pairs(dim);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      A(pairs[k].first, pairs[k].second) = coeffs[static_cast<Eigen::Index>(k)];
      A(pairs[k].second, pairs[k].first) = -coeffs[static_cast<Eigen::Index>(k)];
    }
    return A;
  }
};

using Skew = SkewMatrix<double>;

/// Basis field I_ij x = x_j e_i - x_i e_j.
Field iij_field(int i, int j, const GridDomain& d);

/// u - A x.
Field subtract_skew(const Field& u, const Skew& A);

struct ProjectionResult {
  Skew coefficients;
  std::vector<int> region;
  double s = 0.5;
  Eigen::MatrixXd gram;
  Eigen::VectorXd rhs;
  /// max_k |<u - Pu, I_k>| / (|u| |I_k|) in the s-form.
  double orthogonality = 0.0;
};

/// Projection onto skew fields in the s-form over region x region (all
/// cells when empty), by the full Gram system.
ProjectionResult project(const Field& u, const std::vector<int>& region, double s);

enum class RmKind { Full, Truncated, Weighted };
enum class RmSolver { Newton, CoordinateSearch };

RmKind rm_kind_from_string(const std::string& name);

struct RmOptions {
  RmSolver solver = RmSolver::Newton;
  int max_iter = 200;
  /// Stop once the update falls below step_tol times the coefficient scale.
  double step_tol = 1e-12;
};

struct RmResult {
  Skew A;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// inf over skew A of |u - A x| in the chosen Gagliardo family. The
/// objective is convex in A; the p = 2 full case starts from the
/// projection, which is its exact minimizer.
RmResult min_over_rm(const Field& u, const SeminormParams& params, RmKind kind, const RmOptions& opt = {});

/// Value of |u - A x| in the chosen family.
double rm_objective(const Field& u, const Skew& A, const SeminormParams& params, RmKind kind);

struct LocalProjections {
  std::vector<Skew> cube;                  // A_t on U_t
  std::vector<std::optional<Skew>> bridge;  // on the bridge to the parent, when resolved
  std::vector<int> cells;                  // cells per U_t
};

/// Projections on every smoothened cube and on each tree edge's bridge.
/// Throws when some U_t holds fewer than 2 cells.
LocalProjections local_projections(const Field& u, const WhitneyDecomposition& decomp, const RootedTree& tree, int N,
                                   double s);

/// Weighted average of local matrices with weights l_t^(n + p - ps + p beta).
Skew global_matrix(const WhitneyDecomposition& decomp, const std::vector<Skew>& local, double p, double s,
                   double beta = 0.0);

/// sum_t l_t^(n+p-ps+p beta) (a^t - a), per coefficient.
Eigen::VectorXd zero_mean_residual(const WhitneyDecomposition& decomp, const std::vector<Skew>& local,
                                   const Skew& A, double p, double s, double beta = 0.0);

/// sum over non-root t of l_t^(n+p-ps) |a^t - a^parent|^p.
double chain_difference_sum(const WhitneyDecomposition& decomp, const RootedTree& tree,
                            const std::vector<Skew>& local, double p, double s);

struct DomainRadii {
  double inner = 0.0;  // max delta
  double outer = 0.0;  // half bounding-box diagonal
};

DomainRadii domain_radii(const GridDomain& d);

}  // namespace korn
