#include "korn/rigid.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace korn {

Field iij_field(int i, int j, const GridDomain& d) { return skew_field(d, i, j); }

Field subtract_skew(const Field& u, const Skew& A) {
  u.check();
  Field out = u;
  const GridDomain& d = *u.domain;
  const auto pairs = skew_pairs(d.dim());
  for (std::size_t c = 0; c < d.size(); ++c) {
    const Point x = d.center(c);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      const double a = A.coeffs[static_cast<Eigen::Index>(k)];
      out.values(static_cast<Eigen::Index>(c), i) -= a * x[j];
      out.values(static_cast<Eigen::Index>(c), j) += a * x[i];
    }
  }
  out.label = u.label + "-Ax";
  return out;
}

namespace {

// B_k dx for the skew basis, written into g (3 per k).
inline void basis_images(const std::vector<std::pair<int, int>>& pairs, const double* dx, double (*g)[3]) {
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    g[k][0] = g[k][1] = g[k][2] = 0.0;
    g[k][i] = dx[j];
    g[k][j] = -dx[i];
  }
}

struct GramAcc {
  CompensatedSum G[3][3];
  CompensatedSum rhs[3];
  CompensatedSum uu;
  void merge(const GramAcc& o) {
    for (int a = 0; a < 3; ++a) {
      rhs[a].add(o.rhs[a].value());
      for (int b = 0; b < 3; ++b) G[a][b].add(o.G[a][b].value());
    }
    uu.add(o.uu.value());
  }
};

}  // namespace

ProjectionResult project(const Field& u, const std::vector<int>& region, double s) {
  u.check();
  const GridDomain& d = *u.domain;
  const int n = d.dim();
  const auto pairs = skew_pairs(n);
  const auto m = static_cast<int>(pairs.size());
  SeminormParams params;
  params.s = s;
  params.p = 2.0;
  params.region = region;
  params.max_cells = std::numeric_limits<std::size_t>::max();
  const PairPlan plan(d, PairPlan::Mode::Full, n + 2.0 * s, params);
  const std::vector<double> v = pack_values(u);
  const double h = d.h();

  const GramAcc acc = plan.accumulate(GramAcc{}, [&](GramAcc& a, int i, int j, const Offset& o, double w) {
    const double dx[3] = {h * o.d[0], h * o.d[1], h * o.d[2]};
    double g[3][3];
    basis_images(pairs, dx, g);
    const double* ui = &v[3 * static_cast<std::size_t>(i)];
    const double* uj = &v[3 * static_cast<std::size_t>(j)];
    const double du[3] = {uj[0] - ui[0], uj[1] - ui[1], uj[2] - ui[2]};
    for (int k = 0; k < m; ++k) {
      a.rhs[k].add(w * (du[0] * g[k][0] + du[1] * g[k][1] + du[2] * g[k][2]));
      for (int l = k; l < m; ++l) a.G[k][l].add(w * (g[k][0] * g[l][0] + g[k][1] * g[l][1] + g[k][2] * g[l][2]));
    }
    a.uu.add(w * (du[0] * du[0] + du[1] * du[1] + du[2] * du[2]));
  });

  ProjectionResult r;
  r.region = region;
  r.s = s;
  r.gram.resize(m, m);
  r.rhs.resize(m);
  for (int k = 0; k < m; ++k) {
    r.rhs[k] = acc.rhs[k].value();
    for (int l = k; l < m; ++l) r.gram(k, l) = r.gram(l, k) = acc.G[k][l].value();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r.gram);
  const double lmax = eig.eigenvalues().maxCoeff(), lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || lmin <= 1e-13 * lmax) throw Error("project: singular Gram matrix (degenerate region)");
  r.coefficients = Skew(n, r.gram.ldlt().solve(r.rhs));
  const Eigen::VectorXd res = r.rhs - r.gram * r.coefficients.coeffs;
  const double unorm = std::sqrt(std::max(acc.uu.value(), 0.0));
  for (int k = 0; k < m; ++k) {
    const double denom = unorm * std::sqrt(r.gram(k, k));
    r.orthogonality = std::max(r.orthogonality, denom > 0.0 ? std::abs(res[k]) / denom : std::abs(res[k]));
  }
  return r;
}

RmKind rm_kind_from_string(const std::string& name) {
  if (name == "full") return RmKind::Full;
  if (name == "truncated") return RmKind::Truncated;
  if (name == "weighted") return RmKind::Weighted;
  throw Error("unknown minimization kind: " + name);
}

namespace {

SeminormParams kind_params(const SeminormParams& params, RmKind kind, PairPlan::Mode& mode) {
  SeminormParams q = params;
  switch (kind) {
    case RmKind::Full:
      q.tau.reset();
      q.beta.reset();
      mode = PairPlan::Mode::Full;
      break;
    case RmKind::Truncated:
      if (!q.tau) throw Error("min_over_rm: truncated kind needs tau");
      q.beta.reset();
      mode = PairPlan::Mode::Truncated;
      break;
    case RmKind::Weighted:
      if (!q.tau || !q.beta) throw Error("min_over_rm: weighted kind needs tau and beta");
      mode = PairPlan::Mode::Truncated;
      break;
  }
  return q;
}

struct NewtonAcc {
  CompensatedSum F;
  double g[3] = {0, 0, 0};
  double H[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  void merge(const NewtonAcc& o) {
    F.add(o.F.value());
    for (int a = 0; a < 3; ++a) {
      g[a] += o.g[a];
      for (int b = 0; b < 3; ++b) H[a][b] += o.H[a][b];
    }
  }
};

class RmObjective {
public:
  RmObjective(const Field& u, const SeminormParams& params, RmKind kind)
      : d_(*u.domain), params_(kind_params(params, kind, mode_)),
        plan_(d_, mode_, d_.dim() + params_.s * params_.p, params_), v_(pack_values(u)),
        pairs_(skew_pairs(d_.dim())), powp_(params_.p) {
    // Floor on |r| inside |r|^(p-2) so the Hessian stays finite for p < 2.
    double umax = 0.0;
    for (double x : v_) umax = std::max(umax, std::abs(x));
    floor2_ = std::pow(1e-10 * std::max(umax, 1e-300), 2);
  }

  std::size_t m() const { return pairs_.size(); }
  double p() const { return params_.p; }

  double value(const Eigen::VectorXd& a) const {
    const double h = d_.h();
    return plan_.sum([&](int i, int j, const Offset& o, double w) {
      double r[3];
      residual(a, h, i, j, o, r);
      return w * powp_(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    });
  }

  NewtonAcc derivatives(const Eigen::VectorXd& a) const {
    const double h = d_.h();
    const double p = params_.p;
    const auto mm = static_cast<int>(m());
    return plan_.accumulate(NewtonAcc{}, [&](NewtonAcc& acc, int i, int j, const Offset& o, double w) {
      double r[3];
      const double dx[3] = {h * o.d[0], h * o.d[1], h * o.d[2]};
      residual(a, h, i, j, o, r);
      const double r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
      acc.F.add(w * powp_(r2));
      const double rc2 = std::max(r2, floor2_);
      const double q = p == 2.0 ? 1.0 : std::pow(rc2, 0.5 * (p - 2.0));
      double g[3][3];
      basis_images(pairs_, dx, g);
      double rg[3];
      for (int k = 0; k < mm; ++k) rg[k] = r[0] * g[k][0] + r[1] * g[k][1] + r[2] * g[k][2];
      for (int k = 0; k < mm; ++k) {
        acc.g[k] -= w * p * q * rg[k];
        for (int l = 0; l < mm; ++l) {
          const double gg = g[k][0] * g[l][0] + g[k][1] * g[l][1] + g[k][2] * g[l][2];
          acc.H[k][l] += w * p * q * (gg + (p - 2.0) * rg[k] * rg[l] / rc2);
        }
      }
    });
  }

private:
  inline void residual(const Eigen::VectorXd& a, double h, int i, int j, const Offset& o, double* r) const {
    const double* ui = &v_[3 * static_cast<std::size_t>(i)];
    const double* uj = &v_[3 * static_cast<std::size_t>(j)];
    const double dx[3] = {h * o.d[0], h * o.d[1], h * o.d[2]};
    r[0] = uj[0] - ui[0];
    r[1] = uj[1] - ui[1];
    r[2] = uj[2] - ui[2];
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto [pi, pj] = pairs_[k];
      const double ak = a[static_cast<Eigen::Index>(k)];
      r[pi] -= ak * dx[pj];
      r[pj] += ak * dx[pi];
    }
  }

  const GridDomain& d_;
  PairPlan::Mode mode_ = PairPlan::Mode::Full;
  SeminormParams params_;
  PairPlan plan_;
  std::vector<double> v_;
  std::vector<std::pair<int, int>> pairs_;
  PowHalf powp_;
  double floor2_ = 0.0;
};

}  // namespace

double rm_objective(const Field& u, const Skew& A, const SeminormParams& params, RmKind kind) {
  u.check();
  const RmObjective obj(u, params, kind);
  return std::pow(std::max(obj.value(A.coeffs), 0.0), 1.0 / params.p);
}

RmResult min_over_rm(const Field& u, const SeminormParams& params, RmKind kind, const RmOptions& opt) {
  u.check();
  const int n = u.domain->dim();
  const RmObjective obj(u, params, kind);
  const auto m = static_cast<Eigen::Index>(obj.m());

  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
  if (kind == RmKind::Full) a = project(u, params.region, params.s).coefficients.coeffs;

  // Coefficient scale: a typical gradient magnitude of u.
  const DomainRadii radii = domain_radii(*u.domain);
  const double uscale = u.values.cwiseAbs().maxCoeff();
  const double scale = std::max({a.norm(), uscale / std::max(radii.outer, 1e-300), 1e-300});

  RmResult out;
  double F = obj.value(a);
  if (opt.solver == RmSolver::Newton) {
    for (out.iterations = 0; out.iterations < opt.max_iter; ++out.iterations) {
      if (F <= 0.0) {
        out.converged = true;
        break;
      }
      const NewtonAcc acc = obj.derivatives(a);
      Eigen::MatrixXd H(m, m);
      Eigen::VectorXd g(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        g[k] = acc.g[k];
        for (Eigen::Index l = 0; l < m; ++l) H(k, l) = acc.H[k][l];
      }
      Eigen::VectorXd step = -H.ldlt().solve(g);
      if (!step.allFinite()) step = -g * (scale / std::max(g.norm(), 1e-300));
      double t = 1.0;
      double Fn = obj.value(a + step);
      while (!(Fn <= F) && t > 1e-12) {
        t *= 0.5;
        Fn = obj.value(a + t * step);
      }
      if (!(Fn <= F)) {
        out.converged = true;  // no descent left at this precision
        break;
      }
      a += t * step;
      const double moved = t * step.norm();
      F = Fn;
      if (moved <= opt.step_tol * scale) {
        out.converged = true;
        ++out.iterations;
        break;
      }
    }
  } else {
    double delta = 0.1 * scale;
    const double stop = std::max(opt.step_tol, 1e-6) * scale;
    for (out.iterations = 0; out.iterations < opt.max_iter * 50 && delta >= stop; ++out.iterations) {
      bool improved = false;
      for (Eigen::Index k = 0; k < m; ++k)
        for (double sgn : {1.0, -1.0}) {
          Eigen::VectorXd c = a;
          c[k] += sgn * delta;
          const double Fc = obj.value(c);
          if (Fc < F) {
            a = c;
            F = Fc;
            improved = true;
            break;
          }
        }
      if (!improved) delta *= 0.5;
    }
    out.converged = delta < stop;
  }
  if (!std::isfinite(F)) throw Error("min_over_rm: non-finite objective");
  out.A = Skew(n, a);
  out.value = std::pow(std::max(F, 0.0), 1.0 / params.p);
  return out;
}

LocalProjections local_projections(const Field& u, const WhitneyDecomposition& decomp, const RootedTree& tree, int N,
                                   double s) {
  u.check();
  const GridDomain& d = *u.domain;
  const std::size_t V = decomp.cubes.size();
  LocalProjections out;
  out.cube.resize(V);
  out.bridge.assign(V, std::nullopt);
  out.cells.resize(V);
  for (std::size_t t = 0; t < V; ++t) {
    const auto region = cells_in(d, smooth_cube(decomp.cubes[t], decomp.dim, N));
    out.cells[t] = static_cast<int>(region.size());
    if (region.size() < 2) throw Error("local_projections: under-resolved cube " + std::to_string(t));
    out.cube[t] = project(u, region, s).coefficients;
  }
  for (std::size_t t = 0; t < V; ++t) {
    const int par = tree.parent[t];
    if (par < 0) continue;
    const SmoothCube b = bridge_cube(decomp.cubes[t], decomp.cubes[static_cast<std::size_t>(par)], decomp.dim, N);
    const auto region = cells_in(d, b);
    if (region.size() < 2) continue;
    try {
      out.bridge[t] = project(u, region, s).coefficients;
    } catch (const Error&) {
      // Collinear bridge cells in 3D leave the Gram system singular.
    }
  }
  return out;
}

namespace {

std::vector<double> level_weights(const WhitneyDecomposition& decomp, double p, double s, double beta) {
  std::vector<double> w(decomp.cubes.size());
  const double e = decomp.dim + p - p * s + p * beta;
  for (std::size_t t = 0; t < w.size(); ++t) w[t] = std::pow(decomp.cubes[t].side, e);
  return w;
}

}  // namespace

Skew global_matrix(const WhitneyDecomposition& decomp, const std::vector<Skew>& local, double p, double s,
                   double beta) {
  if (local.size() != decomp.cubes.size() || local.empty()) throw Error("global_matrix: one matrix per cube needed");
  const auto w = level_weights(decomp, p, s, beta);
  const Eigen::Index m = local.front().coeffs.size();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m);
  CompensatedSum total;
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(m));
  for (std::size_t t = 0; t < w.size(); ++t) {
    total.add(w[t]);
    for (Eigen::Index k = 0; k < m; ++k) acc[static_cast<std::size_t>(k)].add(w[t] * local[t].coeffs[k]);
  }
  for (Eigen::Index k = 0; k < m; ++k) a[k] = acc[static_cast<std::size_t>(k)].value() / total.value();
  return Skew(decomp.dim, a);
}

Eigen::VectorXd zero_mean_residual(const WhitneyDecomposition& decomp, const std::vector<Skew>& local, const Skew& A,
                                   double p, double s, double beta) {
  const auto w = level_weights(decomp, p, s, beta);
  const Eigen::Index m = A.coeffs.size();
  std::vector<CompensatedSum> acc(static_cast<std::size_t>(m));
  for (std::size_t t = 0; t < w.size(); ++t)
    for (Eigen::Index k = 0; k < m; ++k) acc[static_cast<std::size_t>(k)].add(w[t] * (local[t].coeffs[k] - A.coeffs[k]));
  Eigen::VectorXd r(m);
  for (Eigen::Index k = 0; k < m; ++k) r[k] = acc[static_cast<std::size_t>(k)].value();
  return r;
}

double chain_difference_sum(const WhitneyDecomposition& decomp, const RootedTree& tree, const std::vector<Skew>& local,
                            double p, double s) {
  const auto w = level_weights(decomp, p, s, 0.0);
  CompensatedSum sum;
  for (std::size_t t = 0; t < w.size(); ++t) {
    const int par = tree.parent[t];
    if (par < 0) continue;
    const double diff = (local[t].coeffs - local[static_cast<std::size_t>(par)].coeffs).norm();
    sum.add(w[t] * std::pow(diff, p));
  }
  return sum.value();
}

DomainRadii domain_radii(const GridDomain& d) {
  DomainRadii r;
  if (d.size() == 0) return r;
  Point lo = d.center(0), hi = lo;
  for (std::size_t i = 0; i < d.size(); ++i) {
    lo = lo.cwiseMin(d.center(i));
    hi = hi.cwiseMax(d.center(i));
    r.inner = std::max(r.inner, d.delta(i));
  }
  const Point half = Point::Constant(0.5 * d.h());
  Point ext = (hi + half) - (lo - half);
  if (d.dim() == 2) ext[2] = 0.0;
  r.outer = 0.5 * ext.norm();
  return r;
}

}  // namespace korn
