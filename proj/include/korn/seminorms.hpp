#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "korn/fields.hpp"
#include "korn/parallel.hpp"

namespace korn {

enum class SeminormKind { Gagliardo, X };

struct SeminormParams {
  double s = 0.5;
  double p = 2.0;
  std::optional<double> tau;
  std::optional<double> beta;  // weight d(x,y)^(p beta), d = min(delta_x, delta_y)
  std::vector<int> region;     // cell ids; empty means every cell
  bool symmetrize = false;     // truncate by tau * min(delta_i, delta_j)
  std::size_t max_cells = 20000;
};

/// Integer lattice offset between two cells.
struct Offset {
  int d[3] = {0, 0, 0};
  int d2 = 0;
};

/// |x|^p evaluated from x^2, with exact fast paths for the common p.
class PowHalf {
public:
  explicit PowHalf(double p) : p_(p), half_(0.5 * p) {
    if (p == 2.0) mode_ = 0;
    else if (p == 3.0) mode_ = 1;
    else if (p == 1.5) mode_ = 2;
    else if (p == 1.0) mode_ = 3;
    else mode_ = 4;
  }
  double operator()(double x2) const {
    switch (mode_) {
      case 0: return x2;
      case 1: return x2 * std::sqrt(x2);
      case 2: { const double r = std::sqrt(x2); return r * std::sqrt(r); }
      case 3: return std::sqrt(x2);
      default: return x2 > 0.0 ? std::pow(x2, half_) : 0.0;
    }
  }
  double p() const { return p_; }

private:
  double p_;
  double half_;
  int mode_ = 4;
};

/// Enumerates the cell pairs of one seminorm family and hands each pair to
/// a callback together with its quadrature weight
///   |x_i - x_j|^(-e) h^(2n) [min(delta_i, delta_j)^alpha].
/// Full mode visits unordered pairs once with a factor 2 (every summand is
/// symmetric); truncated mode visits ordered pairs with |x_j - x_i| < tau delta_i.
/// Work is cut into fixed row blocks reduced in block order, so results do
/// not depend on the thread count.
class PairPlan {
public:
  enum class Mode { Full, Truncated };

  PairPlan(const GridDomain& d, Mode mode, double kernel_exponent, const SeminormParams& params);

  const GridDomain& domain() const { return *d_; }
  Mode mode() const { return mode_; }
  const std::vector<int>& cells() const { return cells_; }
  std::size_t offset_count() const { return offsets_.size(); }

  /// fn(acc, i, j, offset, weight) over all pairs; Acc needs merge(const Acc&).
  template <class Acc, class Fn>
  Acc accumulate(const Acc& zero, Fn&& fn) const;

  /// Compensated sum of fn(i, j, offset, weight).
  template <class Fn>
  double sum(Fn&& fn) const;

private:
  static constexpr std::size_t kBlockRows = 64;

  template <class Acc, class Fn>
  void run_block(std::size_t block, Acc& acc, Fn& fn) const;

  const GridDomain* d_;
  Mode mode_;
  std::vector<int> cells_;
  std::vector<int> coords_;  // 3 per region cell
  std::vector<char> in_region_;
  std::vector<double> kernel_;  // by squared lattice distance
  std::vector<Offset> offsets_;
  double tau_ = 0.0;
  bool symmetrize_ = false;
  double alpha_ = 0.0;
  bool weighted_ = false;
};

template <class Acc, class Fn>
void PairPlan::run_block(std::size_t block, Acc& acc, Fn& fn) const {
  const std::size_t M = cells_.size();
  const std::size_t r0 = block * kBlockRows, r1 = std::min(M, r0 + kBlockRows);
  const auto delta = d_->delta();
  const double h = d_->h();
  Offset off;
  if (mode_ == Mode::Full) {
    for (std::size_t a = r0; a < r1; ++a) {
      const int i = cells_[a];
      const int* ci = &coords_[3 * a];
      for (std::size_t b = a + 1; b < M; ++b) {
        const int* cj = &coords_[3 * b];
        off.d[0] = cj[0] - ci[0];
        off.d[1] = cj[1] - ci[1];
        off.d[2] = cj[2] - ci[2];
        off.d2 = off.d[0] * off.d[0] + off.d[1] * off.d[1] + off.d[2] * off.d[2];
        double w = kernel_[static_cast<std::size_t>(off.d2)];
        const int j = cells_[b];
        if (weighted_) w *= std::pow(std::min(delta[static_cast<std::size_t>(i)], delta[static_cast<std::size_t>(j)]), alpha_);
        fn(acc, i, j, off, w);
      }
    }
    return;
  }
  for (std::size_t a = r0; a < r1; ++a) {
    const int i = cells_[a];
    const double di = delta[static_cast<std::size_t>(i)];
    const double r = tau_ * di;
    const double lim = (r / h) * (r / h);
    const Lattice& c = d_->cell(static_cast<std::size_t>(i));
    for (const Offset& o : offsets_) {
      if (static_cast<double>(o.d2) >= lim) break;
      const int j = d_->cell_at({c[0] + o.d[0], c[1] + o.d[1], c[2] + o.d[2]});
      if (j < 0 || !in_region_[static_cast<std::size_t>(j)]) continue;
      const double dj = delta[static_cast<std::size_t>(j)];
      if (symmetrize_ && static_cast<double>(o.d2) >= (tau_ * dj / h) * (tau_ * dj / h)) continue;
      double w = kernel_[static_cast<std::size_t>(o.d2)];
      if (weighted_) w *= std::pow(std::min(di, dj), alpha_);
      fn(acc, i, j, o, w);
    }
  }
}

template <class Acc, class Fn>
Acc PairPlan::accumulate(const Acc& zero, Fn&& fn) const {
  const std::size_t nblocks = (cells_.size() + kBlockRows - 1) / kBlockRows;
  std::vector<Acc> partial(nblocks, zero);
  parallel_blocks(nblocks, [&](std::size_t b) { run_block(b, partial[b], fn); });
  Acc total = zero;
  for (const Acc& a : partial) total.merge(a);
  return total;
}

namespace detail {
struct SumAcc {
  CompensatedSum s;
  void merge(const SumAcc& o) { s.add(o.s.value()); }
};
}  // namespace detail

template <class Fn>
double PairPlan::sum(Fn&& fn) const {
  const auto acc = accumulate(detail::SumAcc{}, [&](detail::SumAcc& a, int i, int j, const Offset& o, double w) {
    a.s.add(fn(i, j, o, w));
  });
  return acc.s.value();
}

/// Row-major copy of field values with 3 slots per cell.
template <class Scalar>
std::vector<double> pack_values(const DiscreteField<Scalar>& u) {
  std::vector<double> out(static_cast<std::size_t>(u.size()) * 3, 0.0);
  for (Eigen::Index i = 0; i < u.size(); ++i)
    for (int a = 0; a < u.dim(); ++a) out[static_cast<std::size_t>(3 * i + a)] = static_cast<double>(u.values(i, a));
  return out;
}

/// p-th power of a seminorm: Gagliardo or X kind, full or truncated, with
/// optional distance weight.
template <class Scalar>
double seminorm_power(const DiscreteField<Scalar>& u, const SeminormParams& params, SeminormKind kind,
                      PairPlan::Mode mode) {
  u.check();
  const GridDomain& d = *u.domain;
  const PairPlan plan(d, mode, d.dim() + params.s * params.p, params);
  const std::vector<double> v = pack_values(u);
  const PowHalf powp(params.p);
  if (kind == SeminormKind::Gagliardo) {
    return plan.sum([&](int i, int j, const Offset&, double w) {
      const double* a = &v[3 * static_cast<std::size_t>(i)];
      const double* b = &v[3 * static_cast<std::size_t>(j)];
      const double x0 = b[0] - a[0], x1 = b[1] - a[1], x2 = b[2] - a[2];
      return w * powp(x0 * x0 + x1 * x1 + x2 * x2);
    });
  }
  return plan.sum([&](int i, int j, const Offset& o, double w) {
    const double* a = &v[3 * static_cast<std::size_t>(i)];
    const double* b = &v[3 * static_cast<std::size_t>(j)];
    const double dot = (b[0] - a[0]) * o.d[0] + (b[1] - a[1]) * o.d[1] + (b[2] - a[2]) * o.d[2];
    return w * powp(dot * dot / o.d2);
  });
}

/// Full Gagliardo seminorm over region pairs, same-cell pairs excluded.
template <class Scalar>
double gagliardo(const DiscreteField<Scalar>& u, const SeminormParams& params) {
  return std::pow(seminorm_power(u, params, SeminormKind::Gagliardo, PairPlan::Mode::Full), 1.0 / params.p);
}

/// Full X seminorm: |(u_j - u_i).(x_j - x_i)|^p / |x_j - x_i|^(n+sp+p).
template <class Scalar>
double x_seminorm(const DiscreteField<Scalar>& u, const SeminormParams& params) {
  return std::pow(seminorm_power(u, params, SeminormKind::X, PairPlan::Mode::Full), 1.0 / params.p);
}

/// Truncated seminorm: ordered pairs with |x_j - x_i| < tau delta_i.
template <class Scalar>
double truncated(const DiscreteField<Scalar>& u, const SeminormParams& params, SeminormKind kind) {
  if (!params.tau) throw Error("truncated seminorm needs tau");
  SeminormParams q = params;
  q.beta.reset();
  return std::pow(seminorm_power(u, q, kind, PairPlan::Mode::Truncated), 1.0 / params.p);
}

/// Truncated seminorm with each pair weighted by min(delta_i, delta_j)^(p beta).
template <class Scalar>
double weighted_truncated(const DiscreteField<Scalar>& u, const SeminormParams& params, SeminormKind kind) {
  if (!params.tau || !params.beta) throw Error("weighted seminorm needs tau and beta");
  return std::pow(seminorm_power(u, params, kind, PairPlan::Mode::Truncated), 1.0 / params.p);
}

/// s-bilinear form over region x region with kernel exponent n + 2s.
template <class Scalar>
double sform(const DiscreteField<Scalar>& u, const DiscreteField<Scalar>& v, const std::vector<int>& region,
             double s) {
  u.check();
  v.check();
  if (u.domain != v.domain) throw Error("sform: fields live on different grids");
  SeminormParams params;
  params.s = s;
  params.p = 2.0;
  params.region = region;
  params.max_cells = std::max(params.max_cells, region.size());
  if (region.empty()) params.max_cells = std::max(params.max_cells, u.domain->size());
  const PairPlan plan(*u.domain, PairPlan::Mode::Full, u.domain->dim() + 2.0 * s, params);
  const std::vector<double> a = pack_values(u), b = pack_values(v);
  return plan.sum([&](int i, int j, const Offset&, double w) {
    const std::size_t I = 3 * static_cast<std::size_t>(i), J = 3 * static_cast<std::size_t>(j);
    return w * ((a[J] - a[I]) * (b[J] - b[I]) + (a[J + 1] - a[I + 1]) * (b[J + 1] - b[I + 1]) +
                (a[J + 2] - a[I + 2]) * (b[J + 2] - b[I + 2]));
  });
}

}  // namespace korn
