#include "korn/seminorms.hpp"

#include <cmath>
#include <string>

namespace korn {

PairPlan::PairPlan(const GridDomain& d, Mode mode, double kernel_exponent, const SeminormParams& params)
    : d_(&d), mode_(mode) {
  if (!(params.s > 0.0 && params.s < 1.0)) throw Error("seminorm: s must lie in (0, 1)");
  if (!(params.p > 1.0) || !std::isfinite(params.p)) throw Error("seminorm: p must lie in (1, inf)");
  if (params.beta && !params.tau) throw Error("seminorm: a weight exponent needs a truncation tau");

  in_region_.assign(d.size(), params.region.empty() ? 1 : 0);
  if (params.region.empty()) {
    cells_.resize(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) cells_[i] = static_cast<int>(i);
  } else {
    for (int c : params.region) {
      if (c < 0 || static_cast<std::size_t>(c) >= d.size()) throw Error("seminorm: region cell out of range");
      in_region_[static_cast<std::size_t>(c)] = 1;
    }
    for (std::size_t i = 0; i < d.size(); ++i)
      if (in_region_[i]) cells_.push_back(static_cast<int>(i));
  }
  if (cells_.empty()) throw Error("seminorm: empty region");
  if (cells_.size() < 2) throw Error("seminorm: region needs at least 2 cells");

  coords_.resize(3 * cells_.size());
  Lattice lo = d.cell(static_cast<std::size_t>(cells_[0])), hi = lo;
  for (std::size_t a = 0; a < cells_.size(); ++a) {
    const Lattice& c = d.cell(static_cast<std::size_t>(cells_[a]));
    for (int k = 0; k < 3; ++k) {
      coords_[3 * a + static_cast<std::size_t>(k)] = c[k];
      lo[k] = std::min(lo[k], c[k]);
      hi[k] = std::max(hi[k], c[k]);
    }
  }

  const double h = d.h();
  const int n = d.dim();
  std::size_t max_d2 = 0;
  if (mode == Mode::Full) {
    if (cells_.size() > params.max_cells)
      throw Error("seminorm: full pair sum over " + std::to_string(cells_.size()) + " cells exceeds the cap of " +
                  std::to_string(params.max_cells));
    for (int k = 0; k < 3; ++k) max_d2 += static_cast<std::size_t>(hi[k] - lo[k]) * static_cast<std::size_t>(hi[k] - lo[k]);
  } else {
    if (!params.tau) throw Error("seminorm: truncation needs tau");
    tau_ = *params.tau;
    if (!(tau_ > 0.0 && tau_ < 1.0)) throw Error("seminorm: tau must lie in (0, 1)");
    symmetrize_ = params.symmetrize;
    double dmax = 0.0;
    for (int c : cells_) dmax = std::max(dmax, d.delta(static_cast<std::size_t>(c)));
    const double rmax = tau_ * dmax / h;
    const int R = static_cast<int>(std::ceil(rmax));
    const int Rz = n == 3 ? R : 0;
    for (int z = -Rz; z <= Rz; ++z)
      for (int y = -R; y <= R; ++y)
        for (int x = -R; x <= R; ++x) {
          const int d2 = x * x + y * y + z * z;
          if (d2 == 0 || static_cast<double>(d2) >= rmax * rmax) continue;
          Offset o;
          o.d[0] = x;
          o.d[1] = y;
          o.d[2] = z;
          o.d2 = d2;
          offsets_.push_back(o);
          max_d2 = std::max(max_d2, static_cast<std::size_t>(d2));
        }
    std::sort(offsets_.begin(), offsets_.end(), [](const Offset& a, const Offset& b) {
      if (a.d2 != b.d2) return a.d2 < b.d2;
      return std::lexicographical_compare(a.d, a.d + 3, b.d, b.d + 3);
    });
  }
  if (params.beta) {
    weighted_ = true;
    alpha_ = params.p * *params.beta;
  }

  const double scale = std::pow(h, 2 * n) * (mode == Mode::Full ? 2.0 : 1.0);
  kernel_.assign(max_d2 + 1, 0.0);
  for (std::size_t k = 1; k <= max_d2; ++k)
    kernel_[k] = scale * std::pow(h * h * static_cast<double>(k), -0.5 * kernel_exponent);
}

}  // namespace korn
