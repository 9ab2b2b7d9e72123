#include "korn/whitney.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace korn {

Point WhitneyCube::lo(int dim) const {
  Point p = center;
  for (int a = 0; a < dim; ++a) p[a] -= 0.5 * side;
  return p;
}

Point WhitneyCube::hi(int dim) const {
  Point p = center;
  for (int a = 0; a < dim; ++a) p[a] += 0.5 * side;
  return p;
}

double WhitneyDecomposition::covered_volume() const {
  double v = 0.0;
  for (const auto& c : cubes) v += std::pow(c.side, dim);
  return v;
}

namespace {

// Summed-volume table over lattice occupancy, for O(1) box counts.
class OccupancyTable {
public:
  explicit OccupancyTable(const GridDomain& d) : ext_(d.extent()) {
    s_.assign(static_cast<std::size_t>(ext_[0] + 1) * (ext_[1] + 1) * (ext_[2] + 1), 0);
    for (int k = 0; k < ext_[2]; ++k)
      for (int j = 0; j < ext_[1]; ++j)
        for (int i = 0; i < ext_[0]; ++i) {
          const long long v = d.occupied({i, j, k}) ? 1 : 0;
          at(i + 1, j + 1, k + 1) = v + at(i, j + 1, k + 1) + at(i + 1, j, k + 1) + at(i + 1, j + 1, k) -
                                    at(i, j, k + 1) - at(i, j + 1, k) - at(i + 1, j, k) + at(i, j, k);
        }
  }

  // Occupied cells in [lo, hi) after clipping to the lattice.
  long long count(Lattice lo, Lattice hi) const {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::clamp(lo[a], 0, ext_[a]);
      hi[a] = std::clamp(hi[a], 0, ext_[a]);
      if (hi[a] <= lo[a]) return 0;
    }
    return at(hi[0], hi[1], hi[2]) - at(lo[0], hi[1], hi[2]) - at(hi[0], lo[1], hi[2]) - at(hi[0], hi[1], lo[2]) +
           at(lo[0], lo[1], hi[2]) + at(lo[0], hi[1], lo[2]) + at(hi[0], lo[1], lo[2]) - at(lo[0], lo[1], lo[2]);
  }

private:
  long long& at(int i, int j, int k) {
    return s_[(static_cast<std::size_t>(k) * (ext_[1] + 1) + j) * (ext_[0] + 1) + i];
  }
  long long at(int i, int j, int k) const {
    return s_[(static_cast<std::size_t>(k) * (ext_[1] + 1) + j) * (ext_[0] + 1) + i];
  }

  Lattice ext_;
  std::vector<long long> s_;
};

struct Candidate {
  int depth;
  Lattice index;
};

}  // namespace

WhitneyDecomposition whitney_decompose(const GridDomain& domain, const WhitneyOptions& opt) {
  if (domain.size() == 0) throw Error("whitney_decompose: empty domain");
  if (!(opt.min_cells > 0.0)) throw Error("whitney_decompose: min_cells must be positive");
  const int n = domain.dim();
  const double h = domain.h();
  const auto& ext = domain.extent();
  int K = 0;
  while ((1 << K) < std::max({ext[0], ext[1], n == 3 ? ext[2] : 1})) ++K;
  const double root_side = std::ldexp(h, K);
  const double min_side = opt.min_cells * h;

  const OccupancyTable table(domain);
  const FaceIndex faces(domain);
  const double sqn = std::sqrt(static_cast<double>(n));

  std::vector<std::pair<int, Lattice>> accepted;  // (dyadic depth, index)
  std::deque<Candidate> queue{{0, {0, 0, 0}}};
  while (!queue.empty()) {
    const Candidate c = queue.front();
    queue.pop_front();
    const double side = std::ldexp(root_side, -c.depth);
    Point lo = domain.origin(), hi = domain.origin();
    for (int a = 0; a < n; ++a) {
      lo[a] += c.index[a] * side;
      hi[a] += (c.index[a] + 1) * side;
    }

    bool full = false, empty = false;
    if (c.depth <= K) {
      const int m = 1 << (K - c.depth);
      Lattice clo{0, 0, 0}, chi{1, 1, 1};
      for (int a = 0; a < n; ++a) {
        clo[a] = c.index[a] * m;
        chi[a] = clo[a] + m;
      }
      const long long cnt = table.count(clo, chi);
      long long vol = 1;
      for (int a = 0; a < n; ++a) vol *= m;
      bool inside = true;
      for (int a = 0; a < n; ++a) inside = inside && chi[a] <= ext[a];
      full = inside && cnt == vol;
      empty = cnt == 0;
    } else {
      const int shift = c.depth - K;
      Lattice cell{0, 0, 0};
      for (int a = 0; a < n; ++a) cell[a] = c.index[a] >> shift;
      full = domain.occupied(cell);
      empty = !full;
    }
    if (empty) continue;
    if (full && faces.distance(lo, hi) >= 3.0 * sqn * side) {
      accepted.push_back({c.depth, c.index});
      continue;
    }
    if (0.5 * side < min_side * (1.0 - 1e-12)) continue;
    const int nchild = 1 << n;
    for (int b = 0; b < nchild; ++b) {
      Lattice idx{0, 0, 0};
      for (int a = 0; a < n; ++a) idx[a] = 2 * c.index[a] + ((b >> a) & 1);
      queue.push_back({c.depth + 1, idx});
    }
  }
  if (accepted.empty()) throw Error("whitney_decompose: no admissible cube at this resolution");

  int top = std::numeric_limits<int>::max();
  for (const auto& [d, idx] : accepted) top = std::min(top, d);

  WhitneyDecomposition out;
  out.dim = n;
  out.origin = domain.origin();
  out.coarsest = std::ldexp(root_side, -top);
  out.min_side = min_side;
  out.cubes.reserve(accepted.size());
  for (const auto& [d, idx] : accepted) {
    WhitneyCube q;
    q.level = d - top;
    q.index = idx;
    q.side = std::ldexp(root_side, -d);
    q.center = domain.origin();
    for (int a = 0; a < n; ++a) q.center[a] += (idx[a] + 0.5) * q.side;
    out.cubes.push_back(q);
  }
  out.residual = std::max(0.0, 1.0 - out.covered_volume() / domain.volume());
  compute_neighbors(out);
  return out;
}

void compute_neighbors(WhitneyDecomposition& decomp) {
  const int n = decomp.dim;
  const std::size_t C = decomp.cubes.size();
  decomp.face_neighbors.assign(C, {});
  decomp.all_neighbors.assign(C, {});
  if (C == 0) return;

  double unit = std::numeric_limits<double>::infinity();
  Point gmin = Point::Constant(std::numeric_limits<double>::infinity());
  for (const auto& q : decomp.cubes) {
    unit = std::min(unit, q.side);
    gmin = gmin.cwiseMin(q.lo(n));
  }
  std::vector<Lattice> lo(C), len(C);
  Lattice gext{1, 1, 1};
  for (std::size_t c = 0; c < C; ++c) {
    const Point l = decomp.cubes[c].lo(n);
    for (int a = 0; a < n; ++a) {
      lo[c][a] = static_cast<int>(std::llround((l[a] - gmin[a]) / unit));
      len[c][a] = static_cast<int>(std::llround(decomp.cubes[c].side / unit));
      gext[a] = std::max(gext[a], lo[c][a] + len[c][a]);
    }
    if (n == 2) {
      lo[c][2] = 0;
      len[c][2] = 1;
    }
  }
  // Owner grid at the finest cube side, padded by one cell per side.
  const Lattice pext{gext[0] + 2, gext[1] + 2, n == 3 ? gext[2] + 2 : 1};
  const auto pidx = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(k) * pext[1] + j) * pext[0] + i;
  };
  std::vector<int> owner(static_cast<std::size_t>(pext[0]) * pext[1] * pext[2], -1);
  const int pad = 1, zpad = n == 3 ? 1 : 0;
  for (std::size_t c = 0; c < C; ++c)
    for (int k = 0; k < len[c][2]; ++k)
      for (int j = 0; j < len[c][1]; ++j)
        for (int i = 0; i < len[c][0]; ++i)
          owner[pidx(lo[c][0] + i + pad, lo[c][1] + j + pad, lo[c][2] + k + zpad)] = static_cast<int>(c);

  for (std::size_t c = 0; c < C; ++c) {
    std::vector<int> face, all;
    const int k0 = n == 3 ? -1 : 0, k1 = n == 3 ? len[c][2] : 0;
    for (int k = k0; k <= k1; ++k)
      for (int j = -1; j <= len[c][1]; ++j)
        for (int i = -1; i <= len[c][0]; ++i) {
          const int outside = (i < 0 || i >= len[c][0]) + (j < 0 || j >= len[c][1]) +
                              (n == 3 && (k < 0 || k >= len[c][2]));
          if (outside == 0) continue;
          const int o = owner[pidx(lo[c][0] + i + pad, lo[c][1] + j + pad, lo[c][2] + k + zpad)];
          if (o < 0) continue;
          all.push_back(o);
          if (outside == 1) face.push_back(o);
        }
    std::sort(face.begin(), face.end());
    face.erase(std::unique(face.begin(), face.end()), face.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    decomp.face_neighbors[c] = std::move(face);
    decomp.all_neighbors[c] = std::move(all);
  }
}

WhitneyReport validate_whitney(const WhitneyDecomposition& decomp, const GridDomain& domain) {
  WhitneyReport r;
  const int n = decomp.dim;
  // A coarser bucket than the construction uses, so the two searches do
  // not share their traversal.
  const FaceIndex faces(domain, 4);

  r.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& q : decomp.cubes) {
    const double dist = faces.distance(q.lo(n), q.hi(n));
    const double diam = q.diam(n);
    r.min_ratio = std::min(r.min_ratio, dist / diam);
    r.max_ratio = std::max(r.max_ratio, dist / diam);
    if (dist < 3.0 * diam) ++r.lower_violations;
    if (dist > 8.0 * diam) ++r.upper_violations;
    Lattice cell{0, 0, 0};
    for (int a = 0; a < n; ++a)
      cell[a] = static_cast<int>(std::floor((q.center[a] - domain.origin()[a]) / domain.h()));
    if (!(dist > 0.0) || !domain.occupied(cell)) ++r.outside_violations;
  }

  // Sweep along x over all cube pairs that can touch.
  std::vector<std::size_t> order(decomp.cubes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto lo_x = [&](std::size_t i) { return decomp.cubes[i].center[0] - 0.5 * decomp.cubes[i].side; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo_x(a) < lo_x(b); });
  std::vector<int> bad_neighbor(decomp.cubes.size(), 0), bad_overlap(decomp.cubes.size(), 0);
  for (std::size_t a = 0; a < order.size(); ++a) {
    const auto& qa = decomp.cubes[order[a]];
    const double tol = 1e-9 * qa.side;
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const auto& qb = decomp.cubes[order[b]];
      if (lo_x(order[b]) > qa.center[0] + 0.5 * qa.side + tol) break;
      double gap = 0.0;
      bool interior = true;
      for (int ax = 0; ax < n; ++ax) {
        const double d = std::abs(qa.center[ax] - qb.center[ax]) - 0.5 * (qa.side + qb.side);
        gap = std::max(gap, d);
        if (d > -tol) interior = false;
      }
      if (gap > tol) continue;
      if (interior) bad_overlap[order[a]] = bad_overlap[order[b]] = 1;
      const double ratio = qa.side / qb.side;
      if (ratio > 2.0 * (1 + 1e-12) || ratio < 0.5 * (1 - 1e-12)) bad_neighbor[order[a]] = bad_neighbor[order[b]] = 1;
    }
  }
  for (std::size_t i = 0; i < decomp.cubes.size(); ++i) {
    r.neighbor_violations += bad_neighbor[i];
    r.overlap_violations += bad_overlap[i];
  }
  r.residual = std::max(0.0, 1.0 - decomp.covered_volume() / domain.volume());
  return r;
}

int choose_N(int n) {
  if (n < 2) throw Error("choose_N: dimension must be >= 2");
  const double bound = std::log(static_cast<double>(n)) / std::log(6.0 / 5.0);
  int N = static_cast<int>(std::ceil(bound));
  if (N % 2) ++N;
  return N;
}

double norm_N(const Point& x, int dim, int N) {
  double m = 0.0;
  for (int a = 0; a < dim; ++a) m = std::max(m, std::abs(x[a]));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += std::pow(x[a] / m, N);
  return m * std::pow(s, 1.0 / N);
}

bool SmoothCube::contains(const Point& x, double rtol) const {
  return norm_N(x - center, dim, N) <= radius() * (1.0 + rtol);
}

SmoothCube smooth_cube(const WhitneyCube& cube, int dim, int N) {
  return SmoothCube{cube.center, 1.5 * cube.side, N, dim};
}

SmoothCube bridge_cube(const WhitneyCube& t, const WhitneyCube& tp, int dim, int N) {
  const double tol = 1e-9 * std::min(t.side, tp.side);
  int touching = 0;
  Point mid = Point::Zero();
  for (int a = 0; a < dim; ++a) {
    const double d = std::abs(t.center[a] - tp.center[a]);
    const double reach = 0.5 * (t.side + tp.side);
    const double lo = std::max(t.center[a] - 0.5 * t.side, tp.center[a] - 0.5 * tp.side);
    const double hi = std::min(t.center[a] + 0.5 * t.side, tp.center[a] + 0.5 * tp.side);
    if (std::abs(d - reach) <= tol) {
      ++touching;
    } else if (d > reach || hi - lo <= tol) {
      throw Error("bridge_cube: cubes are not face neighbors");
    }
    mid[a] = 0.5 * (lo + hi);
  }
  if (touching != 1) throw Error("bridge_cube: cubes are not face neighbors");
  SmoothCube b{mid, 0.25 * t.side, N, dim};
  for (const WhitneyCube* q : {&t, &tp}) {
    const double reach = norm_N(mid - q->center, dim, N) + b.radius();
    if (reach > 0.75 * q->side * (1.0 + 1e-12)) throw Error("bridge_cube: containment in the smoothened cubes fails");
  }
  return b;
}

std::vector<int> cells_in(const GridDomain& domain, const SmoothCube& region) {
  std::vector<int> out;
  const int n = domain.dim();
  Lattice lo{0, 0, 0}, hi{0, 0, 0};
  for (int a = 0; a < n; ++a) {
    lo[a] = std::max(0, static_cast<int>(std::floor((region.center[a] - region.radius() - domain.origin()[a]) / domain.h())));
    hi[a] = std::min(domain.extent()[a] - 1,
                     static_cast<int>(std::floor((region.center[a] + region.radius() - domain.origin()[a]) / domain.h())));
  }
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const int id = domain.cell_at({i, j, k});
        if (id >= 0 && region.contains(domain.center(static_cast<std::size_t>(id)))) out.push_back(id);
      }
  return out;
}

int max_overlap(const WhitneyDecomposition& decomp, const GridDomain& domain, int N) {
  std::vector<int> count(domain.size(), 0);
  for (const auto& q : decomp.cubes)
    for (int id : cells_in(domain, smooth_cube(q, decomp.dim, N))) ++count[static_cast<std::size_t>(id)];
  return count.empty() ? 0 : *std::max_element(count.begin(), count.end());
}

}  // namespace korn
