#include "korn/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace korn {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::UnitSquare: return "unit-square";
    case DomainKind::LShape: return "L-shape";
    case DomainKind::SlitSquare: return "slit-square";
    case DomainKind::KochPrefractal: return "koch-prefractal";
    case DomainKind::Cube3d: return "cube-3d";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "unit-square") return DomainKind::UnitSquare;
  if (name == "L-shape" || name == "l-shape") return DomainKind::LShape;
  if (name == "slit-square") return DomainKind::SlitSquare;
  if (name == "koch-prefractal" || name == "koch") return DomainKind::KochPrefractal;
  if (name == "cube-3d") return DomainKind::Cube3d;
  throw Error("unknown domain kind: " + name);
}

Point GridDomain::lattice_center(const Lattice& c) const {
  Point x;
  for (int a = 0; a < 3; ++a) x[a] = origin_[a] + (c[a] + 0.5) * h_;
  if (dim_ == 2) x[2] = 0.0;
  return x;
}

bool GridDomain::in_lattice(const Lattice& c) const {
  for (int a = 0; a < 3; ++a)
    if (c[a] < 0 || c[a] >= extent_[a]) return false;
  return true;
}

std::size_t GridDomain::lattice_index(const Lattice& c) const {
  return (static_cast<std::size_t>(c[2]) * extent_[1] + c[1]) * extent_[0] + c[0];
}

int GridDomain::cell_at(const Lattice& c) const {
  if (!in_lattice(c)) return -1;
  return lattice_to_cell_[lattice_index(c)];
}

bool GridDomain::face_cut(const Lattice& c, int axis) const {
  return in_lattice(c) && (cut_mask_[lattice_index(c)] >> axis & 1u);
}

std::vector<int> GridDomain::face_neighbors(std::size_t id) const {
  std::vector<int> out;
  const Lattice& c = cells_[id];
  for (int a = 0; a < dim_; ++a) {
    Lattice up = c, dn = c;
    ++up[a];
    --dn[a];
    if (int j = cell_at(up); j >= 0 && !face_cut(c, a)) out.push_back(j);
    if (int j = cell_at(dn); j >= 0 && !face_cut(dn, a)) out.push_back(j);
  }
  return out;
}

std::pair<Point, Point> GridDomain::face_box(const BoundaryFace& f) const {
  const Point x = center(static_cast<std::size_t>(f.cell));
  Point lo = x, hi = x;
  for (int a = 0; a < dim_; ++a) {
    if (a == f.axis) {
      lo[a] = hi[a] = x[a] + 0.5 * h_ * f.side;
    } else {
      lo[a] = x[a] - 0.5 * h_;
      hi[a] = x[a] + 0.5 * h_;
    }
  }
  return {lo, hi};
}

double GridDomain::cell_volume() const { return std::pow(h_, dim_); }

Point GridDomain::barycenter() const {
  Point s = Point::Zero();
  for (std::size_t i = 0; i < size(); ++i) s += center(i);
  return size() ? Point(s / static_cast<double>(size())) : s;
}

int GridDomain::component_count() const {
  std::vector<int> label(size(), -1);
  int count = 0;
  for (std::size_t s = 0; s < size(); ++s) {
    if (label[s] >= 0) continue;
    std::deque<int> queue{static_cast<int>(s)};
    label[s] = count;
    while (!queue.empty()) {
      const int i = queue.front();
      queue.pop_front();
      for (int j : face_neighbors(static_cast<std::size_t>(i)))
        if (label[j] < 0) {
          label[j] = count;
          queue.push_back(j);
        }
    }
    ++count;
  }
  return count;
}

GridDomain GridDomain::largest_component() const {
  std::vector<int> label(size(), -1);
  std::vector<std::size_t> sizes;
  for (std::size_t s = 0; s < size(); ++s) {
    if (label[s] >= 0) continue;
    const int l = static_cast<int>(sizes.size());
    sizes.push_back(0);
    std::deque<int> queue{static_cast<int>(s)};
    label[s] = l;
    while (!queue.empty()) {
      const int i = queue.front();
      queue.pop_front();
      ++sizes[static_cast<std::size_t>(l)];
      for (int j : face_neighbors(static_cast<std::size_t>(i)))
        if (label[j] < 0) {
          label[j] = l;
          queue.push_back(j);
        }
    }
  }
  if (sizes.size() <= 1) return *this;
  const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<std::uint8_t> occ(lattice_size(), 0);
  for (std::size_t i = 0; i < size(); ++i)
    if (label[i] == keep) occ[lattice_index(cells_[i])] = 1;
  return assemble(dim_, h_, origin_, extent_, std::move(occ), cut_mask_, {}, spec_);
}

void GridDomain::index_cells() {
  lattice_to_cell_.assign(lattice_size(), -1);
  cells_.clear();
  for (int k = 0; k < extent_[2]; ++k)
    for (int j = 0; j < extent_[1]; ++j)
      for (int i = 0; i < extent_[0]; ++i) {
        const Lattice c{i, j, k};
        const std::size_t li = lattice_index(c);
        if (occupancy_[li]) {
          lattice_to_cell_[li] = static_cast<int>(cells_.size());
          cells_.push_back(c);
        }
      }
}

void GridDomain::collect_boundary() {
  boundary_.clear();
  for (std::size_t id = 0; id < cells_.size(); ++id) {
    const Lattice& c = cells_[id];
    for (int a = 0; a < dim_; ++a) {
      Lattice up = c, dn = c;
      ++up[a];
      --dn[a];
      if (!occupied(dn) || face_cut(dn, a)) boundary_.push_back({static_cast<int>(id), a, -1});
      if (!occupied(up) || face_cut(c, a)) boundary_.push_back({static_cast<int>(id), a, +1});
    }
  }
}

double point_box_distance(const Point& x, const Point& lo, const Point& hi) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double g = std::max({lo[a] - x[a], 0.0, x[a] - hi[a]});
    s += g * g;
  }
  return std::sqrt(s);
}

double box_box_distance(const Point& alo, const Point& ahi, const Point& blo, const Point& bhi) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double g = std::max({blo[a] - ahi[a], 0.0, alo[a] - bhi[a]});
    s += g * g;
  }
  return std::sqrt(s);
}

FaceIndex::FaceIndex(const GridDomain& domain, int bucket) : domain_(&domain), bucket_(bucket) {
  const auto& ext = domain.extent();
  for (int a = 0; a < 3; ++a) nb_[a] = (ext[a] + bucket_ - 1) / bucket_;
  buckets_.resize(static_cast<std::size_t>(nb_[0]) * nb_[1] * nb_[2]);
  const auto& faces = domain.boundary_faces();
  boxes_.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Lattice& c = domain.cell(static_cast<std::size_t>(faces[f].cell));
    const Lattice b{c[0] / bucket_, c[1] / bucket_, c[2] / bucket_};
    buckets_[(static_cast<std::size_t>(b[2]) * nb_[1] + b[1]) * nb_[0] + b[0]].push_back(static_cast<int>(f));
    boxes_[f] = domain.face_box(faces[f]);
  }
}

Lattice FaceIndex::bucket_of(const Point& x) const {
  Lattice b{};
  for (int a = 0; a < 3; ++a) {
    const int c = static_cast<int>(std::floor((x[a] - domain_->origin()[a]) / domain_->h()));
    b[a] = std::clamp(c < 0 ? -1 : c / bucket_, 0, nb_[a] - 1);
  }
  return b;
}

// A face stored in a bucket at Chebyshev distance r >= 1 from the bucket
// range of the box is at least (r - 1) * bucket * h away from the box.
double FaceIndex::distance(const Point& lo, const Point& hi) const {
  if (boxes_.empty()) return std::numeric_limits<double>::infinity();
  const Lattice blo = bucket_of(lo), bhi = bucket_of(hi);
  const int max_ring = std::max({nb_[0], nb_[1], nb_[2]});
  const double unit = bucket_ * domain_->h();
  double best = std::numeric_limits<double>::infinity();
  for (int ring = 0; ring <= max_ring; ++ring) {
    if (ring > 0 && best <= (ring - 1) * unit) break;
    Lattice from{}, to{};
    for (int a = 0; a < 3; ++a) {
      from[a] = std::max(blo[a] - ring, 0);
      to[a] = std::min(bhi[a] + ring, nb_[a] - 1);
    }
    for (int z = from[2]; z <= to[2]; ++z)
      for (int y = from[1]; y <= to[1]; ++y)
        for (int x = from[0]; x <= to[0]; ++x) {
          const int gap = std::max({blo[0] - x, x - bhi[0], blo[1] - y, y - bhi[1], blo[2] - z, z - bhi[2], 0});
          if (gap != ring) continue;
          const auto& bucket = buckets_[(static_cast<std::size_t>(z) * nb_[1] + y) * nb_[0] + x];
          if (bucket.empty()) continue;
          const Point corner = domain_->origin() + Point(x, y, z) * unit;
          if (box_box_distance(lo, hi, corner, corner + Point::Constant(unit)) >= best) continue;
          for (int f : bucket)
            best = std::min(best, box_box_distance(lo, hi, boxes_[static_cast<std::size_t>(f)].first,
                                                   boxes_[static_cast<std::size_t>(f)].second));
        }
  }
  return best;
}

void GridDomain::compute_delta() {
  delta_.assign(cells_.size(), 0.0);
  if (cells_.empty()) return;
  if (boundary_.empty()) throw Error("GridDomain: occupied cells without boundary");
  const FaceIndex index(*this);
  for (std::size_t id = 0; id < cells_.size(); ++id) delta_[id] = index.distance(center(id));
}

GridDomain GridDomain::assemble(int dim, double h, const Point& origin, const Lattice& extent,
                                std::vector<std::uint8_t> occupancy, std::vector<std::uint8_t> cut_mask,
                                std::vector<double> delta, DomainSpec spec) {
  GridDomain d;
  d.dim_ = dim;
  d.h_ = h;
  d.origin_ = origin;
  d.extent_ = extent;
  d.spec_ = spec;
  if (occupancy.size() != d.lattice_size() || cut_mask.size() != d.lattice_size())
    throw Error("GridDomain: inconsistent lattice data");
  d.occupancy_ = std::move(occupancy);
  d.cut_mask_ = std::move(cut_mask);
  d.index_cells();
  d.collect_boundary();
  if (delta.empty()) {
    d.compute_delta();
  } else {
    if (delta.size() != d.cells_.size()) throw Error("GridDomain: delta count mismatch");
    d.delta_ = std::move(delta);
  }
  return d;
}

std::vector<Eigen::Vector2d> koch_polygon(int depth) {
  const double s3 = std::sqrt(3.0);
  std::vector<Eigen::Vector2d> poly{{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.5 * s3}};
  for (int d = 0; d < depth; ++d) {
    std::vector<Eigen::Vector2d> next;
    next.reserve(poly.size() * 4);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Eigen::Vector2d a = poly[i];
      const Eigen::Vector2d b = poly[(i + 1) % poly.size()];
      const Eigen::Vector2d e = b - a;
      const Eigen::Vector2d outward(e.y(), -e.x());  // right of a CCW edge
      next.push_back(a);
      next.push_back(a + e / 3.0);
      next.push_back(a + 0.5 * e + outward * (s3 / 6.0));
      next.push_back(a + 2.0 * e / 3.0);
    }
    poly = std::move(next);
  }
  return poly;
}

namespace {

bool point_in_polygon(const std::vector<Eigen::Vector2d>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a.y() > y) != (b.y() > y)) {
      const double xc = a.x() + (y - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x < xc) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d e = b - a;
  const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * e)).norm();
}

}  // namespace

GridDomain build_domain(const DomainSpec& spec) {
  if (spec.resolution < 8) throw Error("build_domain: resolution must be >= 8");
  const int r = spec.resolution;
  const double h = 1.0 / r;
  GridDomain d;
  switch (spec.kind) {
    case DomainKind::UnitSquare:
      d = GridDomain::from_predicate(2, h, Point::Zero(), {r, r, 1}, [](const Point&) { return true; });
      break;
    case DomainKind::LShape:
      d = GridDomain::from_predicate(2, h, Point::Zero(), {r, r, 1},
                                     [](const Point& x) { return !(x[0] > 0.5 && x[1] < 0.5); });
      break;
    case DomainKind::SlitSquare: {
      // [-1,1]^2 minus the segment {(x,0): 0 <= x <= 1}; y = 0 lies on a
      // lattice plane, so the slit is a set of cut faces.
      const Eigen::Vector2d sa(0.0, 0.0), sb(1.0, 0.0);
      std::vector<std::pair<Lattice, int>> cuts;
      for (int i = 0; i < 2 * r; ++i) {
        const double xc = -1.0 + (i + 0.5) * h;
        if (xc > 0.0 && xc < 1.0) cuts.push_back({Lattice{i, r - 1, 0}, 1});
      }
      if (cuts.size() < 2) throw Error("build_domain: resolution too small to resolve the slit");
      d = GridDomain::from_predicate(
          2, h, Point(-1.0, -1.0, 0.0), {2 * r, 2 * r, 1},
          [&](const Point& x) {
            return point_segment_distance(Eigen::Vector2d(x[0], x[1]), sa, sb) >= 0.5 * h * (1.0 - 1e-9);
          },
          std::move(cuts));
      if (d.component_count() != 1) throw Error("build_domain: slit not resolved at this resolution");
      break;
    }
    case DomainKind::KochPrefractal: {
      if (spec.depth < 0 || spec.depth > 6) throw Error("build_domain: koch depth must be in [0, 6]");
      const auto poly = koch_polygon(spec.depth);
      Eigen::Vector2d lo = poly.front(), hi = poly.front();
      for (const auto& v : poly) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
      }
      const Point origin(std::floor(lo.x() / h) * h - h, std::floor(lo.y() / h) * h - h, 0.0);
      const int nx = static_cast<int>(std::ceil((hi.x() - origin[0]) / h)) + 1;
      const int ny = static_cast<int>(std::ceil((hi.y() - origin[1]) / h)) + 1;
      d = GridDomain::from_predicate(2, h, origin, {nx, ny, 1},
                                     [&](const Point& x) { return point_in_polygon(poly, x[0], x[1]); })
              .largest_component();
      break;
    }
    case DomainKind::Cube3d:
      d = GridDomain::from_predicate(3, h, Point::Zero(), {r, r, r}, [](const Point&) { return true; });
      break;
  }
  if (d.size() == 0) throw Error("build_domain: empty domain");
  d.set_spec(spec);
  return d;
}

}  // namespace korn
