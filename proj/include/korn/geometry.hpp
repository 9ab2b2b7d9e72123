#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace korn {

/// Library-wide exception. Every module throws this for precondition and
/// input failures; run_report re-throws it tagged with the stage name.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

using Point = Eigen::Vector3d;  // 2D domains keep z = 0
using Lattice = std::array<int, 3>;

enum class DomainKind { UnitSquare, LShape, SlitSquare, KochPrefractal, Cube3d };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

struct DomainSpec {
  DomainKind kind = DomainKind::UnitSquare;
  int resolution = 32;  // cells per unit length
  int depth = 0;        // Koch prefractal depth only
};

/// An axis-aligned cell face that separates an occupied cell from the
/// complement of the domain (or from a cut such as the slit).
struct BoundaryFace {
  int cell = 0;  // occupied cell id
  int axis = 0;
  int side = 1;  // +1: face at center + h/2, -1: at center - h/2
};

/// Rasterized bounded open set. Occupancy is decided by cell-center
/// membership; delta is the exact distance from each occupied cell center
/// to the union of boundary faces.
class GridDomain {
public:
  GridDomain() = default;

  int dim() const { return dim_; }
  double h() const { return h_; }
  const Point& origin() const { return origin_; }
  const Lattice& extent() const { return extent_; }
  const DomainSpec& spec() const { return spec_; }

  std::size_t size() const { return cells_.size(); }
  std::size_t lattice_size() const {
    return static_cast<std::size_t>(extent_[0]) * extent_[1] * extent_[2];
  }

  const Lattice& cell(std::size_t id) const { return cells_[id]; }
  const std::vector<Lattice>& cells() const { return cells_; }
  std::span<const double> delta() const { return delta_; }
  double delta(std::size_t id) const { return delta_[id]; }
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_; }

  Point center(std::size_t id) const { return lattice_center(cells_[id]); }
  Point lattice_center(const Lattice& c) const;

  bool in_lattice(const Lattice& c) const;
  std::size_t lattice_index(const Lattice& c) const;
  /// Occupied cell id at lattice coordinate, or -1.
  int cell_at(const Lattice& c) const;
  bool occupied(const Lattice& c) const { return cell_at(c) >= 0; }

  /// True when the face between c and c + e_axis is cut (slit).
  bool face_cut(const Lattice& c, int axis) const;

  /// Occupied, uncut face neighbors of a cell.
  std::vector<int> face_neighbors(std::size_t id) const;

  /// Endpoints of the axis-aligned box spanned by a boundary face.
  std::pair<Point, Point> face_box(const BoundaryFace& f) const;

  double cell_volume() const;
  double volume() const { return cell_volume() * static_cast<double>(size()); }
  Point barycenter() const;
  /// Number of connected components of the occupied cells under uncut
  /// face adjacency.
  int component_count() const;
  /// Copy restricted to the largest connected component.
  GridDomain largest_component() const;

  /// Builds a domain from a membership predicate over cell centers plus an
  /// optional set of cut faces (lattice cell, axis) that block adjacency.
  template <class Member>
  static GridDomain from_predicate(int dim, double h, const Point& origin, const Lattice& extent,
                                   Member&& member, std::vector<std::pair<Lattice, int>> cuts = {});

  /// Reassembles a domain from serialized parts; recomputes boundary faces
  /// and delta when `delta` is empty.
  static GridDomain assemble(int dim, double h, const Point& origin, const Lattice& extent,
                             std::vector<std::uint8_t> occupancy, std::vector<std::uint8_t> cut_mask,
                             std::vector<double> delta, DomainSpec spec);

  const std::vector<std::uint8_t>& occupancy_mask() const { return occupancy_; }
  const std::vector<std::uint8_t>& cut_mask() const { return cut_mask_; }

  void set_spec(const DomainSpec& s) { spec_ = s; }

private:
  void index_cells();
  void collect_boundary();
  void compute_delta();

  int dim_ = 2;
  double h_ = 1.0;
  Point origin_ = Point::Zero();
  Lattice extent_{1, 1, 1};
  DomainSpec spec_;
  std::vector<std::uint8_t> occupancy_;  // per lattice cell
  std::vector<std::uint8_t> cut_mask_;   // bit a: face towards +e_a is cut
  std::vector<int> lattice_to_cell_;
  std::vector<Lattice> cells_;
  std::vector<double> delta_;
  std::vector<BoundaryFace> boundary_;
};

template <class Member>
GridDomain GridDomain::from_predicate(int dim, double h, const Point& origin, const Lattice& extent,
                                      Member&& member, std::vector<std::pair<Lattice, int>> cuts) {
  if (dim != 2 && dim != 3) throw Error("GridDomain: dimension must be 2 or 3");
  GridDomain d;
  d.dim_ = dim;
  d.h_ = h;
  d.origin_ = origin;
  d.extent_ = extent;
  if (dim == 2) d.extent_[2] = 1;
  d.occupancy_.assign(d.lattice_size(), 0);
  d.cut_mask_.assign(d.lattice_size(), 0);
  for (int k = 0; k < d.extent_[2]; ++k)
    for (int j = 0; j < d.extent_[1]; ++j)
      for (int i = 0; i < d.extent_[0]; ++i) {
        const Lattice c{i, j, k};
        d.occupancy_[d.lattice_index(c)] = member(d.lattice_center(c)) ? 1 : 0;
      }
  for (const auto& [c, axis] : cuts)
    if (d.in_lattice(c)) d.cut_mask_[d.lattice_index(c)] |= static_cast<std::uint8_t>(1u << axis);
  d.index_cells();
  d.collect_boundary();
  d.compute_delta();
  return d;
}

/// Bucketed index over the boundary faces of a domain. Distances are exact:
/// buckets are scanned in Chebyshev rings until the ring lower bound
/// exceeds the best candidate.
class FaceIndex {
public:
  explicit FaceIndex(const GridDomain& domain, int bucket = 8);

  /// Exact distance from the box [lo, hi] to the union of boundary faces.
  double distance(const Point& lo, const Point& hi) const;
  double distance(const Point& x) const { return distance(x, x); }

private:
  Lattice bucket_of(const Point& x) const;

  const GridDomain* domain_;
  int bucket_;
  Lattice nb_{};
  std::vector<std::vector<int>> buckets_;
  std::vector<std::pair<Point, Point>> boxes_;
};

/// Minimum distance from a point to an axis-aligned box [lo, hi].
double point_box_distance(const Point& x, const Point& lo, const Point& hi);
/// Minimum distance between two axis-aligned boxes.
double box_box_distance(const Point& alo, const Point& ahi, const Point& blo, const Point& bhi);

GridDomain build_domain(const DomainSpec& spec);

/// Vertices of the Koch snowflake prefractal over a unit equilateral
/// triangle, counter-clockwise.
std::vector<Eigen::Vector2d> koch_polygon(int depth);

struct PointCloud {
  std::vector<Point> points;
  int dim = 2;
};

/// Samples the discrete boundary: all boundary face midpoints thinned by a
/// greedy net so that kept points are at least spacing/2 apart.
PointCloud boundary_cloud(const GridDomain& domain, double spacing);

struct RadiusPair {
  double r = 0.0;
  double R = 0.0;
};

struct AssouadFit {
  double exponent = 0.0;  // least-squares slope
  double constant = 0.0;  // exp(intercept)
  std::vector<double> log_ratio;
  std::vector<double> log_count;
};

struct AssouadOptions {
  /// Centers for the supremum; all points when the cloud is smaller.
  std::size_t max_centers = 512;
};

/// Greedy (farthest-point) covering number of a point set by balls of
/// radius r; an upper bound on the minimal covering number.
std::size_t greedy_cover_count(std::span<const Point> pts, double r);

AssouadFit assouad_estimate(const PointCloud& cloud, std::span<const RadiusPair> pairs,
                            const AssouadOptions& opt = {});

/// Least-squares line fit y = a + b x; returns (a, b).
std::pair<double, double> least_squares_line(std::span<const double> x, std::span<const double> y);

}  // namespace korn
