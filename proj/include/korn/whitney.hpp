#pragma once

#include <cmath>
#include <vector>

#include "korn/geometry.hpp"

namespace korn {

/// Dyadic cube. `index` is the lattice coordinate of the lower corner in
/// units of the cube's own side, relative to the decomposition origin.
struct WhitneyCube {
  int level = 0;  // side = 2^-level * L0
  Lattice index{0, 0, 0};
  double side = 0.0;
  Point center = Point::Zero();

  Point lo(int dim) const;
  Point hi(int dim) const;
  double diam(int dim) const { return side * std::sqrt(static_cast<double>(dim)); }
};

struct WhitneyDecomposition {
  int dim = 2;
  Point origin = Point::Zero();  // lower corner of the dyadic root
  double coarsest = 0.0;         // L0, side of the largest cube
  double min_side = 0.0;         // refinement floor used
  std::vector<WhitneyCube> cubes;
  std::vector<std::vector<int>> face_neighbors;
  std::vector<std::vector<int>> all_neighbors;
  double residual = 0.0;  // uncovered fraction of occupied volume

  std::size_t size() const { return cubes.size(); }
  double covered_volume() const;
};

struct WhitneyOptions {
  /// Refinement floor in cell sides: no cube smaller than min_cells * h.
  /// Values below one give sub-cell cubes.
  double min_cells = 2.0;
};

/// Top-down dyadic construction. A cube is accepted when it lies in the
/// domain and 3 diam(Q) <= dist(Q, boundary); otherwise it is split.
WhitneyDecomposition whitney_decompose(const GridDomain& domain, const WhitneyOptions& opt = {});

/// Recomputes both neighbor lists from cube geometry alone.
void compute_neighbors(WhitneyDecomposition& decomp);

struct WhitneyReport {
  int lower_violations = 0;     // 3 diam <= dist
  int upper_violations = 0;     // dist <= 8 diam
  int neighbor_violations = 0;  // touching cubes within a factor 2
  int overlap_violations = 0;   // pairs with intersecting interiors
  int outside_violations = 0;   // cubes not inside the domain
  double residual = 0.0;
  double min_ratio = 0.0;       // min over cubes of dist / diam
  double max_ratio = 0.0;
  bool ok() const {
    return lower_violations == 0 && upper_violations == 0 && neighbor_violations == 0 &&
           overlap_violations == 0 && outside_violations == 0;
  }
};

/// Independent check of the Whitney properties and of the covered volume.
WhitneyReport validate_whitney(const WhitneyDecomposition& decomp, const GridDomain& domain);

/// Smallest even N with ln(n)/ln(6/5) <= N.
int choose_N(int n);

/// l^N ball of radius r around a center; edge = 2r.
struct SmoothCube {
  Point center = Point::Zero();
  double edge = 0.0;
  int N = 4;
  int dim = 2;

  double radius() const { return 0.5 * edge; }
  bool contains(const Point& x, double rtol = 1e-12) const;
};

double norm_N(const Point& x, int dim, int N);

/// U_t: edge (3/2) l_t, centered at q_t.
SmoothCube smooth_cube(const WhitneyCube& cube, int dim, int N);

/// Bridge region between (n-1)-face neighbors: edge l_t / 4 centered at
/// the midpoint of the shared face. Throws when the cubes are not face
/// adjacent or when containment in U_t and U_tp fails.
SmoothCube bridge_cube(const WhitneyCube& t, const WhitneyCube& tp, int dim, int N);

/// Occupied cells whose centers lie in the region.
std::vector<int> cells_in(const GridDomain& domain, const SmoothCube& region);

/// Max number of smoothened cubes containing an occupied cell center.
int max_overlap(const WhitneyDecomposition& decomp, const GridDomain& domain, int N);

}  // namespace korn
