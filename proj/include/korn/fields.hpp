#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "korn/geometry.hpp"

namespace korn {

/// Vector field sampled at occupied cell centers: one row per cell, one
/// column per spatial component.
template <class Scalar>
struct DiscreteField {
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const GridDomain* domain = nullptr;
  Values values;
  std::string label;

  DiscreteField() = default;
  DiscreteField(const GridDomain& d, std::string name = {})
      : domain(&d), values(Values::Zero(static_cast<Eigen::Index>(d.size()), d.dim())), label(std::move(name)) {}

  int dim() const { return static_cast<int>(values.cols()); }
  Eigen::Index size() const { return values.rows(); }

  void check() const {
    if (!domain) throw Error("field without domain");
    if (values.rows() != static_cast<Eigen::Index>(domain->size()) || values.cols() != domain->dim())
      throw Error("field '" + label + "': value count does not match the domain");
    if (!values.allFinite()) throw Error("field '" + label + "': non-finite entries");
  }
};

using Field = DiscreteField<double>;

/// Samples f(x) -> Eigen::Vector3d at each cell center.
template <class F>
Field sample_field(const GridDomain& d, const std::string& label, F&& f) {
  Field u(d, label);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point v = f(d.center(i));
    for (int a = 0; a < d.dim(); ++a) u.values(static_cast<Eigen::Index>(i), a) = v[a];
  }
  return u;
}

Field constant_field(const GridDomain& d, const Point& c);
Field identity_field(const GridDomain& d);
/// I_ij x = x_j e_i - x_i e_j.
Field skew_field(const GridDomain& d, int i, int j);
/// A x + b with A skew (coefficients in skew_pairs order).
Field rigid_field(const GridDomain& d, const Eigen::VectorXd& a, const Point& b);
/// (1,1) above the slit and 0 below near x in [1/4, 1/2], Lipschitz away
/// from the slit.
Field jump_slit_field(const GridDomain& d);
/// Sum of random Fourier modes with wavenumbers near 2 pi / wavelength.
Field random_smooth_field(const GridDomain& d, std::uint64_t seed, double wavelength = 0.5);
/// (x_2, 0): simple shear.
Field shear_field(const GridDomain& d);
/// Rotation damped by a Gaussian around the domain barycenter.
Field vortex_field(const GridDomain& d);

/// Generator by name: constant, identity, skew(i,j), jump-slit,
/// random-smooth(seed,wavelength), shear, vortex.
Field make_field(const GridDomain& d, const std::string& spec);

/// Index pairs (i < j) in the order used for skew coefficients.
std::vector<std::pair<int, int>> skew_pairs(int n);

}  // namespace korn
