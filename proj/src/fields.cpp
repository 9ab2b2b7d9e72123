#include "korn/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <regex>

#include "korn/parallel.hpp"
#include "korn/random.hpp"

namespace korn {

namespace {
int g_threads = 1;
}

int num_threads() { return g_threads; }
void set_num_threads(int n) { g_threads = std::max(1, n); }

std::vector<std::pair<int, int>> skew_pairs(int n) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) out.push_back({i, j});
  return out;
}

Field constant_field(const GridDomain& d, const Point& c) {
  return sample_field(d, "constant", [&](const Point&) { return c; });
}

Field identity_field(const GridDomain& d) {
  return sample_field(d, "identity", [](const Point& x) { return x; });
}

Field skew_field(const GridDomain& d, int i, int j) {
  if (i < 0 || j <= i || j >= d.dim()) throw Error("skew_field: need 0 <= i < j < n");
  return sample_field(d, "skew(" + std::to_string(i) + "," + std::to_string(j) + ")", [&](const Point& x) {
    Point v = Point::Zero();
    v[i] = x[j];
    v[j] = -x[i];
    return v;
  });
}

Field rigid_field(const GridDomain& d, const Eigen::VectorXd& a, const Point& b) {
  const auto pairs = skew_pairs(d.dim());
  if (a.size() != static_cast<Eigen::Index>(pairs.size())) throw Error("rigid_field: coefficient count mismatch");
  return sample_field(d, "rigid", [&](const Point& x) {
    Point v = b;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto [i, j] = pairs[k];
      v[i] += a[static_cast<Eigen::Index>(k)] * x[j];
      v[j] -= a[static_cast<Eigen::Index>(k)] * x[i];
    }
    return v;
  });
}

namespace {

// Trapezoid: 0 below a, ramps to 1 on [a, b], 1 on [b, c], back to 0 at d.
double tent(double x, double a, double b, double c, double d) {
  return std::clamp(std::min((x - a) / (b - a), (d - x) / (d - c)), 0.0, 1.0);
}

}  // namespace

Field jump_slit_field(const GridDomain& d) {
  if (d.dim() != 2) throw Error("jump-slit field needs a 2D domain");
  return sample_field(d, "jump-slit", [](const Point& x) {
    if (x[1] < 0.0) return Point(Point::Zero());
    const double v = tent(x[0], 0.0, 0.25, 0.5, 0.75) * tent(x[1], -1.0, 0.0, 0.5, 0.75);
    return Point(v, v, 0.0);
  });
}

Field random_smooth_field(const GridDomain& d, std::uint64_t seed, double wavelength) {
  if (!(wavelength > 0.0)) throw Error("random-smooth: wavelength must be positive");
  const int n = d.dim();
  constexpr int kModes = 8;
  Rng rng(derive_seed(seed, 7));
  struct Mode {
    Point k;
    double phase;
    Point amp;
  };
  std::vector<Mode> modes;
  const double k0 = 2.0 * std::numbers::pi / wavelength;
  for (int m = 0; m < kModes; ++m) {
    Mode mode;
    Point dir = Point::Zero();
    for (int a = 0; a < n; ++a) dir[a] = rng.normal();
    dir /= std::max(dir.norm(), 1e-12);
    mode.k = dir * k0 * rng.uniform(0.75, 1.25);
    mode.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    mode.amp = Point::Zero();
    for (int a = 0; a < n; ++a) mode.amp[a] = rng.normal() / std::sqrt(static_cast<double>(kModes));
    modes.push_back(mode);
  }
  return sample_field(d, "random-smooth(" + std::to_string(seed) + "," + std::to_string(wavelength) + ")",
                      [&](const Point& x) {
                        Point v = Point::Zero();
                        for (const auto& m : modes) v += m.amp * std::sin(m.k.dot(x) + m.phase);
                        return v;
                      });
}

Field shear_field(const GridDomain& d) {
  return sample_field(d, "shear", [](const Point& x) { return Point(x[1], 0.0, 0.0); });
}

Field vortex_field(const GridDomain& d) {
  const Point c = d.barycenter();
  const int n = d.dim();
  return sample_field(d, "vortex", [&](const Point& x) {
    const Point r = x - c;
    const double g = std::exp(-r.squaredNorm() / (2.0 * 0.25 * 0.25));
    Point v = Point::Zero();
    v[0] = -r[1] * g;
    v[1] = r[0] * g;
    if (n == 3) v[2] = 0.0;
    return v;
  });
}

Field make_field(const GridDomain& d, const std::string& spec) {
  std::smatch m;
  if (spec == "constant") return constant_field(d, Point(1.0, -2.0, 0.5));
  if (spec == "identity") return identity_field(d);
  if (spec == "jump-slit") return jump_slit_field(d);
  if (spec == "shear") return shear_field(d);
  if (spec == "vortex") return vortex_field(d);
  if (std::regex_match(spec, m, std::regex(R"(skew\((\d+),\s*(\d+)\))")))
    return skew_field(d, std::stoi(m[1]), std::stoi(m[2]));
  if (spec == "random-smooth") return random_smooth_field(d, 1);
  if (std::regex_match(spec, m, std::regex(R"(random-smooth\((\d+)(?:,\s*([0-9.eE+-]+))?\))")))
    return random_smooth_field(d, std::stoull(m[1]), m[2].matched ? std::stod(m[2]) : 0.5);
  throw Error("unknown field generator: " + spec);
}

}  // namespace korn
