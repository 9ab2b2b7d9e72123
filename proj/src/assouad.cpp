#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "korn/geometry.hpp"

namespace korn {

namespace {

struct HashGrid {
  double cell;
  std::unordered_map<long long, std::vector<int>> bins;

  static long long key(long long i, long long j, long long k) {
    return (i * 73856093LL) ^ (j * 19349663LL) ^ (k * 83492791LL);
  }
  std::array<long long, 3> coords(const Point& p) const {
    return {static_cast<long long>(std::floor(p[0] / cell)), static_cast<long long>(std::floor(p[1] / cell)),
            static_cast<long long>(std::floor(p[2] / cell))};
  }
  void insert(const Point& p, int id) {
    const auto c = coords(p);
    bins[key(c[0], c[1], c[2])].push_back(id);
  }
  template <class F>
  void visit_near(const Point& p, F&& f) const {
    const auto c = coords(p);
    for (long long dk = -1; dk <= 1; ++dk)
      for (long long dj = -1; dj <= 1; ++dj)
        for (long long di = -1; di <= 1; ++di) {
          const auto it = bins.find(key(c[0] + di, c[1] + dj, c[2] + dk));
          if (it == bins.end()) continue;
          for (int id : it->second) f(id);
        }
  }
};

}  // namespace

PointCloud boundary_cloud(const GridDomain& domain, double spacing) {
  if (!(spacing >= domain.h() * (1.0 - 1e-12))) throw Error("boundary_cloud: spacing must be >= h");
  const auto& faces = domain.boundary_faces();
  if (faces.empty()) throw Error("boundary_cloud: empty boundary (corrupt occupancy)");
  const double net = 0.5 * spacing;
  HashGrid grid{net, {}};
  PointCloud cloud;
  cloud.dim = domain.dim();
  for (const auto& f : faces) {
    const auto [lo, hi] = domain.face_box(f);
    const Point mid = 0.5 * (lo + hi);
    bool close = false;
    grid.visit_near(mid, [&](int id) {
      if ((cloud.points[static_cast<std::size_t>(id)] - mid).norm() < net) close = true;
    });
    if (close) continue;
    grid.insert(mid, static_cast<int>(cloud.points.size()));
    cloud.points.push_back(mid);
  }
  return cloud;
}

std::size_t greedy_cover_count(std::span<const Point> pts, double r) {
  if (pts.empty()) return 0;
  std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  std::size_t count = 0;
  for (;;) {
    ++count;
    const Point c = pts[next];
    double far = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      dist[i] = std::min(dist[i], (pts[i] - c).norm());
      if (dist[i] > far) {
        far = dist[i];
        next = i;
      }
    }
    if (far < r) break;
  }
  return count;
}

std::pair<double, double> least_squares_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error("least_squares_line: degenerate abscissae");
  const double b = sxy / sxx;
  return {my - b * mx, b};
}

AssouadFit assouad_estimate(const PointCloud& cloud, std::span<const RadiusPair> pairs, const AssouadOptions& opt) {
  if (cloud.points.empty()) throw Error("assouad_estimate: empty cloud");
  if (pairs.size() < 3) throw Error("assouad_estimate: need at least 3 radius pairs");
  for (const auto& rp : pairs)
    if (!(rp.r > 0.0) || rp.R / rp.r < 4.0) throw Error("assouad_estimate: each pair needs r > 0 and R/r >= 4");

  // Centers for the supremum: a farthest-point subsample keeps them spread.
  const auto& pts = cloud.points;
  std::vector<std::size_t> centers;
  if (pts.size() <= opt.max_centers) {
    centers.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) centers[i] = i;
  } else {
    std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
    std::size_t next = 0;
    while (centers.size() < opt.max_centers) {
      centers.push_back(next);
      double far = -1.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        dist[i] = std::min(dist[i], (pts[i] - pts[centers.back()]).norm());
        if (dist[i] > far) {
          far = dist[i];
          next = i;
        }
      }
    }
  }

  AssouadFit fit;
  std::vector<Point> ball;
  for (const auto& rp : pairs) {
    std::size_t sup = 0;
    for (std::size_t c : centers) {
      ball.clear();
      for (const auto& p : pts)
        if ((p - pts[c]).norm() < rp.R) ball.push_back(p);
      sup = std::max(sup, greedy_cover_count(ball, rp.r));
    }
    fit.log_ratio.push_back(std::log(rp.R / rp.r));
    fit.log_count.push_back(std::log(static_cast<double>(sup)));
  }
  const auto [lo, hi] = std::minmax_element(fit.log_ratio.begin(), fit.log_ratio.end());
  if (*hi - *lo < 1e-12) throw Error("assouad_estimate: degenerate fit (all ratios equal)");
  const auto [a, b] = least_squares_line(fit.log_ratio, fit.log_count);
  fit.exponent = b;
  fit.constant = std::exp(a);
  return fit;
}

}  // namespace korn
