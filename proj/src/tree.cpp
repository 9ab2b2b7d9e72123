#include "korn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace korn {

bool RootedTree::precedes(int u, int t) const {
  for (int v = t; v >= 0; v = parent[static_cast<std::size_t>(v)])
    if (v == u) return true;
  return false;
}

RootedTree RootedTree::from_parents(std::vector<int> parent, std::vector<int> level) {
  RootedTree tree;
  const std::size_t V = parent.size();
  if (V == 0) throw Error("RootedTree: empty");
  if (level.size() != V) throw Error("RootedTree: level count mismatch");
  tree.parent = std::move(parent);
  tree.level = std::move(level);
  tree.children.assign(V, {});
  int roots = 0;
  for (std::size_t v = 0; v < V; ++v) {
    const int p = tree.parent[v];
    if (p < 0) {
      tree.root = static_cast<int>(v);
      ++roots;
    } else {
      if (static_cast<std::size_t>(p) >= V) throw Error("RootedTree: parent out of range");
      tree.children[static_cast<std::size_t>(p)].push_back(static_cast<int>(v));
    }
  }
  if (roots != 1) throw Error("RootedTree: expected exactly one root");
  tree.depth.assign(V, -1);
  tree.order.clear();
  tree.order.reserve(V);
  tree.order.push_back(tree.root);
  tree.depth[static_cast<std::size_t>(tree.root)] = 0;
  for (std::size_t i = 0; i < tree.order.size(); ++i) {
    const int v = tree.order[i];
    for (int c : tree.children[static_cast<std::size_t>(v)]) {
      tree.depth[static_cast<std::size_t>(c)] = tree.depth[static_cast<std::size_t>(v)] + 1;
      tree.order.push_back(c);
    }
  }
  if (tree.order.size() != V) throw Error("RootedTree: parent map has a cycle");
  return tree;
}

TreeStrategy tree_strategy_from_string(const std::string& name) {
  if (name == "bfs") return TreeStrategy::Bfs;
  if (name == "dfs") return TreeStrategy::Dfs;
  throw Error("unknown tree strategy: " + name);
}

namespace {

bool lex_less(const Point& a, const Point& b) {
  for (int i = 0; i < 3; ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

int choose_root(const WhitneyDecomposition& decomp) {
  if (decomp.cubes.empty()) throw Error("choose_root: empty decomposition");
  const int n = decomp.dim;
  Point bary = Point::Zero();
  double vol = 0.0;
  double largest = 0.0;
  for (const auto& q : decomp.cubes) {
    const double v = std::pow(q.side, n);
    bary += v * q.center;
    vol += v;
    largest = std::max(largest, q.side);
  }
  bary /= vol;
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < decomp.cubes.size(); ++i) {
    const auto& q = decomp.cubes[i];
    if (q.side < largest) continue;
    const double d = (q.center - bary).squaredNorm();
    if (d < best_d || (d == best_d && lex_less(q.center, decomp.cubes[static_cast<std::size_t>(best)].center))) {
      best = static_cast<int>(i);
      best_d = d;
    }
  }
  return best;
}

RootedTree build_tree(const WhitneyDecomposition& decomp, TreeStrategy strategy) {
  const std::size_t V = decomp.cubes.size();
  if (V == 0) throw Error("build_tree: empty decomposition");
  if (decomp.face_neighbors.size() != V) throw Error("build_tree: missing neighbor lists");
  const auto& cubes = decomp.cubes;
  const auto by_center = [&](int a, int b) {
    return lex_less(cubes[static_cast<std::size_t>(a)].center, cubes[static_cast<std::size_t>(b)].center);
  };

  const int root = choose_root(decomp);
  std::vector<int> parent(V, -2);
  parent[static_cast<std::size_t>(root)] = -1;
  std::size_t reached = 1;

  if (strategy == TreeStrategy::Bfs) {
    std::vector<int> layer{root};
    std::vector<char> in_layer(V, 0);
    while (!layer.empty()) {
      for (int v : layer) in_layer[static_cast<std::size_t>(v)] = 1;
      std::vector<int> next;
      for (int v : layer)
        for (int w : decomp.face_neighbors[static_cast<std::size_t>(v)])
          if (parent[static_cast<std::size_t>(w)] == -2) {
            parent[static_cast<std::size_t>(w)] = -3;  // claimed for this layer
            next.push_back(w);
          }
      std::sort(next.begin(), next.end(), by_center);
      for (int w : next) {
        int best = -1;
        for (int v : decomp.face_neighbors[static_cast<std::size_t>(w)]) {
          if (!in_layer[static_cast<std::size_t>(v)]) continue;
          if (best < 0) {
            best = v;
            continue;
          }
          const double sv = cubes[static_cast<std::size_t>(v)].side, sb = cubes[static_cast<std::size_t>(best)].side;
          if (sv > sb || (sv == sb && by_center(v, best))) best = v;
        }
        parent[static_cast<std::size_t>(w)] = best;
      }
      for (int v : layer) in_layer[static_cast<std::size_t>(v)] = 0;
      reached += next.size();
      layer = std::move(next);
    }
  } else {
    std::vector<std::vector<int>> sorted(V);
    for (std::size_t v = 0; v < V; ++v) {
      sorted[v] = decomp.face_neighbors[v];
      std::sort(sorted[v].begin(), sorted[v].end(), by_center);
    }
    std::vector<std::pair<int, std::size_t>> stack{{root, 0}};
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      const auto& nb = sorted[static_cast<std::size_t>(v)];
      while (next < nb.size() && parent[static_cast<std::size_t>(nb[next])] != -2) ++next;
      if (next == nb.size()) {
        stack.pop_back();
        continue;
      }
      const int w = nb[next++];
      parent[static_cast<std::size_t>(w)] = v;
      ++reached;
      stack.push_back({w, 0});
    }
  }
  if (reached != V) throw Error("build_tree: face-neighbor graph is disconnected");

  std::vector<int> level(V);
  for (std::size_t v = 0; v < V; ++v) level[v] = cubes[v].level;
  return RootedTree::from_parents(std::move(parent), std::move(level));
}

JohnConstant john_constant(const RootedTree& tree, const WhitneyDecomposition& decomp) {
  const int n = decomp.dim;
  const std::size_t V = tree.size();
  std::vector<Point> lo(V), hi(V);
  for (std::size_t v = 0; v < V; ++v) {
    lo[v] = decomp.cubes[v].lo(n);
    hi[v] = decomp.cubes[v].hi(n);
  }
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    const int p = tree.parent[v];
    if (p < 0) continue;
    lo[static_cast<std::size_t>(p)] = lo[static_cast<std::size_t>(p)].cwiseMin(lo[v]);
    hi[static_cast<std::size_t>(p)] = hi[static_cast<std::size_t>(p)].cwiseMax(hi[v]);
  }
  JohnConstant out;
  out.per_node.resize(V);
  out.K = 0.0;
  for (std::size_t v = 0; v < V; ++v) {
    const auto& q = decomp.cubes[v];
    double reach = 0.0;
    for (int a = 0; a < n; ++a) reach = std::max({reach, hi[v][a] - q.center[a], q.center[a] - lo[v][a]});
    const double K = std::max(1.0, 2.0 * reach / q.side);
    out.per_node[v] = K;
    if (K > out.K) {
      out.K = K;
      out.argmax = static_cast<int>(v);
    }
  }
  return out;
}

ShadowStats shadow_stats(const RootedTree& tree, const WhitneyDecomposition& decomp) {
  const std::size_t V = tree.size();
  const int n = decomp.dim;
  ShadowStats s;
  for (int l : tree.level) s.levels = std::max(s.levels, l + 1);
  const auto L = static_cast<std::size_t>(s.levels);
  s.K = john_constant(tree, decomp).per_node;
  s.W.assign(V, std::vector<int>(L, 0));
  s.P.assign(V, std::vector<int>(L, 0));
  s.shadow_volume.assign(V, 0.0);

  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    ++s.W[v][static_cast<std::size_t>(tree.level[v])];
    s.shadow_volume[v] += std::pow(decomp.cubes[v].side, n);
    const int p = tree.parent[v];
    if (p < 0) continue;
    auto& wp = s.W[static_cast<std::size_t>(p)];
    for (std::size_t i = 0; i < L; ++i) wp[i] += s.W[v][i];
    s.shadow_volume[static_cast<std::size_t>(p)] += s.shadow_volume[v];
  }

  // shadows: finest-to-coarsest spread below each node
  std::vector<int> shadow_min(tree.level);
  for (auto it = tree.order.rbegin(); it != tree.order.rend(); ++it) {
    const auto v = static_cast<std::size_t>(*it);
    s.M = std::max(s.M, tree.level[v] - shadow_min[v]);
    const int p = tree.parent[v];
    if (p >= 0) shadow_min[static_cast<std::size_t>(p)] = std::min(shadow_min[static_cast<std::size_t>(p)], shadow_min[v]);
  }

  std::vector<int> path_max(V, 0);
  for (int t : tree.order) {
    const auto v = static_cast<std::size_t>(t);
    const int p = tree.parent[v];
    if (p >= 0) {
      s.P[v] = s.P[static_cast<std::size_t>(p)];
      path_max[v] = path_max[static_cast<std::size_t>(p)];
    }
    ++s.P[v][static_cast<std::size_t>(tree.level[v])];
    path_max[v] = std::max(path_max[v], tree.level[v]);
    s.M = std::max(s.M, path_max[v] - tree.level[v]);
  }
  return s;
}

}  // namespace korn
