#pragma once

#include <string>
#include <vector>

#include "korn/whitney.hpp"

namespace korn {

/// Rooted spanning tree over cube ids. `order` lists nodes so that every
/// parent precedes its children.
struct RootedTree {
  int root = 0;
  std::vector<int> parent;  // -1 at the root
  std::vector<int> depth;
  std::vector<int> level;   // cube level, 2^-level * L0 = side
  std::vector<std::vector<int>> children;
  std::vector<int> order;

  std::size_t size() const { return parent.size(); }
  /// u precedes-or-equals t: u lies on the root path of t.
  bool precedes(int u, int t) const;

  /// Fills children, depth and order from parent; validates acyclicity.
  static RootedTree from_parents(std::vector<int> parent, std::vector<int> level);
};

enum class TreeStrategy { Bfs, Dfs };

TreeStrategy tree_strategy_from_string(const std::string& name);

/// Spanning tree over the face-neighbor graph. Bfs grows layers from the
/// root and hangs each new cube on its largest previous-layer neighbor
/// (ties by lexicographic center); Dfs is a lexicographic depth-first
/// traversal kept as a poor reference tree.
RootedTree build_tree(const WhitneyDecomposition& decomp, TreeStrategy strategy = TreeStrategy::Bfs);

/// Largest cube, ties by the center closest to the barycenter of the cubes.
int choose_root(const WhitneyDecomposition& decomp);

struct JohnConstant {
  double K = 1.0;
  int argmax = 0;
  std::vector<double> per_node;  // K_t
};

/// K_t = smallest factor with Q_u inside K Q_t for every u in the shadow of t.
JohnConstant john_constant(const RootedTree& tree, const WhitneyDecomposition& decomp);

struct ShadowStats {
  int levels = 0;
  std::vector<double> K;                  // K_t
  std::vector<std::vector<int>> W;        // W[t][i]: shadow cubes at level i
  std::vector<std::vector<int>> P;        // P[t][i]: root-path cubes at level i
  std::vector<double> shadow_volume;
  int M = 0;  // level spread along root paths and inside shadows
};

ShadowStats shadow_stats(const RootedTree& tree, const WhitneyDecomposition& decomp);

}  // namespace korn
