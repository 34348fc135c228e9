#pragma once

#include <span>
#include <vector>

#include "abdiv/factor.hpp"
#include "abdiv/graph.hpp"

namespace abdiv {

/// Directed tree edge; the separator is the intersection of the two cliques.
struct ForestEdge {
  int parent = -1;
  int child = -1;
  std::vector<int> separator;
};

struct CliqueTree {
  /// Clique ids in this tree, ascending. The root is the smallest.
  std::vector<int> cliques;
  int root = -1;
  /// Edges in breadth-first order from the root.
  std::vector<ForestEdge> edges;
};

/// One clique tree per connected component of a chordal graph. Trees are
/// ordered by their smallest clique id.
class JunctionForest {
 public:
  JunctionForest() = default;
  JunctionForest(CliqueSet cliques, std::vector<CliqueTree> trees);

  const CliqueSet& cliques() const noexcept { return cliques_; }
  const std::vector<CliqueTree>& trees() const noexcept { return trees_; }
  int num_cliques() const noexcept { return static_cast<int>(cliques_.size()); }
  int num_trees() const noexcept { return static_cast<int>(trees_.size()); }

  int tree_of(int clique) const { return tree_of_.at(clique); }
  /// -1 for roots.
  int parent_of(int clique) const { return parent_.at(clique); }
  /// Separator shared with the parent; empty for roots.
  const std::vector<int>& parent_separator(int clique) const { return parent_sep_.at(clique); }
  const std::vector<int>& children_of(int clique) const { return children_.at(clique); }

 private:
  CliqueSet cliques_;
  std::vector<CliqueTree> trees_;
  std::vector<int> tree_of_;
  std::vector<int> parent_;
  std::vector<std::vector<int>> parent_sep_;
  std::vector<std::vector<int>> children_;
};

/// Maximum-weight spanning forest of the clique intersection graph, weight
/// |C_i ∩ C_j|, ties broken by the smaller (i, j) pair. Throws NonChordalInput.
JunctionForest build_forest(const UndirectedGraph& chordal);

/// Same construction from an explicit clique list (must be the maximal
/// cliques of a chordal graph, sorted lexicographically).
JunctionForest build_forest_from_cliques(CliqueSet cliques);

/// For every variable, the cliques containing it form a connected subtree.
bool has_running_intersection(const JunctionForest& forest);

template <typename T>
struct BasicAssignedFactor {
  BasicFactor<T> factor;
  int clique = -1;
};
using AssignedFactor = BasicAssignedFactor<double>;

/// Calibrated beliefs: beliefs[c] is, for clique c, the sum over every other
/// variable of its tree of the product of that tree's factors.
template <typename T>
struct BasicCalibration {
  std::vector<BasicFactor<T>> beliefs;
  /// Total of any belief in tree i.
  std::vector<T> tree_totals;
};
using Calibration = BasicCalibration<double>;

/// Two-pass division-free sum-product (collect to root, distribute from
/// root). Unassigned cliques start from all-ones. Throws ScopeNotContained.
/// Instantiated for double and Quad.
template <typename T>
BasicCalibration<T> calibrate(const JunctionForest& forest, std::span<const int> cardinalities,
                              const std::vector<BasicAssignedFactor<T>>& factors);

double belief_total(const Calibration& calibration, int tree);

}  // namespace abdiv
