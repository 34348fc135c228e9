#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "abdiv/factor.hpp"
#include "abdiv/graph.hpp"
#include "abdiv/junction_tree.hpp"

namespace abdiv {

/// Complete observations, one row per sample, one column per variable id.
using DataMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kMarginalTolerance = 1e-9;

/// Decomposable model: a chordal graph with calibrated clique and separator
/// marginals. P(x) = prod_C P_C(x_C) / prod_S P_S(x_S).
class DecomposableModel {
 public:
  DecomposableModel() = default;

  /// Validates chordality, normalization and marginal consistency (within
  /// `tolerance` per cell). `clique_marginals` may come in any order but must
  /// cover exactly the maximal cliques of `graph`. Separator marginals are
  /// taken from the parent clique of each junction-tree edge.
  static DecomposableModel from_clique_marginals(VariableTable vars, UndirectedGraph graph,
                                                 std::vector<Factor> clique_marginals,
                                                 double tolerance = kMarginalTolerance);

  /// As above with the graph implied by the marginals' scopes.
  static DecomposableModel from_marginals(VariableTable vars, std::vector<Factor> clique_marginals,
                                          double tolerance = kMarginalTolerance);

  const VariableTable& vars() const noexcept { return vars_; }
  const UndirectedGraph& graph() const noexcept { return graph_; }
  const JunctionForest& forest() const noexcept { return forest_; }
  const CliqueSet& cliques() const noexcept { return forest_.cliques(); }
  int num_cliques() const noexcept { return forest_.num_cliques(); }
  /// Indexed like cliques().
  const std::vector<Factor>& clique_marginals() const noexcept { return clique_marginals_; }
  /// One per junction-forest edge, indexed by the edge's child clique; empty
  /// factors (scalar 1) at roots.
  const std::vector<Factor>& separator_marginals() const noexcept { return separator_marginals_; }
  /// Child cliques of every forest edge, i.e. the cliques that own a separator.
  std::vector<int> separator_owners() const;

 private:
  VariableTable vars_;
  UndirectedGraph graph_;
  JunctionForest forest_;
  std::vector<Factor> clique_marginals_;
  std::vector<Factor> separator_marginals_;
};

/// Largest deviation from 1 of any clique total, and largest per-cell gap
/// between a separator and the marginals of its two cliques.
struct ConsistencyReport {
  double normalization_error = 0.0;
  double separator_error = 0.0;
};
ConsistencyReport check_consistency(const DecomposableModel& m);

/// P(x) for a full assignment indexed by variable id; 0/0 := 0. Throws
/// OutOfDomainValue.
double evaluate_joint(const DecomposableModel& m, std::span<const int> assignment);

/// P^jt_C = P_C / P_S(C) where S(C) is the separator to C's parent (roots
/// keep their marginal). The product over cliques telescopes to P(x).
struct JtFactorization {
  std::vector<Factor> factors;
};
/// Throws InconsistentModel.
JtFactorization jt_factorization(const DecomposableModel& m);

/// Exact single-variable marginal.
Factor variable_marginal(const DecomposableModel& m, int variable);

/// Empirical clique marginals. With smoothing s > 0 the empirical joint is
/// mixed with the uniform distribution at pseudo-count weight s * max_C |X_C|,
/// which adds exactly s per cell to the largest clique and keeps all
/// marginals consistent. Throws EmptyData, NonChordalInput.
DecomposableModel mle_fit(const VariableTable& vars, const UndirectedGraph& structure,
                          const DataMatrix& data, double smoothing = 0.0);

/// Log-likelihood of `data` under `m` (natural log); -inf if any row has
/// probability zero.
double log_likelihood(const DecomposableModel& m, const DataMatrix& data);

/// Discrete Bayesian network. Each CPT's scope is {node} ∪ parents and sums
/// to one over the node for every parent configuration.
class BayesianNetwork {
 public:
  BayesianNetwork() = default;
  /// Throws CyclicInput, InvalidArgument (bad scope or unnormalized CPT).
  BayesianNetwork(VariableTable vars, DirectedGraph dag, std::vector<Factor> cpts);

  const VariableTable& vars() const noexcept { return vars_; }
  const DirectedGraph& dag() const noexcept { return dag_; }
  const std::vector<Factor>& cpts() const noexcept { return cpts_; }

 private:
  VariableTable vars_;
  DirectedGraph dag_;
  std::vector<Factor> cpts_;
};

/// Moralize, triangulate, calibrate with the CPTs; clique marginals are the
/// network's exact marginals. Throws TableTooLarge.
DecomposableModel bn_to_dm(const BayesianNetwork& bn);

/// Removes `from -> to`, replacing the child's CPT by
/// P'(x | z) = sum_y P(x | y, z) P(y) with P(y) the exact marginal of the
/// parent. Throws NoSuchEdge.
BayesianNetwork delete_edge(const BayesianNetwork& bn, int from, int to);

}  // namespace abdiv
