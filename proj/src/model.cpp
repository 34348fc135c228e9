#include "abdiv/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "abdiv/error.hpp"

namespace abdiv {

namespace {

std::vector<int> cards_of(const VariableTable& vars, std::span<const int> scope) {
  std::vector<int> cards;
  cards.reserve(scope.size());
  for (int v : scope) cards.push_back(vars.cardinality(v));
  return cards;
}

double max_cell_gap(const Factor& a, const Factor& b) {
  return (a.values() - b.values()).abs().maxCoeff();
}

UndirectedGraph graph_from_scopes(int n, std::span<const Factor> factors) {
  std::vector<Edge> edges;
  for (const auto& f : factors) {
    const auto& s = f.scope();
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) edges.emplace_back(s[i], s[j]);
    }
  }
  return UndirectedGraph(n, edges);
}

}  // namespace

// ---------------------------------------------------------------------------
// DecomposableModel

DecomposableModel DecomposableModel::from_clique_marginals(VariableTable vars,
                                                           UndirectedGraph graph,
                                                           std::vector<Factor> clique_marginals,
                                                           double tolerance) {
  if (graph.num_vertices() != vars.size()) {
    throw Error(ErrorKind::kInvalidArgument, "graph and variable table differ in size");
  }
  CliqueSet cliques = maximal_cliques(graph);
  if (clique_marginals.size() != cliques.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "expected " + std::to_string(cliques.size()) + " clique marginals, got " +
                    std::to_string(clique_marginals.size()));
  }

  DecomposableModel m;
  m.clique_marginals_.resize(cliques.size());
  std::vector<char> filled(cliques.size(), 0);
  for (auto& f : clique_marginals) {
    auto it = std::lower_bound(cliques.begin(), cliques.end(), f.scope());
    if (it == cliques.end() || *it != f.scope()) {
      throw Error(ErrorKind::kInvalidArgument, "marginal scope is not a maximal clique of the graph");
    }
    const auto idx = static_cast<std::size_t>(it - cliques.begin());
    if (filled[idx]) throw Error(ErrorKind::kInvalidArgument, "clique marginal given twice");
    if (f.cardinalities() != cards_of(vars, f.scope())) {
      throw Error(ErrorKind::kInvalidArgument, "marginal cardinalities disagree with variable table");
    }
    if (f.log_domain() || (f.values() < 0.0).any()) {
      throw Error(ErrorKind::kInvalidArgument, "clique marginal has negative entries");
    }
    if (std::abs(f.sum() - 1.0) > tolerance) {
      throw Error(ErrorKind::kInconsistentModel,
                  "clique marginal sums to " + std::to_string(f.sum()));
    }
    filled[idx] = 1;
    m.clique_marginals_[idx] = std::move(f);
  }

  m.forest_ = build_forest_from_cliques(std::move(cliques));
  m.separator_marginals_.assign(m.clique_marginals_.size(), Factor());
  for (const auto& tree : m.forest_.trees()) {
    for (const auto& e : tree.edges) {
      Factor from_parent = marginalize(m.clique_marginals_[e.parent], e.separator);
      Factor from_child = marginalize(m.clique_marginals_[e.child], e.separator);
      if (max_cell_gap(from_parent, from_child) > tolerance) {
        throw Error(ErrorKind::kInconsistentModel,
                    "cliques " + std::to_string(e.parent) + " and " + std::to_string(e.child) +
                        " disagree on their separator");
      }
      m.separator_marginals_[e.child] = std::move(from_parent);
    }
  }
  m.vars_ = std::move(vars);
  m.graph_ = std::move(graph);
  return m;
}

DecomposableModel DecomposableModel::from_marginals(VariableTable vars,
                                                    std::vector<Factor> clique_marginals,
                                                    double tolerance) {
  UndirectedGraph g = graph_from_scopes(vars.size(), clique_marginals);
  if (!is_chordal(g).chordal) {
    throw Error(ErrorKind::kNonChordalInput, "clique scopes induce a non-chordal graph");
  }
  return from_clique_marginals(std::move(vars), std::move(g), std::move(clique_marginals), tolerance);
}

std::vector<int> DecomposableModel::separator_owners() const {
  std::vector<int> owners;
  for (const auto& tree : forest_.trees()) {
    for (const auto& e : tree.edges) owners.push_back(e.child);
  }
  return owners;
}

ConsistencyReport check_consistency(const DecomposableModel& m) {
  ConsistencyReport r;
  for (const auto& f : m.clique_marginals()) {
    r.normalization_error = std::max(r.normalization_error, std::abs(f.sum() - 1.0));
  }
  for (const auto& tree : m.forest().trees()) {
    for (const auto& e : tree.edges) {
      const Factor& sep = m.separator_marginals()[e.child];
      r.separator_error = std::max(
          {r.separator_error,
           max_cell_gap(marginalize(m.clique_marginals()[e.parent], e.separator), sep),
           max_cell_gap(marginalize(m.clique_marginals()[e.child], e.separator), sep)});
    }
  }
  return r;
}

double evaluate_joint(const DecomposableModel& m, std::span<const int> assignment) {
  if (static_cast<int>(assignment.size()) != m.vars().size()) {
    throw Error(ErrorKind::kOutOfDomainValue, "assignment length differs from variable count");
  }
  for (int v = 0; v < m.vars().size(); ++v) {
    if (assignment[v] < 0 || assignment[v] >= m.vars().cardinality(v)) {
      throw Error(ErrorKind::kOutOfDomainValue,
                  "value " + std::to_string(assignment[v]) + " for variable '" +
                      m.vars()[v].name + "'");
    }
  }
  double numerator = 1.0;
  for (const auto& f : m.clique_marginals()) {
    numerator *= f.at(assignment);
    if (numerator == 0.0) return 0.0;
  }
  double denominator = 1.0;
  for (int c : m.separator_owners()) denominator *= m.separator_marginals()[c].at(assignment);
  return denominator == 0.0 ? 0.0 : numerator / denominator;
}

JtFactorization jt_factorization(const DecomposableModel& m) {
  JtFactorization out;
  out.factors.reserve(m.clique_marginals().size());
  for (int c = 0; c < m.num_cliques(); ++c) {
    if (m.forest().parent_of(c) < 0) {
      out.factors.push_back(m.clique_marginals()[c]);
      continue;
    }
    try {
      out.factors.push_back(divide(m.clique_marginals()[c], m.separator_marginals()[c]));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDivisionByZero) throw;
      throw Error(ErrorKind::kInconsistentModel,
                  "clique " + std::to_string(c) + " has mass where its separator has none");
    }
  }
  return out;
}

Factor variable_marginal(const DecomposableModel& m, int variable) {
  for (const auto& f : m.clique_marginals()) {
    if (f.contains(variable)) {
      const int keep[] = {variable};
      return marginalize(f, keep);
    }
  }
  throw Error(ErrorKind::kInvalidArgument, "variable " + std::to_string(variable) + " not in model");
}

DecomposableModel mle_fit(const VariableTable& vars, const UndirectedGraph& structure,
                          const DataMatrix& data, double smoothing) {
  if (data.rows() == 0) throw Error(ErrorKind::kEmptyData, "no observations");
  if (data.cols() != vars.size()) {
    throw Error(ErrorKind::kInvalidArgument, "data has " + std::to_string(data.cols()) +
                                                 " columns, expected " + std::to_string(vars.size()));
  }
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw Error(ErrorKind::kInvalidArgument, "smoothing must be a finite value >= 0");
  }
  if (!is_chordal(structure).chordal) {
    throw Error(ErrorKind::kNonChordalInput, "fit structure is not chordal");
  }
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (int v = 0; v < vars.size(); ++v) {
      if (data(r, v) < 0 || data(r, v) >= vars.cardinality(v)) {
        throw Error(ErrorKind::kOutOfDomainValue,
                    "row " + std::to_string(r) + " has out-of-domain value for '" + vars[v].name + "'");
      }
    }
  }

  const CliqueSet cliques = maximal_cliques(structure);
  double largest = 1.0;
  for (const auto& c : cliques) {
    largest = std::max(largest, static_cast<double>(checked_table_size(cards_of(vars, c))));
  }
  const double pseudo = smoothing * largest;
  const double n = static_cast<double>(data.rows());

  std::vector<Factor> marginals;
  marginals.reserve(cliques.size());
  std::vector<int> row(static_cast<std::size_t>(vars.size()));
  for (const auto& c : cliques) {
    auto cards = cards_of(vars, c);
    Factor counts = Factor::constant(c, cards, 0.0);
    Eigen::ArrayXd tally = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(counts.size()));
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
      for (int v = 0; v < vars.size(); ++v) row[v] = data(r, v);
      tally[static_cast<Eigen::Index>(counts.index_of(row))] += 1.0;
    }
    const double cells = static_cast<double>(tally.size());
    Eigen::ArrayXd probs = (tally + pseudo / cells) / (n + pseudo);
    marginals.emplace_back(c, std::move(cards), std::move(probs));
  }
  return DecomposableModel::from_clique_marginals(vars, structure, std::move(marginals));
}

double log_likelihood(const DecomposableModel& m, const DataMatrix& data) {
  double total = 0.0;
  std::vector<int> row(static_cast<std::size_t>(m.vars().size()));
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (int v = 0; v < m.vars().size(); ++v) row[v] = data(r, v);
    const double p = evaluate_joint(m, row);
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    total += std::log(p);
  }
  return total;
}

// ---------------------------------------------------------------------------
// BayesianNetwork

BayesianNetwork::BayesianNetwork(VariableTable vars, DirectedGraph dag, std::vector<Factor> cpts)
    : vars_(std::move(vars)), dag_(std::move(dag)), cpts_(std::move(cpts)) {
  const int n = vars_.size();
  if (dag_.num_vertices() != n || static_cast<int>(cpts_.size()) != n) {
    throw Error(ErrorKind::kInvalidArgument, "network needs one CPT per variable");
  }
  topological_order(dag_);
  for (int v = 0; v < n; ++v) {
    std::vector<int> family(dag_.parents(v).begin(), dag_.parents(v).end());
    family.push_back(v);
    std::sort(family.begin(), family.end());
    const Factor& cpt = cpts_[v];
    if (cpt.scope() != family || cpt.cardinalities() != cards_of(vars_, family)) {
      throw Error(ErrorKind::kInvalidArgument, "CPT of '" + vars_[v].name + "' has the wrong scope");
    }
    if ((cpt.values() < 0.0).any()) {
      throw Error(ErrorKind::kInvalidArgument, "CPT of '" + vars_[v].name + "' has negative entries");
    }
    std::vector<int> parents(dag_.parents(v).begin(), dag_.parents(v).end());
    const Factor column_sums = marginalize(cpt, parents);
    if (((column_sums.values() - 1.0).abs() > kMarginalTolerance).any()) {
      throw Error(ErrorKind::kInvalidArgument, "CPT of '" + vars_[v].name + "' is not normalized");
    }
  }
}

DecomposableModel bn_to_dm(const BayesianNetwork& bn) {
  const UndirectedGraph chordal = triangulate(moralize(bn.dag()));
  const JunctionForest forest = build_forest(chordal);

  std::vector<AssignedFactor> assigned;
  assigned.reserve(bn.cpts().size());
  for (const auto& cpt : bn.cpts()) {
    const auto& cliques = forest.cliques();
    auto it = std::find_if(cliques.begin(), cliques.end(),
                           [&](const Clique& c) { return is_sorted_subset(cpt.scope(), c); });
    // The moral graph makes every family complete, so a host clique exists.
    assigned.push_back({cpt, static_cast<int>(it - cliques.begin())});
  }
  const auto cards = bn.vars().cardinalities();
  Calibration cal = calibrate(forest, cards, assigned);

  std::vector<Factor> marginals;
  marginals.reserve(cal.beliefs.size());
  for (int c = 0; c < forest.num_cliques(); ++c) {
    const double total = belief_total(cal, forest.tree_of(c));
    const Factor& b = cal.beliefs[c];
    marginals.emplace_back(b.scope(), b.cardinalities(), b.values() / total);
  }
  return DecomposableModel::from_clique_marginals(bn.vars(), chordal, std::move(marginals));
}

BayesianNetwork delete_edge(const BayesianNetwork& bn, int from, int to) {
  DirectedGraph dag = bn.dag().without_arc(from, to);
  const Factor parent_marginal = variable_marginal(bn_to_dm(bn), from);
  std::vector<Factor> cpts = bn.cpts();
  const Factor& old = cpts[to];
  std::vector<int> keep;
  for (int v : old.scope()) {
    if (v != from) keep.push_back(v);
  }
  cpts[to] = marginalize(multiply(old, parent_marginal), keep);
  return BayesianNetwork(bn.vars(), std::move(dag), std::move(cpts));
}

}  // namespace abdiv
