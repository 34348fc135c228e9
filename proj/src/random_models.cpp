#include "abdiv/random_models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "abdiv/error.hpp"

namespace abdiv {

namespace {

double exponential(SampleStream& rng) { return -std::log(1.0 - rng.uniform()); }

template <typename T>
void shuffle(std::vector<T>& v, SampleStream& rng) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) std::swap(v[i], v[rng.below(i + 1)]);
}

// Grows a connected chordal graph over `vertices` (in the given order).
void grow_component(const std::vector<int>& vertices, int max_clique, SampleStream& rng,
                    std::vector<Edge>& edges, std::vector<std::vector<int>>& cliques) {
  const std::size_t first = cliques.size();
  cliques.push_back({vertices.front()});
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    const auto& host = cliques[first + static_cast<std::size_t>(rng.below(static_cast<int>(cliques.size() - first)))];
    const int limit = std::min(static_cast<int>(host.size()), max_clique - 1);
    const int size = 1 + rng.below(limit);
    std::vector<int> pick = host;
    shuffle(pick, rng);
    pick.resize(static_cast<std::size_t>(size));
    for (int u : pick) edges.emplace_back(u, vertices[i]);
    pick.push_back(vertices[i]);
    cliques.push_back(std::move(pick));
  }
}

std::vector<int> shuffled_ids(int n, SampleStream& rng) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  shuffle(ids, rng);
  return ids;
}

std::vector<int> cards_of(const std::vector<int>& scope, const VariableTable& vars) {
  std::vector<int> cards;
  for (int v : scope) cards.push_back(vars.cardinality(v));
  return cards;
}

// Flat separator index for every cell of a table over `scope`.
std::vector<std::size_t> group_of_cells(const Factor& table, const Factor& sep, int n) {
  std::vector<std::size_t> groups(table.size());
  std::vector<int> full(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto local = table.local_assignment(i);
    for (std::size_t k = 0; k < local.size(); ++k) full[table.scope()[k]] = local[k];
    groups[i] = sep.index_of(full);
  }
  return groups;
}

// Random conditional over `scope` given `sep`: nonnegative, sums to one for
// every separator state.
Factor random_conditional(const std::vector<int>& scope, const std::vector<int>& sep,
                          const VariableTable& vars, SampleStream& rng, double zero_prob,
                          double uniform_mix) {
  const auto cards = cards_of(scope, vars);
  const Factor sep_shape = Factor::constant(sep, cards_of(sep, vars), 0.0);
  Eigen::ArrayXd values(static_cast<Eigen::Index>(checked_table_size(cards)));
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    values[i] = (zero_prob > 0.0 && rng.uniform() < zero_prob) ? 0.0 : exponential(rng);
  }
  Factor raw(scope, cards, values);
  const auto groups = group_of_cells(raw, sep_shape, vars.size());
  std::vector<double> totals(sep_shape.size(), 0.0);
  for (std::size_t i = 0; i < raw.size(); ++i) totals[groups[i]] += values[static_cast<Eigen::Index>(i)];
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (totals[groups[i]] == 0.0) {
      values[static_cast<Eigen::Index>(i)] = 1.0;
      totals[groups[i]] = 1.0;
    }
  }
  const double per_state = static_cast<double>(sep_shape.size()) / static_cast<double>(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto& v = values[static_cast<Eigen::Index>(i)];
    v = (1.0 - uniform_mix) * v / totals[groups[i]] + uniform_mix * per_state;
  }
  return Factor(scope, cards, std::move(values));
}

}  // namespace

UndirectedGraph chain_graph(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return UndirectedGraph(n, edges);
}

UndirectedGraph random_chordal_graph(int n, int max_clique, double new_component_prob,
                                     SampleStream& rng) {
  if (n < 1 || max_clique < 1) throw Error(ErrorKind::kInvalidArgument, "need n >= 1 and max_clique >= 1");
  const auto ids = shuffled_ids(n, rng);
  std::vector<std::vector<int>> blocks{{ids.front()}};
  for (int i = 1; i < n; ++i) {
    if (max_clique == 1 || rng.uniform() < new_component_prob) {
      blocks.push_back({ids[i]});
    } else {
      blocks.back().push_back(ids[i]);
    }
  }
  std::vector<Edge> edges;
  std::vector<std::vector<int>> cliques;
  for (const auto& b : blocks) grow_component(b, max_clique, rng, edges, cliques);
  return UndirectedGraph(n, edges);
}

UndirectedGraph random_chordal_graph_on_blocks(int n, const std::vector<std::vector<int>>& blocks,
                                               int max_clique, SampleStream& rng) {
  std::vector<Edge> edges;
  std::vector<std::vector<int>> cliques;
  for (auto block : blocks) {
    if (block.empty()) continue;
    shuffle(block, rng);
    if (max_clique == 1) continue;
    grow_component(block, max_clique, rng, edges, cliques);
  }
  return UndirectedGraph(n, edges);
}

std::vector<std::vector<int>> random_partition(int n, int parts, SampleStream& rng) {
  if (parts < 1 || parts > n) throw Error(ErrorKind::kInvalidArgument, "need 1 <= parts <= n");
  const auto ids = shuffled_ids(n, rng);
  std::vector<std::vector<int>> blocks(static_cast<std::size_t>(parts));
  for (int i = 0; i < parts; ++i) blocks[i].push_back(ids[i]);
  for (int i = parts; i < n; ++i) blocks[static_cast<std::size_t>(rng.below(parts))].push_back(ids[i]);
  for (auto& b : blocks) std::sort(b.begin(), b.end());
  return blocks;
}

DecomposableModel random_model(const VariableTable& vars, const UndirectedGraph& graph, SampleStream& rng,
                               double zero_prob, double uniform_mix) {
  const JunctionForest forest = build_forest(graph);
  std::vector<Factor> marginals(static_cast<std::size_t>(forest.num_cliques()));
  for (const auto& tree : forest.trees()) {
    const auto& root = forest.cliques()[tree.root];
    marginals[tree.root] = random_conditional(root, {}, vars, rng, zero_prob, uniform_mix);
    for (const auto& e : tree.edges) {
      const auto& clique = forest.cliques()[e.child];
      const Factor sep = marginalize(marginals[e.parent], e.separator);
      marginals[e.child] = multiply(sep, random_conditional(clique, e.separator, vars, rng, zero_prob, uniform_mix));
    }
  }
  return DecomposableModel::from_clique_marginals(vars, graph, std::move(marginals));
}

VariableTable random_variables(int n, double max_states, SampleStream& rng) {
  std::vector<Variable> vars;
  double states = std::pow(2.0, n);
  for (int i = 0; i < n; ++i) {
    int card = 2;
    if (rng.uniform() < 0.4 && states * 1.5 <= max_states) {
      card = 3;
      states *= 1.5;
    }
    vars.push_back({"X" + std::to_string(i), card});
  }
  return VariableTable(std::move(vars));
}

ModelPair random_pair(const VariableTable& vars, int max_clique, bool disconnected, SampleStream& rng,
                      double zero_prob, double uniform_mix) {
  const int n = vars.size();
  UndirectedGraph gp;
  UndirectedGraph gq;
  if (disconnected) {
    if (n < 2) throw Error(ErrorKind::kInvalidArgument, "a disconnected pair needs at least two variables");
    const int parts = 2 + rng.below(std::min(3, n - 1));
    const auto blocks = random_partition(n, parts, rng);
    gp = random_chordal_graph_on_blocks(n, blocks, max_clique, rng);
    gq = random_chordal_graph_on_blocks(n, blocks, max_clique, rng);
  } else {
    gp = random_chordal_graph(n, max_clique, 0.1, rng);
    gq = random_chordal_graph(n, max_clique, 0.1, rng);
  }
  ModelPair pair{random_model(vars, gp, rng, zero_prob, uniform_mix),
                 random_model(vars, gq, rng, zero_prob, uniform_mix)};
  return pair;
}

BayesianNetwork random_bn(const VariableTable& vars, int max_parents, SampleStream& rng) {
  const int n = vars.size();
  std::vector<Edge> arcs;
  std::vector<Factor> cpts;
  for (int v = 0; v < n; ++v) {
    std::vector<int> earlier(static_cast<std::size_t>(v));
    std::iota(earlier.begin(), earlier.end(), 0);
    shuffle(earlier, rng);
    const int k = std::min(v, rng.below(max_parents + 1));
    std::vector<int> family(earlier.begin(), earlier.begin() + k);
    for (int p : family) arcs.emplace_back(p, v);
    std::vector<int> parents = family;
    std::sort(parents.begin(), parents.end());
    family.push_back(v);
    std::sort(family.begin(), family.end());
    cpts.push_back(random_conditional(family, parents, vars, rng, 0.0, 0.0));
  }
  return BayesianNetwork(vars, DirectedGraph(n, arcs), std::move(cpts));
}

}  // namespace abdiv
