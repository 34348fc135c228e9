#include "abdiv/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <unordered_set>

#include "abdiv/error.hpp"

namespace abdiv {

// ---------------------------------------------------------------------------
// VariableTable

VariableTable::VariableTable(std::vector<Variable> variables,
                             bool allow_degenerate)
    : variables_(std::move(variables)) {
  std::unordered_set<std::string> seen;
  for (const auto& v : variables_) {
    if (v.name.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "variable with empty name");
    }
    if (!seen.insert(v.name).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate variable name '" + v.name + "'");
    }
    const int min_card = allow_degenerate ? 1 : 2;
    if (v.cardinality < min_card) {
      throw Error(ErrorKind::kInvalidArgument,
                  "variable '" + v.name + "' has cardinality " +
                      std::to_string(v.cardinality));
    }
  }
}

std::optional<int> VariableTable::find(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  return std::nullopt;
}

int VariableTable::id_of(std::string_view name) const {
  auto id = find(name);
  if (!id) {
    throw Error(ErrorKind::kInvalidArgument, "unknown variable '" + std::string(name) + "'");
  }
  return *id;
}

std::vector<int> VariableTable::cardinalities() const {
  std::vector<int> cards;
  cards.reserve(variables_.size());
  for (const auto& v : variables_) cards.push_back(v.cardinality);
  return cards;
}

double VariableTable::log_domain_size() const {
  double total = 0.0;
  for (const auto& v : variables_) total += std::log(static_cast<double>(v.cardinality));
  return total;
}

double VariableTable::domain_size() const {
  double total = 1.0;
  for (const auto& v : variables_) total *= v.cardinality;
  return total;
}

VariableTable make_variables(int n, int cardinality) {
  std::vector<Variable> vars;
  vars.reserve(n);
  for (int i = 0; i < n; ++i) vars.push_back({"X" + std::to_string(i), cardinality});
  return VariableTable(std::move(vars));
}

// ---------------------------------------------------------------------------
// UndirectedGraph

UndirectedGraph::UndirectedGraph(int n) {
  if (n < 0) throw Error(ErrorKind::kInvalidArgument, "negative vertex count");
  adjacency_.resize(n);
}

UndirectedGraph::UndirectedGraph(int n, std::span<const Edge> edges)
    : UndirectedGraph(n) {
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) {
      throw Error(ErrorKind::kInvalidArgument, "edge endpoint out of range");
    }
    if (u == v) throw Error(ErrorKind::kInvalidArgument, "self-loop on vertex " + std::to_string(u));
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
}

std::size_t UndirectedGraph::num_edges() const {
  std::size_t twice = 0;
  for (const auto& nbrs : adjacency_) twice += nbrs.size();
  return twice / 2;
}

bool UndirectedGraph::has_edge(int u, int v) const {
  const auto& nbrs = adjacency_.at(u);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

std::vector<Edge> UndirectedGraph::edges() const {
  std::vector<Edge> out;
  for (int u = 0; u < num_vertices(); ++u) {
    for (int v : adjacency_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

UndirectedGraph UndirectedGraph::with_edges(std::span<const Edge> extra) const {
  auto all = edges();
  all.insert(all.end(), extra.begin(), extra.end());
  return UndirectedGraph(num_vertices(), all);
}

// ---------------------------------------------------------------------------
// DirectedGraph

DirectedGraph::DirectedGraph(int n) {
  if (n < 0) throw Error(ErrorKind::kInvalidArgument, "negative vertex count");
  parents_.resize(n);
}

DirectedGraph::DirectedGraph(int n, std::span<const Edge> arcs) : DirectedGraph(n) {
  for (auto [from, to] : arcs) {
    if (from < 0 || to < 0 || from >= n || to >= n) {
      throw Error(ErrorKind::kInvalidArgument, "arc endpoint out of range");
    }
    if (from == to) throw Error(ErrorKind::kInvalidArgument, "self-loop arc");
    parents_[to].push_back(from);
  }
  for (auto& ps : parents_) {
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
  }
}

bool DirectedGraph::has_arc(int from, int to) const {
  const auto& ps = parents_.at(to);
  return std::binary_search(ps.begin(), ps.end(), from);
}

std::vector<Edge> DirectedGraph::arcs() const {
  std::vector<Edge> out;
  for (int v = 0; v < num_vertices(); ++v) {
    for (int p : parents_[v]) out.emplace_back(p, v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

DirectedGraph DirectedGraph::without_arc(int from, int to) const {
  if (!has_arc(from, to)) {
    throw Error(ErrorKind::kNoSuchEdge,
                std::to_string(from) + " -> " + std::to_string(to));
  }
  DirectedGraph out = *this;
  auto& ps = out.parents_[to];
  ps.erase(std::find(ps.begin(), ps.end(), from));
  return out;
}

// ---------------------------------------------------------------------------
// Sorted-set helpers

bool is_sorted_subset(std::span<const int> sub, std::span<const int> super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

std::vector<int> sorted_intersection(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> sorted_union(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> sorted_difference(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool is_complete(const UndirectedGraph& g, std::span<const int> vertices) {
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      if (!g.has_edge(vertices[i], vertices[j])) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Chordality

std::vector<int> maximum_cardinality_search(const UndirectedGraph& g) {
  const int n = g.num_vertices();
  std::vector<int> weight(n, 0);
  std::vector<char> visited(n, 0);
  std::vector<int> order;
  order.reserve(n);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int v = 0; v < n; ++v) {
      if (!visited[v] && (best < 0 || weight[v] > weight[best])) best = v;
    }
    visited[best] = 1;
    order.push_back(best);
    for (int w : g.neighbors(best)) {
      if (!visited[w]) ++weight[w];
    }
  }
  return order;
}

ChordalityResult is_chordal(const UndirectedGraph& g) {
  const int n = g.num_vertices();
  std::vector<int> peo = maximum_cardinality_search(g);
  std::reverse(peo.begin(), peo.end());
  std::vector<int> position(n);
  for (int i = 0; i < n; ++i) position[peo[i]] = i;

  // Each vertex's later neighbours must form a clique; it suffices that they
  // are all adjacent to the earliest of them.
  for (int v : peo) {
    int first = -1;
    for (int w : g.neighbors(v)) {
      if (position[w] > position[v] && (first < 0 || position[w] < position[first])) {
        first = w;
      }
    }
    if (first < 0) continue;
    for (int w : g.neighbors(v)) {
      if (w != first && position[w] > position[v] && !g.has_edge(first, w)) {
        return {false, {}};
      }
    }
  }
  return {true, std::move(peo)};
}

UndirectedGraph triangulate(const UndirectedGraph& g) {
  if (is_chordal(g).chordal) return g;

  const int n = g.num_vertices();
  std::vector<std::set<int>> work(n);
  for (int v = 0; v < n; ++v) work[v].insert(g.neighbors(v).begin(), g.neighbors(v).end());
  std::vector<char> eliminated(n, 0);
  std::vector<Edge> fill_edges;

  auto fill_in = [&](int v) {
    std::size_t missing = 0;
    for (auto i = work[v].begin(); i != work[v].end(); ++i) {
      for (auto j = std::next(i); j != work[v].end(); ++j) {
        if (!work[*i].count(*j)) ++missing;
      }
    }
    return missing;
  };

  for (int step = 0; step < n; ++step) {
    int best = -1;
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (int v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      const std::size_t f = fill_in(v);
      if (f < best_fill) {
        best_fill = f;
        best = v;
      }
    }
    for (auto i = work[best].begin(); i != work[best].end(); ++i) {
      for (auto j = std::next(i); j != work[best].end(); ++j) {
        if (work[*i].insert(*j).second) {
          work[*j].insert(*i);
          fill_edges.emplace_back(*i, *j);
        }
      }
    }
    for (int w : work[best]) work[w].erase(best);
    work[best].clear();
    eliminated[best] = 1;
  }
  return g.with_edges(fill_edges);
}

CliqueSet maximal_cliques(const UndirectedGraph& g) {
  auto chordal = is_chordal(g);
  if (!chordal.chordal) throw Error(ErrorKind::kNonChordalInput, "maximal_cliques requires a chordal graph");
  const int n = g.num_vertices();
  std::vector<int> position(n);
  for (int i = 0; i < n; ++i) position[chordal.elimination_order[i]] = i;

  CliqueSet candidates;
  candidates.reserve(n);
  for (int v : chordal.elimination_order) {
    Clique c{v};
    for (int w : g.neighbors(v)) {
      if (position[w] > position[v]) c.push_back(w);
    }
    std::sort(c.begin(), c.end());
    candidates.push_back(std::move(c));
  }

  // Larger candidates first so each candidate only needs checking against
  // already-kept cliques.
  std::vector<std::size_t> idx(candidates.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return candidates[a].size() > candidates[b].size();
  });
  CliqueSet kept;
  for (std::size_t i : idx) {
    const auto& c = candidates[i];
    bool dominated = std::any_of(kept.begin(), kept.end(), [&](const Clique& k) {
      return k.size() >= c.size() && is_sorted_subset(c, k);
    });
    if (!dominated) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<std::vector<int>> connected_components(const UndirectedGraph& g) {
  const int n = g.num_vertices();
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> components;
  for (int s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    const int id = static_cast<int>(components.size());
    std::vector<int> members;
    std::queue<int> frontier;
    frontier.push(s);
    label[s] = id;
    while (!frontier.empty()) {
      int v = frontier.front();
      frontier.pop();
      members.push_back(v);
      for (int w : g.neighbors(v)) {
        if (label[w] < 0) {
          label[w] = id;
          frontier.push(w);
        }
      }
    }
    std::sort(members.begin(), members.end());
    components.push_back(std::move(members));
  }
  return components;
}

std::vector<int> topological_order(const DirectedGraph& dag) {
  const int n = dag.num_vertices();
  std::vector<std::vector<int>> children(n);
  std::vector<int> indegree(n, 0);
  for (int v = 0; v < n; ++v) {
    for (int p : dag.parents(v)) {
      children[p].push_back(v);
      ++indegree[v];
    }
  }
  // Min-heap keeps the order deterministic.
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<int> order;
  order.reserve(n);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (int c : children[v]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (static_cast<int>(order.size()) != n) {
    throw Error(ErrorKind::kCyclicInput, "directed graph contains a cycle");
  }
  return order;
}

UndirectedGraph moralize(const DirectedGraph& dag) {
  topological_order(dag);
  std::vector<Edge> edges;
  for (int v = 0; v < dag.num_vertices(); ++v) {
    auto ps = dag.parents(v);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      edges.emplace_back(ps[i], v);
      for (std::size_t j = i + 1; j < ps.size(); ++j) edges.emplace_back(ps[i], ps[j]);
    }
  }
  return UndirectedGraph(dag.num_vertices(), edges);
}

int treewidth_of_chordal(const UndirectedGraph& g) {
  std::size_t largest = 0;
  for (const auto& c : maximal_cliques(g)) largest = std::max(largest, c.size());
  return largest == 0 ? 0 : static_cast<int>(largest) - 1;
}

}  // namespace abdiv
