#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace abdiv {

/// A discrete random variable. Its id is its position in the VariableTable.
struct Variable {
  std::string name;
  int cardinality = 2;

  bool operator==(const Variable&) const = default;
};

/// Ordered set of variables with ids 0..n-1, unique names and cardinality >= 2
/// (cardinality 1 only when constructed with `allow_degenerate`).
class VariableTable {
 public:
  VariableTable() = default;
  explicit VariableTable(std::vector<Variable> variables,
                         bool allow_degenerate = false);

  int size() const noexcept { return static_cast<int>(variables_.size()); }
  const Variable& operator[](int id) const { return variables_.at(id); }
  int cardinality(int id) const { return variables_.at(id).cardinality; }

  std::optional<int> find(std::string_view name) const;
  /// Throws InvalidArgument when no variable has this name.
  int id_of(std::string_view name) const;

  std::vector<int> cardinalities() const;
  /// Sum of log-cardinalities; log|X|.
  double log_domain_size() const;
  /// |X| in double precision (may be +inf for very large tables).
  double domain_size() const;

  auto begin() const { return variables_.begin(); }
  auto end() const { return variables_.end(); }

  bool operator==(const VariableTable&) const = default;

 private:
  std::vector<Variable> variables_;
};

/// Uniform-cardinality table with names X0, X1, ...
VariableTable make_variables(int n, int cardinality);

using Edge = std::pair<int, int>;

/// Simple undirected graph on vertices 0..n-1 with sorted adjacency lists.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(int n);
  /// Duplicate edges are merged; self-loops and out-of-range ids throw.
  UndirectedGraph(int n, std::span<const Edge> edges);

  int num_vertices() const noexcept { return static_cast<int>(adjacency_.size()); }
  std::size_t num_edges() const;
  bool has_edge(int u, int v) const;
  std::span<const int> neighbors(int v) const { return adjacency_.at(v); }
  int degree(int v) const { return static_cast<int>(adjacency_.at(v).size()); }

  /// All edges as (u, v) with u < v, lexicographically sorted.
  std::vector<Edge> edges() const;
  /// This graph plus `extra` edges.
  UndirectedGraph with_edges(std::span<const Edge> extra) const;

  bool operator==(const UndirectedGraph&) const = default;

 private:
  std::vector<std::vector<int>> adjacency_;
};

/// Directed graph stored as sorted parent lists. Arcs are (from, to).
class DirectedGraph {
 public:
  DirectedGraph() = default;
  explicit DirectedGraph(int n);
  DirectedGraph(int n, std::span<const Edge> arcs);

  int num_vertices() const noexcept { return static_cast<int>(parents_.size()); }
  std::span<const int> parents(int v) const { return parents_.at(v); }
  bool has_arc(int from, int to) const;
  std::vector<Edge> arcs() const;
  DirectedGraph without_arc(int from, int to) const;

  bool operator==(const DirectedGraph&) const = default;

 private:
  std::vector<std::vector<int>> parents_;
};

using Clique = std::vector<int>;
/// Maximal cliques, each sorted ascending, the list sorted lexicographically.
using CliqueSet = std::vector<Clique>;

struct ChordalityResult {
  bool chordal = false;
  /// Perfect elimination order (first eliminated first); empty if not chordal.
  std::vector<int> elimination_order;
};

/// Maximum cardinality search visit order, ties broken by smallest id.
std::vector<int> maximum_cardinality_search(const UndirectedGraph& g);

ChordalityResult is_chordal(const UndirectedGraph& g);

/// Chordal supergraph by min-fill elimination (ties: smallest id). Returns `g`
/// unchanged when it is already chordal.
UndirectedGraph triangulate(const UndirectedGraph& g);

/// Throws NonChordalInput when `g` is not chordal.
CliqueSet maximal_cliques(const UndirectedGraph& g);

/// Components ordered by smallest member; members sorted.
std::vector<std::vector<int>> connected_components(const UndirectedGraph& g);

/// Throws CyclicInput.
std::vector<int> topological_order(const DirectedGraph& dag);

/// Skeleton plus marriages between co-parents. Throws CyclicInput.
UndirectedGraph moralize(const DirectedGraph& dag);

/// Largest maximal clique size minus one. Throws NonChordalInput.
int treewidth_of_chordal(const UndirectedGraph& g);

bool is_complete(const UndirectedGraph& g, std::span<const int> vertices);

/// Both ranges must be sorted ascending.
bool is_sorted_subset(std::span<const int> sub, std::span<const int> super);
std::vector<int> sorted_intersection(std::span<const int> a, std::span<const int> b);
std::vector<int> sorted_union(std::span<const int> a, std::span<const int> b);
std::vector<int> sorted_difference(std::span<const int> a, std::span<const int> b);

}  // namespace abdiv
