#include "abdiv/junction_tree.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <string>
#include <tuple>

#include "abdiv/error.hpp"

namespace abdiv {

JunctionForest::JunctionForest(CliqueSet cliques, std::vector<CliqueTree> trees)
    : cliques_(std::move(cliques)), trees_(std::move(trees)) {
  const auto n = cliques_.size();
  tree_of_.assign(n, -1);
  parent_.assign(n, -1);
  parent_sep_.assign(n, {});
  children_.assign(n, {});
  for (int t = 0; t < num_trees(); ++t) {
    for (int c : trees_[t].cliques) {
      if (c < 0 || static_cast<std::size_t>(c) >= n || tree_of_[c] >= 0) {
        throw Error(ErrorKind::kInvalidArgument, "clique listed in more than one tree");
      }
      tree_of_[c] = t;
    }
    for (const auto& e : trees_[t].edges) {
      parent_[e.child] = e.parent;
      parent_sep_[e.child] = e.separator;
      children_[e.parent].push_back(e.child);
    }
  }
  if (std::find(tree_of_.begin(), tree_of_.end(), -1) != tree_of_.end()) {
    throw Error(ErrorKind::kInvalidArgument, "clique missing from junction forest");
  }
  for (auto& ch : children_) std::sort(ch.begin(), ch.end());
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

}  // namespace

JunctionForest build_forest_from_cliques(CliqueSet cliques) {
  const int k = static_cast<int>(cliques.size());
  // Candidate edges: clique pairs sharing at least one variable.
  std::map<int, std::vector<int>> holders;
  for (int c = 0; c < k; ++c) {
    for (int v : cliques[c]) holders[v].push_back(c);
  }
  std::vector<std::pair<int, int>> pairs;
  for (const auto& [v, cs] : holders) {
    for (std::size_t i = 0; i < cs.size(); ++i) {
      for (std::size_t j = i + 1; j < cs.size(); ++j) pairs.emplace_back(cs[i], cs[j]);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  struct Candidate {
    int weight;
    int a;
    int b;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    candidates.push_back({static_cast<int>(sorted_intersection(cliques[a], cliques[b]).size()), a, b});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    return std::tie(y.weight, x.a, x.b) < std::tie(x.weight, y.a, y.b);
  });

  UnionFind uf(k);
  std::vector<std::vector<int>> adjacency(k);
  for (const auto& c : candidates) {
    if (uf.unite(c.a, c.b)) {
      adjacency[c.a].push_back(c.b);
      adjacency[c.b].push_back(c.a);
    }
  }
  for (auto& nbrs : adjacency) std::sort(nbrs.begin(), nbrs.end());

  std::vector<CliqueTree> trees;
  std::vector<char> seen(k, 0);
  for (int root = 0; root < k; ++root) {
    if (seen[root]) continue;
    CliqueTree tree;
    tree.root = root;
    std::queue<int> frontier;
    frontier.push(root);
    seen[root] = 1;
    while (!frontier.empty()) {
      int c = frontier.front();
      frontier.pop();
      tree.cliques.push_back(c);
      for (int nb : adjacency[c]) {
        if (seen[nb]) continue;
        seen[nb] = 1;
        tree.edges.push_back({c, nb, sorted_intersection(cliques[c], cliques[nb])});
        frontier.push(nb);
      }
    }
    std::sort(tree.cliques.begin(), tree.cliques.end());
    trees.push_back(std::move(tree));
  }
  return JunctionForest(std::move(cliques), std::move(trees));
}

JunctionForest build_forest(const UndirectedGraph& chordal) {
  return build_forest_from_cliques(maximal_cliques(chordal));
}

bool has_running_intersection(const JunctionForest& forest) {
  std::map<int, std::vector<int>> holders;
  for (int c = 0; c < forest.num_cliques(); ++c) {
    for (int v : forest.cliques()[c]) holders[v].push_back(c);
  }
  for (const auto& [v, cs] : holders) {
    // Connected subtree iff exactly one holder has a parent outside the set
    // (or is a root), with all holders in one tree.
    int tops = 0;
    const int tree = forest.tree_of(cs.front());
    for (int c : cs) {
      if (forest.tree_of(c) != tree) return false;
      const int p = forest.parent_of(c);
      if (p < 0 || !std::binary_search(cs.begin(), cs.end(), p)) ++tops;
    }
    if (tops != 1) return false;
  }
  return true;
}

template <typename T>
BasicCalibration<T> calibrate(const JunctionForest& forest, std::span<const int> cardinalities,
                              const std::vector<BasicAssignedFactor<T>>& factors) {
  using F = BasicFactor<T>;
  const int k = forest.num_cliques();
  std::vector<F> potentials;
  potentials.reserve(k);
  for (const auto& clique : forest.cliques()) {
    std::vector<int> cards;
    for (int v : clique) cards.push_back(cardinalities[static_cast<std::size_t>(v)]);
    potentials.push_back(F::constant(clique, std::move(cards), T(1)));
  }
  for (const auto& af : factors) {
    if (af.clique < 0 || af.clique >= k) {
      throw Error(ErrorKind::kInvalidArgument, "factor assigned to unknown clique");
    }
    if (!is_sorted_subset(af.factor.scope(), forest.cliques()[af.clique])) {
      throw Error(ErrorKind::kScopeNotContained,
                  "factor scope not contained in clique " + std::to_string(af.clique));
    }
    potentials[af.clique] = multiply(potentials[af.clique], af.factor);
  }

  std::vector<F> upward(k);    // message child -> parent
  std::vector<F> downward(k);  // message parent -> child
  BasicCalibration<T> out;
  out.beliefs.resize(k);
  out.tree_totals.reserve(forest.num_trees());

  for (const auto& tree : forest.trees()) {
    std::vector<int> bfs{tree.root};
    for (const auto& e : tree.edges) bfs.push_back(e.child);

    for (auto it = bfs.rbegin(); it != bfs.rend(); ++it) {
      const int c = *it;
      if (forest.parent_of(c) < 0) continue;
      F acc = potentials[c];
      for (int child : forest.children_of(c)) acc = multiply(acc, upward[child]);
      upward[c] = marginalize(acc, forest.parent_separator(c));
    }
    for (int c : bfs) {
      const auto& children = forest.children_of(c);
      for (int child : children) {
        F acc = potentials[c];
        if (forest.parent_of(c) >= 0) acc = multiply(acc, downward[c]);
        for (int other : children) {
          if (other != child) acc = multiply(acc, upward[other]);
        }
        downward[child] = marginalize(acc, forest.parent_separator(child));
      }
    }
    for (int c : bfs) {
      F belief = potentials[c];
      if (forest.parent_of(c) >= 0) belief = multiply(belief, downward[c]);
      for (int child : forest.children_of(c)) belief = multiply(belief, upward[child]);
      out.beliefs[c] = std::move(belief);
    }
    out.tree_totals.push_back(out.beliefs[tree.root].sum());
  }
  return out;
}

template BasicCalibration<double> calibrate(const JunctionForest&, std::span<const int>,
                                           const std::vector<BasicAssignedFactor<double>>&);
template BasicCalibration<Quad> calibrate(const JunctionForest&, std::span<const int>,
                                          const std::vector<BasicAssignedFactor<Quad>>&);
template BasicCalibration<Mp> calibrate(const JunctionForest&, std::span<const int>,
                                        const std::vector<BasicAssignedFactor<Mp>>&);

double belief_total(const Calibration& calibration, int tree) {
  return calibration.tree_totals.at(static_cast<std::size_t>(tree));
}

}  // namespace abdiv
