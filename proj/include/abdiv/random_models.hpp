#pragma once

#include <vector>

#include "abdiv/baselines.hpp"
#include "abdiv/model.hpp"

namespace abdiv {

/// Path X0 - X1 - ... - X{n-1}.
UndirectedGraph chain_graph(int n);

/// Random chordal graph grown by attaching each new vertex to a random
/// subset of an existing clique, so every maximal clique has at most
/// `max_clique` vertices. With probability `new_component_prob` a vertex
/// starts a new component instead. Vertex labels are shuffled.
UndirectedGraph random_chordal_graph(int n, int max_clique, double new_component_prob,
                                     SampleStream& rng);

/// Connected random chordal graph inside each block, no edges between blocks.
UndirectedGraph random_chordal_graph_on_blocks(int n, const std::vector<std::vector<int>>& blocks,
                                               int max_clique, SampleStream& rng);

/// Splits 0..n-1 into `parts` non-empty blocks at random.
std::vector<std::vector<int>> random_partition(int n, int parts, SampleStream& rng);

/// Random calibrated model on a chordal graph: root cliques draw a
/// Dirichlet(1) table, children a Dirichlet(1) conditional per separator
/// state. Each conditional cell is zeroed with probability `zero_prob`
/// (at least one cell per conditional stays positive). Each conditional is
/// then mixed with the uniform conditional at weight `uniform_mix`.
DecomposableModel random_model(const VariableTable& vars, const UndirectedGraph& graph,
                               SampleStream& rng, double zero_prob = 0.0, double uniform_mix = 0.0);

/// Variables X0..X{n-1}, each binary or ternary, with the joint domain kept
/// at or below `max_states`.
VariableTable random_variables(int n, double max_states, SampleStream& rng);

struct ModelPair {
  DecomposableModel p;
  DecomposableModel q;
};

/// Two independent random models over the same variables. When
/// `disconnected` is set both graphs live inside the same partition of at
/// least two blocks, so the union graph is disconnected.
ModelPair random_pair(const VariableTable& vars, int max_clique, bool disconnected, SampleStream& rng,
                      double zero_prob = 0.0, double uniform_mix = 0.0);

/// Random network over X0..X{n-1} with arcs only from lower to higher ids,
/// at most `max_parents` parents each, Dirichlet(1) CPT columns.
BayesianNetwork random_bn(const VariableTable& vars, int max_parents, SampleStream& rng);

}  // namespace abdiv
