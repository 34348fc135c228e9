#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "abdiv/model.hpp"

namespace abdiv {

/// Decomposable model as JSON:
///   {"variables": [{"name": ..., "card": ...}],
///    "cliques":   [{"vars": [names], "table": [...]}]}
/// Tables are row-major over `vars` in the listed order (last fastest).
/// Throws ParseError for malformed documents and the model's validation
/// errors for inconsistent content.
DecomposableModel parse_dm_json(const std::string& text);
std::string dm_to_json(const DecomposableModel& m);

/// Bayesian network as JSON:
///   {"variables": [...], "nodes": [{"name", "parents": [names], "cpt": [...]}]}
/// CPTs are row-major over (parents..., node), the node fastest.
BayesianNetwork parse_bn_json(const std::string& text);
std::string bn_to_json(const BayesianNetwork& bn);

/// Structure for fitting: {"variables": [...], "edges": [[a, b], ...]} or
/// {"variables": [...], "cliques": [[names], ...]}.
struct Structure {
  VariableTable vars;
  UndirectedGraph graph;
};
Structure parse_structure_json(const std::string& text);

/// CSV with a header of variable names (any order, all variables present)
/// and integer state indices in [0, card). Throws ParseError,
/// OutOfDomainValue.
DataMatrix parse_csv(const std::string& text, const VariableTable& vars);
std::string data_to_csv(const DataMatrix& data, const VariableTable& vars);

/// Whole-file helpers; throw ParseError when the file cannot be read or
/// written.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

DecomposableModel load_dm(const std::filesystem::path& path);
BayesianNetwork load_bn(const std::filesystem::path& path);

/// Loads either format: a document with "nodes" is a Bayesian network and
/// is converted with bn_to_dm.
DecomposableModel load_model(const std::filesystem::path& path);
DecomposableModel parse_model_json(const std::string& text);

}  // namespace abdiv
