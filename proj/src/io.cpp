#include "abdiv/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "abdiv/error.hpp"

namespace abdiv {

namespace {

using json = nlohmann::json;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::kParseError, what); }

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  return obj.at(key);
}

template <typename T>
T get_as(const json& value, const char* what) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    parse_fail(std::string("field '") + what + "' has the wrong type");
  }
}

VariableTable parse_variables(const json& doc) {
  const json& list = require(doc, "variables");
  if (!list.is_array()) parse_fail("'variables' must be an array");
  std::vector<Variable> vars;
  for (const auto& v : list) {
    vars.push_back({get_as<std::string>(require(v, "name"), "name"), get_as<int>(require(v, "card"), "card")});
  }
  try {
    return VariableTable(std::move(vars));
  } catch (const Error& e) {
    parse_fail(e.what());
  }
}

json variables_to_json(const VariableTable& vars) {
  json list = json::array();
  for (const auto& v : vars) list.push_back({{"name", v.name}, {"card", v.cardinality}});
  return list;
}

std::vector<int> ids_of(const json& names, const VariableTable& vars, const char* what) {
  if (!names.is_array()) parse_fail(std::string("'") + what + "' must be an array of names");
  std::vector<int> ids;
  for (const auto& n : names) {
    const auto id = vars.find(get_as<std::string>(n, what));
    if (!id) parse_fail(std::string("unknown variable in '") + what + "': " + n.dump());
    ids.push_back(*id);
  }
  return ids;
}

Factor table_over(const std::vector<int>& ids, const VariableTable& vars, const json& table) {
  std::vector<int> cards;
  double expected = 1.0;
  for (int v : ids) {
    cards.push_back(vars.cardinality(v));
    expected *= vars.cardinality(v);
  }
  const auto values = get_as<std::vector<double>>(table, "table");
  if (static_cast<double>(values.size()) != expected) {
    parse_fail("table has " + std::to_string(values.size()) + " entries, expected " +
               std::to_string(static_cast<long long>(expected)));
  }
  std::vector<int> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    parse_fail("a table lists the same variable twice");
  }
  return Factor::from_ordered(ids, cards, values);
}

json names_of(std::span<const int> ids, const VariableTable& vars) {
  json out = json::array();
  for (int v : ids) out.push_back(vars[v].name);
  return out;
}

}  // namespace

DecomposableModel parse_dm_json(const std::string& text) {
  const json doc = parse_document(text);
  VariableTable vars = parse_variables(doc);
  const json& cliques = require(doc, "cliques");
  if (!cliques.is_array()) parse_fail("'cliques' must be an array");
  std::vector<Factor> marginals;
  for (const auto& c : cliques) {
    const auto ids = ids_of(require(c, "vars"), vars, "vars");
    marginals.push_back(table_over(ids, vars, require(c, "table")));
  }
  return DecomposableModel::from_marginals(std::move(vars), std::move(marginals));
}

std::string dm_to_json(const DecomposableModel& m) {
  json cliques = json::array();
  for (const auto& f : m.clique_marginals()) {
    cliques.push_back({{"vars", names_of(f.scope(), m.vars())},
                       {"table", std::vector<double>(f.values().begin(), f.values().end())}});
  }
  json doc = {{"variables", variables_to_json(m.vars())}, {"cliques", cliques}};
  return doc.dump(2) + "\n";
}

BayesianNetwork parse_bn_json(const std::string& text) {
  const json doc = parse_document(text);
  VariableTable vars = parse_variables(doc);
  const json& nodes = require(doc, "nodes");
  if (!nodes.is_array()) parse_fail("'nodes' must be an array");
  std::vector<Factor> cpts(static_cast<std::size_t>(vars.size()));
  std::vector<bool> seen(static_cast<std::size_t>(vars.size()), false);
  std::vector<Edge> arcs;
  for (const auto& node : nodes) {
    const std::string name = get_as<std::string>(require(node, "name"), "name");
    const auto id = vars.find(name);
    if (!id) parse_fail("node '" + name + "' is not a declared variable");
    if (seen[*id]) parse_fail("node '" + name + "' is listed twice");
    seen[*id] = true;
    std::vector<int> order = node.contains("parents") ? ids_of(node.at("parents"), vars, "parents")
                                                      : std::vector<int>{};
    for (int p : order) arcs.emplace_back(p, *id);
    order.push_back(*id);
    cpts[*id] = table_over(order, vars, require(node, "cpt"));
  }
  for (int v = 0; v < vars.size(); ++v) {
    if (!seen[v]) parse_fail("variable '" + vars[v].name + "' has no node entry");
  }
  const int n = vars.size();
  try {
    return BayesianNetwork(std::move(vars), DirectedGraph(n, arcs), std::move(cpts));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidArgument) parse_fail(e.what());
    throw;
  }
}

std::string bn_to_json(const BayesianNetwork& bn) {
  json nodes = json::array();
  for (int v = 0; v < bn.vars().size(); ++v) {
    std::vector<int> order(bn.dag().parents(v).begin(), bn.dag().parents(v).end());
    const json parents = names_of(order, bn.vars());
    order.push_back(v);
    nodes.push_back({{"name", bn.vars()[v].name}, {"parents", parents}, {"cpt", bn.cpts()[v].to_ordered(order)}});
  }
  json doc = {{"variables", variables_to_json(bn.vars())}, {"nodes", nodes}};
  return doc.dump(2) + "\n";
}

Structure parse_structure_json(const std::string& text) {
  const json doc = parse_document(text);
  Structure s;
  s.vars = parse_variables(doc);
  std::vector<Edge> edges;
  if (doc.contains("edges")) {
    for (const auto& e : doc.at("edges")) {
      const auto ids = ids_of(e, s.vars, "edges");
      if (ids.size() != 2) parse_fail("each edge must name two variables");
      edges.emplace_back(ids[0], ids[1]);
    }
  }
  if (doc.contains("cliques")) {
    for (const auto& c : doc.at("cliques")) {
      const auto ids = ids_of(c, s.vars, "cliques");
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (std::size_t j = i + 1; j < ids.size(); ++j) edges.emplace_back(ids[i], ids[j]);
      }
    }
  }
  try {
    s.graph = UndirectedGraph(s.vars.size(), edges);
  } catch (const Error& e) {
    parse_fail(e.what());
  }
  return s;
}

DataMatrix parse_csv(const std::string& text, const VariableTable& vars) {
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw Error(ErrorKind::kEmptyData, "CSV is empty");
  const auto header = split(line);
  if (static_cast<int>(header.size()) != vars.size()) {
    parse_fail("CSV header has " + std::to_string(header.size()) + " columns, expected " +
               std::to_string(vars.size()));
  }
  std::vector<int> column_var;
  std::vector<bool> covered(static_cast<std::size_t>(vars.size()), false);
  for (const auto& h : header) {
    const auto id = vars.find(h);
    if (!id) parse_fail("CSV column '" + h + "' is not a model variable");
    if (covered[*id]) parse_fail("CSV column '" + h + "' appears twice");
    covered[*id] = true;
    column_var.push_back(*id);
  }
  std::vector<std::vector<int>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) parse_fail("CSV line " + std::to_string(line_no) + " has the wrong width");
    std::vector<int> row(static_cast<std::size_t>(vars.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      std::size_t used = 0;
      int value = 0;
      try {
        value = std::stoi(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size()) {
        parse_fail("CSV line " + std::to_string(line_no) + ": '" + cells[c] + "' is not an integer");
      }
      const int v = column_var[c];
      if (value < 0 || value >= vars.cardinality(v)) {
        throw Error(ErrorKind::kOutOfDomainValue, "CSV line " + std::to_string(line_no) + ": value " +
                                                      std::to_string(value) + " out of range for " + vars[v].name);
      }
      row[v] = value;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::kEmptyData, "CSV has no data rows");
  DataMatrix data(static_cast<Eigen::Index>(rows.size()), vars.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int v = 0; v < vars.size(); ++v) data(static_cast<Eigen::Index>(r), v) = rows[r][v];
  }
  return data;
}

std::string data_to_csv(const DataMatrix& data, const VariableTable& vars) {
  std::ostringstream out;
  for (int v = 0; v < vars.size(); ++v) out << (v ? "," : "") << vars[v].name;
  out << '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data(r, c);
    out << '\n';
  }
  return out.str();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) parse_fail("cannot write '" + path.string() + "'");
  out << text;
  if (!out) parse_fail("failed writing '" + path.string() + "'");
}

DecomposableModel load_dm(const std::filesystem::path& path) { return parse_dm_json(read_text_file(path)); }

BayesianNetwork load_bn(const std::filesystem::path& path) { return parse_bn_json(read_text_file(path)); }

DecomposableModel load_model(const std::filesystem::path& path) {
  return parse_model_json(read_text_file(path));
}

DecomposableModel parse_model_json(const std::string& text) {
  const json doc = parse_document(text);
  if (doc.is_object() && doc.contains("nodes")) return bn_to_dm(parse_bn_json(text));
  return parse_dm_json(text);
}

}  // namespace abdiv
