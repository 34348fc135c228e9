#include "report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "abdiv/io.hpp"

namespace abdiv::cli {

namespace {

std::string format(const Cell& cell, int digits) {
  if (std::holds_alternative<std::monostate>(cell)) return "-";
  if (const auto* d = std::get_if<double>(&cell)) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, *d);
    return buf;
  }
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  return std::get<std::string>(cell);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void print_table(const Table& table, std::ostream& out) {
  std::vector<std::size_t> widths;
  for (const auto& c : table.columns) widths.push_back(c.size());
  std::vector<std::vector<std::string>> text;
  for (const auto& row : table.rows) {
    auto& line = text.emplace_back();
    for (std::size_t k = 0; k < row.size(); ++k) {
      line.push_back(format(row[k], 10));
      widths[k] = std::max(widths[k], line.back().size());
    }
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out << "  ";
      out << cells[k] << std::string(widths[k] - cells[k].size(), ' ');
    }
    out << '\n';
  };
  emit(table.columns);
  for (const auto& line : text) emit(line);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t k = 0; k < table.columns.size(); ++k) {
    out += (k ? "," : "") + csv_field(table.columns[k]);
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      const Cell& cell = row[k];
      out += (k ? "," : "") + (std::holds_alternative<std::monostate>(cell) ? "" : csv_field(format(cell, 17)));
    }
    out += '\n';
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunReport::read_input(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  inputs.push_back({path.string(), fnv1a_hex(text)});
  return text;
}

nlohmann::ordered_json to_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["command"] = report.command;
  j["version"] = ABDIV_VERSION;
  j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& in : report.inputs) j["inputs"].push_back({{"path", in.path}, {"fnv1a", in.fnv1a}});
  j["parameters"] = report.parameters;
  auto& results = j["results"];
  results["columns"] = report.results.columns;
  results["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.results.rows) {
    auto& r = results["rows"].emplace_back(nlohmann::ordered_json::array());
    for (const auto& cell : row) {
      std::visit(
          [&](const auto& v) {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, std::monostate>) {
              r.push_back(nullptr);
            } else {
              r.push_back(v);
            }
          },
          cell);
    }
  }
  j["notes"] = report.notes;
  auto& phases = j["phase_seconds"];
  phases = nlohmann::ordered_json::object();
  for (const auto& [name, seconds] : report.phase_seconds) phases[name] = seconds;
  return j;
}

}  // namespace abdiv::cli
