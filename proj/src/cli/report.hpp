#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace abdiv::cli {

/// Empty cells print as "-" and serialize as null.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

/// Aligned plain-text rendering.
void print_table(const Table& table, std::ostream& out);
/// RFC 4180 CSV; doubles with 17 significant digits.
std::string to_csv(const Table& table);

/// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

struct InputFile {
  std::string path;
  std::string fnv1a;
};

struct RunReport {
  std::string command;
  std::vector<InputFile> inputs;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  Table results;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, double>> phase_seconds;

  /// Reads `path`, records its hash and returns its contents.
  std::string read_input(const std::filesystem::path& path);
};

nlohmann::ordered_json to_json(const RunReport& report);

}  // namespace abdiv::cli
