#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

namespace hashnets {

/// Shortest round-trip decimal form, independent of the global locale.
std::string format_number(double value);
std::string format_number(std::size_t value);
inline std::string format_number(int value) { return std::to_string(value); }
inline std::string format_bool(bool value) { return value ? "true" : "false"; }

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }

  void write(std::ostream& out) const;
  /// Writes to `path`; "-" means stdout. Throws Error on IO failure.
  void save(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace hashnets
