#include "hashnets/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

#include "hashnets/error.hpp"

namespace hashnets {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string format_number(std::size_t value) { return std::to_string(value); }

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  require(!header_.empty(), "csv table needs at least one column");
}

void CsvTable::add_row(std::vector<std::string> row) {
  require(row.size() == header_.size(), "csv row has " + std::to_string(row.size()) + " fields, header has " +
                                            std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

void CsvTable::write(std::ostream& out) const {
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
}

void CsvTable::save(const std::string& path) const {
  if (path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write(out);
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace hashnets
