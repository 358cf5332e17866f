#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace evcharge::cli {

/// Empty cells print as nothing in CSV and null in JSON.
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

enum class Format { csv, json };

Format parse_format(const std::string& name);

/// Reals use 6 significant digits; the header row is always written.
void write_csv(std::ostream& out, const Table& table);
/// An array of objects keyed by the header.
void write_json(std::ostream& out, const Table& table);
void write(std::ostream& out, const Table& table, Format format);

std::string format_real(double value);

}  // namespace evcharge::cli
