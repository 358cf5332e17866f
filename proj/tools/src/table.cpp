#include "evcharge/cli/table.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <ostream>

#include "evcharge/errors.hpp"

namespace evcharge::cli {

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ValidationError(ValidationCode::bad_config, "unknown output format '" + name + "'");
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

namespace {

std::string csv_field(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string quoted = "\"";
      for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      return quoted + '"';
    }
  };
  return std::visit(Visitor{}, cell);
}

nlohmann::json json_field(const Cell& cell) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double v) const {
      // Round through the CSV representation so both formats agree.
      if (!std::isfinite(v)) return format_real(v);
      return std::stod(format_real(v));
    }
    nlohmann::json operator()(std::int64_t v) const { return v; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, cell);
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(row[i]);
    out << '\n';
  }
}

void write_json(std::ostream& out, const Table& table) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < table.header.size() && i < row.size(); ++i) {
      obj[table.header[i]] = json_field(row[i]);
    }
    doc.push_back(obj);
  }
  out << doc.dump(2) << '\n';
}

void write(std::ostream& out, const Table& table, Format format) {
  if (format == Format::csv) {
    write_csv(out, table);
  } else {
    write_json(out, table);
  }
}

}  // namespace evcharge::cli
