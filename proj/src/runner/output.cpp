#include "residue_lab/runner/output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "residue_lab/arith.hpp"
#include "residue_lab/error.hpp"

namespace residue_lab::runner {

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

Json double_json(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Shortest text that reads back to the same double.
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string version() { return RESIDUE_LAB_VERSION; }

ResultTable::ResultTable(std::string experiment, std::vector<std::string> columns)
    : experiment_(std::move(experiment)), columns_(std::move(columns)) {}

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw InvalidArgument("row has " + std::to_string(row.size()) + " cells, table " + experiment_ + " has " +
                          std::to_string(columns_.size()) + " columns");
  }
  rows_.push_back(std::move(row));
}

Json ResultTable::rows_json() const {
  Json out = Json::array();
  for (const auto& row : rows_) {
    Json obj = Json::object();
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      const auto& name = columns_[i];
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              obj[name] = nullptr;
            } else if constexpr (std::is_same_v<T, double>) {
              obj[name] = double_json(v);
            } else if constexpr (std::is_same_v<T, mpq_class>) {
              obj[name] = to_fraction_string(v);
              obj[name + "_float"] = double_json(to_double(v));
            } else {
              obj[name] = v;
            }
          },
          row[i]);
    }
    out.push_back(std::move(obj));
  }
  return out;
}

void ResultTable::write_csv(std::ostream& out) const {
  // Rational columns expand to two; decide from the first row that has a value.
  std::vector<bool> rational(columns_.size(), false);
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    for (const auto& row : rows_) {
      if (std::holds_alternative<mpq_class>(row[i])) {
        rational[i] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out << ',';
    out << columns_[i];
    if (rational[i]) out << ',' << columns_[i] << "_float";
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
            } else if constexpr (std::is_same_v<T, bool>) {
              out << (v ? "true" : "false");
            } else if constexpr (std::is_same_v<T, double>) {
              out << format_double(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
              out << csv_escape(v);
            } else if constexpr (std::is_same_v<T, mpq_class>) {
              out << to_fraction_string(v) << ',' << format_double(to_double(v));
            } else {
              out << v;
            }
          },
          row[i]);
      if (rational[i] && !std::holds_alternative<mpq_class>(row[i])) out << ',';
    }
    out << '\n';
  }
}

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  throw ConfigError("--format: expected csv or json, got '" + name + "'");
}

Json result_document(const ResultTable& table, const Json& config, double runtime_ms) {
  Json doc = Json::object();
  doc["experiment"] = table.experiment();
  doc["config"] = config;
  doc["rows"] = table.rows_json();
  doc["meta"] = {{"version", version()}, {"runtime_ms", runtime_ms}};
  return doc;
}

void write_result(const ResultTable& table, const Json& config, double runtime_ms, const std::string& path,
                  Format format) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!path.empty() && path != "-") {
    file.open(path);
    if (!file) throw ConfigError("--out: cannot open " + path + " for writing");
    out = &file;
  }
  if (format == Format::json) {
    *out << result_document(table, config, runtime_ms).dump(2) << '\n';
  } else {
    // Metadata rides along as comment lines so the table itself stays plain.
    *out << "# experiment: " << table.experiment() << '\n';
    *out << "# config: " << config.dump() << '\n';
    *out << "# version: " << version() << ", runtime_ms: " << format_double(runtime_ms) << '\n';
    table.write_csv(*out);
  }
}

}  // namespace residue_lab::runner
