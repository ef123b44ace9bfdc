#pragma once

// Result tables and their CSV / JSON sinks.

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

namespace residue_lab::runner {

using Json = nlohmann::ordered_json;

// Rationals serialize as "num/den" plus a "<column>_float" reading.
using Cell = std::variant<std::monostate, bool, std::int64_t, std::uint64_t, double, std::string, mpq_class>;

class ResultTable {
 public:
  ResultTable(std::string experiment, std::vector<std::string> columns);

  const std::string& experiment() const { return experiment_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  // Throws InvalidArgument when the arity does not match the columns.
  void add_row(std::vector<Cell> row);

  Json rows_json() const;
  void write_csv(std::ostream& out) const;

 private:
  std::string experiment_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

enum class Format { csv, json };

Format parse_format(const std::string& name);

// {"experiment", "config", "rows", "meta": {"version", "runtime_ms"}}.
Json result_document(const ResultTable& table, const Json& config, double runtime_ms);

// Writes to path, or stdout for "" and "-".
void write_result(const ResultTable& table, const Json& config, double runtime_ms, const std::string& path,
                  Format format);

// %.17g, with inf / -inf / nan spelled out.
std::string format_double(double v);

std::string version();

}  // namespace residue_lab::runner
