#pragma once

// Experiment configuration: raw key/value settings from flags and config
// files, resolved into typed parameters with field-level diagnostics.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "residue_lab/arith.hpp"
#include "residue_lab/moments.hpp"
#include "residue_lab/options.hpp"
#include "residue_lab/runner/output.hpp"
#include "residue_lab/special_sets.hpp"

namespace residue_lab::runner {

// Keys are long flag names without dashes ("q-family", "h-grid", ...).
using RawConfig = std::map<std::string, std::string>;

// A JSON object whose values are strings, numbers, booleans or arrays of
// those (arrays join with commas). Throws ConfigError.
RawConfig load_config_file(const std::string& path);

// Later layers win: merge(defaults, file, flags).
RawConfig merge(const RawConfig& base, const RawConfig& over);

const std::vector<std::string>& experiment_names();

// Window lengths, possibly depending on q.
struct HGrid {
  enum class Kind { list, range, log2, pinv };
  Kind kind = Kind::list;
  std::vector<std::uint64_t> values;  // list
  std::uint64_t lo = 1, hi = 1;       // range, inclusive
  std::string text;

  // "4", "1,2,8", "1..50", "log2" ({2^j < q} and q), "pinv" (ceil(1/P), ceil(10/P)).
  static HGrid parse(const std::string& text);
  std::vector<std::uint64_t> resolve(const SquarefreeModulus& q) const;
};

struct ExperimentConfig {
  std::string experiment;
  std::vector<std::uint64_t> qs;
  std::string q_text;
  std::vector<std::vector<std::int64_t>> offsets;  // "0,2;0,2,6" gives two sets
  HGrid h;
  std::vector<unsigned> ks;
  std::vector<double> lambdas;
  Centering centering = Centering::exact;
  std::vector<std::uint64_t> xs;
  std::vector<BoundKind> bounds;
  std::string system_path;
  std::string corpus;
  std::string out;
  Format format = Format::json;
  std::string pins;
  // Pin id prefixes to compute; "" selects everything.
  std::vector<std::string> sweeps;
  ComputeOptions options;
  bool timing = true;

  Json to_json() const;
};

// Defaults for one experiment, before any file or flag.
RawConfig default_config(const std::string& experiment);

// threads_env is RESIDUE_LAB_THREADS, used when no "threads" key is set.
ExperimentConfig resolve_config(const std::string& experiment, const RawConfig& raw,
                                const std::optional<std::string>& threads_env = std::nullopt);

}  // namespace residue_lab::runner
