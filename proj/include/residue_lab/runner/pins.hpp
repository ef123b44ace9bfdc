#pragma once

// Oracle-pin manifests: empirically measured extremal ratios that later runs
// are checked against with a relative margin.

#include <optional>
#include <string>
#include <vector>

#include "residue_lab/options.hpp"
#include "residue_lab/runner/output.hpp"

namespace residue_lab::runner {

inline constexpr double kPinMargin = 0.05;

enum class PinKind { max, min };

struct PinEntry {
  std::string id;
  PinKind kind = PinKind::max;
  double value = 0;
  Json where = Json::object();  // where the extremum was attained
};

struct PinManifest {
  double margin = kPinMargin;
  std::vector<PinEntry> pins;

  const PinEntry* find(const std::string& id) const;
  Json to_json() const;
  static PinManifest from_json(const Json& doc);
  // Throws ConfigError.
  static PinManifest load(const std::string& path);
  void save(const std::string& path) const;
};

// max pins: observed <= value (1 + margin); min pins: observed >= value (1 - margin).
bool pin_respected(const PinEntry& pin, double observed, double margin = kPinMargin);

// One sweep's extremum.
struct SweepResult {
  double value = 0;
  Json where = Json::object();
};

// max over primorials with omega in [1, omega_max] of erdos_ratio(q, D, lambda).
SweepResult erdos_sweep(const std::vector<std::int64_t>& offsets, double lambda, unsigned omega_max = 6,
                        const ComputeOptions& options = {});

// max over odd squarefree q in [3, q_max], h in {2^j < q} and q, of the
// exact-centering square-window ratio.
SweepResult thm02_sweep(std::uint64_t q_max = 2000, const ComputeOptions& options = {});

// max over q in {6, 30, 210, 2310, 30030}, D = {0,2}, h in {ceil(1/P), ceil(10/P)}
// of moment_direct / theoretical_bound(kind).
SweepResult moment_ratio_sweep(const std::string& kind, unsigned k, const ComputeOptions& options = {});

// min over the default h grid of the corollary1 ratio.
SweepResult corollary1_sweep(std::uint64_t X, const ComputeOptions& options = {});

// Pinned sweeps in a fixed order, restricted to ids starting with one of the
// prefixes ("" matches all; no prefixes gives an empty manifest).
PinManifest compute_pin_manifest(const ComputeOptions& options = {},
                                 const std::vector<std::string>& prefixes = {""});

}  // namespace residue_lab::runner
