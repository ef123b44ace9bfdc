#pragma once

// Experiment dispatch for the residue-lab runner.

#include <optional>
#include <string>
#include <vector>

#include "residue_lab/runner/config.hpp"
#include "residue_lab/runner/output.hpp"
#include "residue_lab/runner/pins.hpp"

namespace residue_lab::runner {

struct ExperimentOutcome {
  ResultTable table;
  // Assertion failures (identity mismatches, pins exceeded); nonempty means exit 1.
  std::vector<std::string> failures;
  // Set by the pin experiment only.
  std::optional<PinManifest> manifest;
};

// Library errors other than ConfigError propagate to the caller.
ExperimentOutcome run_experiment(const ExperimentConfig& config);

// Tolerance of the identity checks: 1e-9 (1e-8 for the singular series).
inline constexpr double kIdentityTolerance = 1e-9;
inline constexpr double kSingularTolerance = 1e-8;

}  // namespace residue_lab::runner
