#pragma once

#include <cstdint>

namespace residue_lab {

// Resource limits shared by the sieve-backed and enumeration-backed computations.
struct ComputeOptions {
  // Largest sieve (in bits, i.e. largest modulus q) that may be allocated.
  std::uint64_t memory_budget_bits = std::uint64_t{1} << 31;
  // Upper bound on enumerated terms for the exponential-sum evaluators.
  std::uint64_t term_budget = std::uint64_t{200'000'000};
  // Worker threads for the window sweeps; results never depend on this value.
  unsigned threads = 1;
};

}  // namespace residue_lab
