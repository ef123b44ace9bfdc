#pragma once

// Data-parallel inner loops behind the sieve and window sweeps.
//
// Every kernel has a scalar reference implementation; wider variants must be
// bit-identical to it (tests/unit/test_kernels.cpp enforces this). The active
// set is chosen once at startup from the CPU features and can be pinned with
// RESIDUE_LAB_KERNELS=scalar|avx2 or force().

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace residue_lab::kernels {

// Extra words a pattern buffer must carry past its period (a copy of its
// first words) so that vector loads never need to wrap.
inline constexpr std::size_t kPatternPadWords = 4;

struct KernelSet {
  const char* name;

  // Number of set bits in words[0, n).
  std::uint64_t (*popcount)(const std::uint64_t* words, std::size_t n);

  // dst[i] &= pattern[(phase + i) mod period] for i in [0, n). The pattern
  // buffer holds period + kPatternPadWords words.
  void (*and_periodic)(std::uint64_t* dst, std::size_t n, const std::uint64_t* pattern,
                       std::size_t period, std::size_t phase);

  // Sliding-window recurrence. With d_j = lead_j - trail_j (bits of the two
  // streams), writes out[i] = w0 + sum_{j<i} d_j for i in [0, nbits) and
  // returns w0 + sum_{j<nbits} d_j. Arithmetic is modulo 2^32.
  std::uint32_t (*window_run)(const std::uint64_t* lead, const std::uint64_t* trail,
                              std::size_t nbits, std::uint32_t w0, std::uint32_t* out);
};

const KernelSet& scalar();

// nullptr when the variant was not compiled in or the CPU lacks the feature.
const KernelSet* avx2();

// The set used by the library.
const KernelSet& active();

// "scalar", "avx2" or "auto". Throws InvalidArgument for an unknown or
// unavailable variant.
void force(std::string_view name);

}  // namespace residue_lab::kernels
