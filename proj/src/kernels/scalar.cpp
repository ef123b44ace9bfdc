#include "kernels_internal.hpp"

#include <bit>

namespace residue_lab::kernels {

namespace {

std::uint64_t popcount_scalar(const std::uint64_t* words, std::size_t n) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) total += static_cast<std::uint64_t>(std::popcount(words[i]));
  return total;
}

void and_periodic_scalar(std::uint64_t* dst, std::size_t n, const std::uint64_t* pattern,
                         std::size_t period, std::size_t phase) {
  std::size_t k = phase % period;
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] &= pattern[k];
    if (++k == period) k = 0;
  }
}

std::uint32_t window_run_scalar(const std::uint64_t* lead, const std::uint64_t* trail,
                                std::size_t nbits, std::uint32_t w0, std::uint32_t* out) {
  std::uint32_t w = w0;
  for (std::size_t j = 0; j < nbits; ++j) {
    out[j] = w;
    const std::uint32_t in = static_cast<std::uint32_t>((lead[j >> 6] >> (j & 63)) & 1u);
    const std::uint32_t gone = static_cast<std::uint32_t>((trail[j >> 6] >> (j & 63)) & 1u);
    w = w + in - gone;
  }
  return w;
}

}  // namespace

const KernelSet kScalarKernels{"scalar", popcount_scalar, and_periodic_scalar, window_run_scalar};

const KernelSet& scalar() { return kScalarKernels; }

}  // namespace residue_lab::kernels
