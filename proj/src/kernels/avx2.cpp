// AVX2 variants. This translation unit alone is compiled with -mavx2; nothing
// here may run before dispatch.cpp has confirmed CPU support.

#include "kernels_internal.hpp"

#include <immintrin.h>

#include <cstring>

namespace residue_lab::kernels {

namespace {

std::uint64_t popcount_avx2(const std::uint64_t* words, std::size_t n) {
  // Nibble lookup (Mula et al.), folded into 64-bit lanes with vpsadbw.
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4,
                                          0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  const __m256i zero = _mm256_setzero_si256();
  __m256i acc = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(words + i));
    const __m256i lo = _mm256_and_si256(v, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    const __m256i counts =
        _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(counts, zero));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < n; ++i) total += static_cast<std::uint64_t>(_mm_popcnt_u64(words[i]));
  return total;
}

void and_periodic_avx2(std::uint64_t* dst, std::size_t n, const std::uint64_t* pattern,
                       std::size_t period, std::size_t phase) {
  std::size_t k = phase % period;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256i pat = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(pattern + k));
    auto* slot = reinterpret_cast<__m256i*>(dst + i);
    _mm256_storeu_si256(slot, _mm256_and_si256(_mm256_loadu_si256(slot), pat));
    k += 4;
    if (k >= period) k %= period;
  }
  for (; i < n; ++i) {
    dst[i] &= pattern[k];
    if (++k == period) k = 0;
  }
}

std::uint32_t window_run_avx2(const std::uint64_t* lead, const std::uint64_t* trail,
                              std::size_t nbits, std::uint32_t w0, std::uint32_t* out) {
  const auto* lead_bytes = reinterpret_cast<const std::uint8_t*>(lead);
  const auto* trail_bytes = reinterpret_cast<const std::uint8_t*>(trail);
  const __m256i bit_select = _mm256_setr_epi32(1, 2, 4, 8, 16, 32, 64, 128);
  const __m256i lane3 = _mm256_set1_epi32(3);
  const __m256i lane7 = _mm256_set1_epi32(7);
  __m256i base = _mm256_set1_epi32(static_cast<int>(w0));

  std::size_t j = 0;
  for (; j + 8 <= nbits; j += 8) {
    const __m256i lb = _mm256_set1_epi32(lead_bytes[j >> 3]);
    const __m256i tb = _mm256_set1_epi32(trail_bytes[j >> 3]);
    // -1 in lanes whose bit is set.
    const __m256i lm = _mm256_cmpeq_epi32(_mm256_and_si256(lb, bit_select), bit_select);
    const __m256i tm = _mm256_cmpeq_epi32(_mm256_and_si256(tb, bit_select), bit_select);
    const __m256i d = _mm256_sub_epi32(tm, lm);

    // Inclusive prefix sum over the 8 lanes.
    __m256i x = _mm256_add_epi32(d, _mm256_slli_si256(d, 4));
    x = _mm256_add_epi32(x, _mm256_slli_si256(x, 8));
    const __m256i carry =
        _mm256_blend_epi32(_mm256_setzero_si256(), _mm256_permutevar8x32_epi32(x, lane3), 0xF0);
    x = _mm256_add_epi32(x, carry);

    const __m256i exclusive = _mm256_sub_epi32(x, d);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + j), _mm256_add_epi32(base, exclusive));
    base = _mm256_add_epi32(base, _mm256_permutevar8x32_epi32(x, lane7));
  }

  auto w = static_cast<std::uint32_t>(_mm256_cvtsi256_si32(base));
  for (; j < nbits; ++j) {
    out[j] = w;
    const std::uint32_t in = static_cast<std::uint32_t>((lead[j >> 6] >> (j & 63)) & 1u);
    const std::uint32_t gone = static_cast<std::uint32_t>((trail[j >> 6] >> (j & 63)) & 1u);
    w = w + in - gone;
  }
  return w;
}

}  // namespace

const KernelSet kAvx2Kernels{"avx2", popcount_avx2, and_periodic_avx2, window_run_avx2};

}  // namespace residue_lab::kernels
