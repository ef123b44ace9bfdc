#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "residue_lab/arith.hpp"
#include "residue_lab/options.hpp"

namespace residue_lab {

// An offset set D = {h_1 < ... < h_s}. Offsets may be negative.
class OffsetSet {
 public:
  // Sorts the input. Throws InvalidArgument on an empty list or a repeated offset.
  explicit OffsetSet(std::vector<std::int64_t> offsets);

  // Parses a comma-separated list such as "0,2,6" (whitespace allowed).
  static OffsetSet parse(std::string_view text);

  const std::vector<std::int64_t>& offsets() const { return offsets_; }
  std::size_t size() const { return offsets_.size(); }
  // h_s - h_1.
  std::uint64_t span() const;
  // Distinct residues {h mod p}, ascending.
  std::vector<std::uint64_t> residues_mod(std::uint64_t p) const;
  // "0,2,6".
  std::string to_string() const;

  bool operator==(const OffsetSet&) const = default;

 private:
  std::vector<std::int64_t> offsets_;
};

// nu_p(D): number of distinct residues of D modulo p.
std::uint64_t nu_p(const OffsetSet& offsets, std::uint64_t p);

// Admissible over every prime (only p <= s can fail).
bool is_admissible(const OffsetSet& offsets);
// Admissible over the primes dividing q.
bool is_admissible(const OffsetSet& offsets, const SquarefreeModulus& q);

// Densities of the s-tuple starts modulo q, all exact.
struct TupleDensity {
  std::uint64_t phi_D = 0;   // prod (p - nu_p(D))
  mpq_class P_D;             // phi_D / q
  mpq_class singular;        // prod (1 - 1/p)^-s (1 - nu_p(D)/p)
  mpq_class P_pow_s;         // (phi(q)/q)^s
};

TupleDensity density(const SquarefreeModulus& q, const OffsetSet& offsets);

// Residue classes mod p that disqualify n.
struct ExcludedClasses {
  std::uint64_t p = 0;
  std::vector<std::uint64_t> residues;  // ascending, distinct, in [0, p)
};

// One entry per prime of q, in q.primes() order.
using ClassProfile = std::vector<ExcludedClasses>;

// n is excluded at p iff p | n + h for some h in D, i.e. n = -h (mod p).
ClassProfile excluded_classes(const SquarefreeModulus& q, const OffsetSet& offsets);

// phi of a profile: prod over p | r of (p - |excluded_p|), restricted to the primes of r.
std::uint64_t allowed_count(const ClassProfile& profile, std::span<const std::uint64_t> primes);

// Bit n (0 <= n < q) is set iff n avoids every excluded class. Immutable once built.
class ResidueSieve {
 public:
  // Throws BudgetExceeded when q exceeds options.memory_budget_bits.
  static ResidueSieve build(const SquarefreeModulus& q, const ClassProfile& profile,
                            const ComputeOptions& options = {});

  std::uint64_t modulus() const { return q_; }
  std::uint64_t popcount() const { return popcount_; }
  bool test(std::uint64_t n) const { return (words_[n >> 6] >> (n & 63)) & 1u; }
  // ceil(q/64) words followed by one zero word.
  std::span<const std::uint64_t> words() const { return words_; }
  std::vector<std::uint64_t> members() const;

  // Set bits among n, n+1, ..., n+len-1 taken mod q (len <= q).
  std::uint64_t count_cyclic(std::uint64_t start, std::uint64_t len) const;
  // out bit j = t((start + j) mod q) for j < nbits.
  void extract_cyclic(std::uint64_t start, std::size_t nbits, std::uint64_t* out) const;

 private:
  std::uint64_t count_linear(std::uint64_t begin, std::uint64_t end) const;
  std::uint64_t read_linear(std::uint64_t pos, unsigned count) const;

  std::uint64_t q_ = 1;
  std::uint64_t popcount_ = 0;
  std::vector<std::uint64_t> words_;
};

// The tuple-start sieve: bit n set iff gcd(n + h_i, q) = 1 for all i.
using TupleStartSieve = ResidueSieve;

TupleStartSieve sieve_tuple_starts(const SquarefreeModulus& q, const OffsetSet& offsets,
                                   const ComputeOptions& options = {});

// W(n) = sum_{m=1}^{h} t((n + m) mod q) for n in [0, q). Requires 1 <= h < 2^32.
std::vector<std::uint32_t> window_counts(const ResidueSieve& sieve, std::uint64_t h,
                                         const ComputeOptions& options = {});

// Distribution of W over n in [0, q): counts[i] = #{n : W(n) = base + i}.
struct WindowHistogram {
  std::uint64_t base = 0;
  std::vector<std::uint64_t> counts;
};

WindowHistogram window_histogram(const ResidueSieve& sieve, std::uint64_t h,
                                 const ComputeOptions& options = {});

}  // namespace residue_lab
