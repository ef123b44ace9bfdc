#pragma once

// Window moments of tuple starts, their k = 2 exponential-sum form, binomial
// central moments, and evaluators for the stated upper bounds.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "residue_lab/arith.hpp"
#include "residue_lab/options.hpp"
#include "residue_lab/tuples.hpp"

namespace residue_lab {

inline constexpr unsigned kMaxMomentOrder = 8;

// M_k^D(q, h) = sum_{n mod q} (W(n) - h P_D)^k.
struct WindowMoment {
  std::uint64_t q = 1;
  std::vector<std::int64_t> offsets;  // empty for moments of a class system
  std::uint64_t h = 0;
  unsigned k = 0;
  mpq_class value;
  mpz_class scaled_numerator;  // sum_n (q W(n) - h phi_D)^k, so value = scaled_numerator / q^k
  double float_value = 0;
};

// sum_n (den W(n) - h num)^k over a full period, for each k. The scaled
// numerators are exact; value = scaled / den^k in lowest terms.
struct CenteredMoment {
  unsigned k = 0;
  mpz_class scaled_numerator;
  mpq_class value;
};

std::vector<CenteredMoment> centered_window_moments(const ResidueSieve& sieve, std::uint64_t h,
                                                    std::span<const unsigned> ks, const mpz_class& num,
                                                    const mpz_class& den, const ComputeOptions& options = {});

// 1 <= k <= 8 (InvalidArgument otherwise). Throws BudgetExceeded when the
// sieve does not fit.
WindowMoment moment_direct(const SquarefreeModulus& q, const OffsetSet& offsets, std::uint64_t h, unsigned k,
                           const ComputeOptions& options = {});

// Several orders from one sweep.
std::vector<WindowMoment> moments_direct(const SquarefreeModulus& q, const OffsetSet& offsets, std::uint64_t h,
                                         std::span<const unsigned> ks, const ComputeOptions& options = {});

// q P_D^2 sum_{r|q, r>1} phi_D(r)^{-2} sum_{(a,r)=1} |E_h(a/r)|^2 |mu_D(a,r)|^2.
// Throws ZeroDensity when phi_D(q) = 0 and BudgetExceeded when q exceeds
// options.term_budget.
double moment_expsum_k2(const SquarefreeModulus& q, const OffsetSet& offsets, std::uint64_t h,
                        const ComputeOptions& options = {});

// The same sum for an arbitrary profile of excluded classes (D_p = -Omega_p).
double moment_expsum_k2(const SquarefreeModulus& q, const ClassProfile& excluded, std::uint64_t h,
                        const ComputeOptions& options = {});

// Stirling numbers of the second kind, S(0,0) = 1 and S(r,0) = 0 for r >= 1.
mpz_class stirling2(unsigned r, unsigned t);

// E[(X - hP)^k] for X ~ Binomial(h, P), by the Stirling expansion of the raw moments.
mpq_class binomial_moment(std::uint64_t h, const mpq_class& P, unsigned k);

enum class BoundKind { lemma12, lemma21, lemma31, thm42_small_h, thm42_general, mv_mu_k };

std::string to_string(BoundKind kind);
// Throws InvalidArgument for an unknown name.
BoundKind parse_bound_kind(const std::string& name);

struct BoundParams {
  SquarefreeModulus q;
  std::uint64_t h = 1;
  unsigned k = 2;
  unsigned s = 1;
  // Replaces phi(q)/q (mv_mu_k is usually called with an explicit P).
  std::optional<mpq_class> P;
  // Split point for lemma31; defaults to h^k + 1.
  std::optional<double> y;
  // Upper exponent in h^k < y < h^A; defaults to k + 1.
  std::optional<double> A;
  std::optional<double> observed;
};

struct BoundReport {
  BoundKind kind = BoundKind::lemma12;
  std::uint64_t q = 1;
  std::uint64_t h = 1;
  unsigned k = 2;
  unsigned s = 1;
  std::optional<double> y;
  std::optional<std::uint64_t> q1, q2;
  // The right-hand sides can be astronomically large, so the log is primary.
  double log_bound = 0;
  double bound_value = 0;  // exp(log_bound); +inf past double range
  std::optional<double> observed;
  std::optional<double> ratio;
};

// Throws PreconditionViolated naming the failed hypothesis.
BoundReport theoretical_bound(BoundKind kind, const BoundParams& params);

}  // namespace residue_lab
