#pragma once

// Exponential sums behind the tuple expansions: e(x), E_h, F, mu_D, the
// expansions of k_q and of tuple indicator products, the singular-series sum,
// and the representation counts and correlation sums.
//
// Fractions enter as exact numerator/denominator pairs and are reduced mod 1
// before any conversion to floating point.

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "residue_lab/arith.hpp"
#include "residue_lab/options.hpp"
#include "residue_lab/tuples.hpp"

namespace residue_lab {

using Complex = std::complex<double>;

// The class of a/r in Q/Z, kept with 0 <= a < r.
struct FractionModOne {
  std::uint64_t a = 0;
  std::uint64_t r = 1;

  // Any integer numerator; r >= 1 (InvalidArgument otherwise).
  static FractionModOne make(std::int64_t a, std::uint64_t r);

  // Lowest terms; the zero class becomes 0/1.
  FractionModOne reduced() const;
  bool is_zero() const { return a == 0; }
  double value() const { return static_cast<double>(a) / static_cast<double>(r); }

  // Equality of classes (1/2 == 2/4).
  bool operator==(const FractionModOne& other) const;
};

// e(a/r) = exp(2 pi i a/r), reduced exactly first.
Complex e(const FractionModOne& x);
Complex e(std::int64_t a, std::uint64_t r);

// Compensated (Neumaier) accumulation.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(Complex z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  Complex value() const { return {re_.value(), im_.value()}; }

 private:
  CompensatedSum re_, im_;
};

// A floating evaluation together with the number of terms it accumulated.
struct ExpSumValue {
  Complex value;
  std::uint64_t terms = 0;

  // 1e-12 * terms + 1e-9.
  double tolerance() const;
};

// 1 iff gcd(m, q) = 1.
int kq_indicator(const SquarefreeModulus& q, std::int64_t m);

// P sum_{r|q} mu(r)/phi(r) sum_{0<a<=r, (a,r)=1} e(ma/r).
ExpSumValue kq_expansion(const SquarefreeModulus& q, std::int64_t m);

// E_h(x) = sum_{m=1}^{h} e(mx); exactly h when x is an integer.
Complex E_h(const FractionModOne& x, std::uint64_t h);
Complex E_h(double x, std::uint64_t h);

// |E_h(a/r)|^2 computed as sin^2(pi h a/r) / sin^2(pi a/r).
double E_h_norm2(const FractionModOne& x, std::uint64_t h);

// min(h, 1/||x||), with F(0) = h.
double F(const FractionModOne& x, std::uint64_t h);
double F(double x, std::uint64_t h);

// Per-prime factors of mu_D for one squarefree r. The factor at p is
// sum_{s in D_p} e(s b / p) for b = a (r/p)^{-1} mod p.
class CharacterSumProfile {
 public:
  // D_p = offsets reduced mod p.
  static CharacterSumProfile from_offsets(const OffsetSet& offsets, std::uint64_t r);
  // D_p = -Omega_p for a profile of excluded classes Omega_p (every prime of r
  // must appear). from_excluded(excluded_classes(q, D), r) matches from_offsets(D, r).
  static CharacterSumProfile from_excluded(const ClassProfile& excluded, std::uint64_t r);

  std::uint64_t r() const { return r_; }
  const std::vector<std::uint64_t>& primes() const { return primes_; }
  // Table of the factor at primes()[i], indexed by b in [0, p).
  const std::vector<Complex>& per_prime(std::size_t i) const { return tables_[i]; }

  // mu_D(a, r). Throws NonCoprime when gcd(a, r) != 1.
  Complex value(std::int64_t a) const;
  // |mu_D(a, r)|^2 as a product of per-prime squared magnitudes.
  double norm2(std::int64_t a) const;
  // prod_p |D_p|, the bound s^omega(r) specialised to this profile.
  double magnitude_bound() const;

 private:
  static CharacterSumProfile from_residue_sets(
      std::uint64_t r, const std::function<std::vector<std::uint64_t>(std::uint64_t)>& classes_at);
  std::uint64_t residue_index(std::uint64_t a, std::size_t i) const;

  std::uint64_t r_ = 1;
  std::vector<std::uint64_t> primes_;
  std::vector<std::uint64_t> cofactor_inverse_;  // (r/p)^{-1} mod p
  std::vector<std::size_t> class_sizes_;
  std::vector<std::vector<Complex>> tables_;
  std::vector<std::vector<double>> norms_;
};

// mu_D(a, r) for squarefree r. Throws NonCoprime when gcd(a, r) != 1.
Complex mu_D(const OffsetSet& offsets, std::int64_t a, std::uint64_t r);

// P_D sum_{r|q} mu(r)/phi_D(r) sum_{(a,r)=1} e(ma/r) mu_D(a,r), which equals
// prod_i k_q(m + h_i). Throws ZeroDensity when phi_D(q) = 0.
ExpSumValue product_expansion(const SquarefreeModulus& q, const OffsetSet& offsets, std::int64_t m);

// sum over r_1..r_s | q of prod mu(r_i)/phi(r_i) times the sum over reduced
// a_i/r_i adding up to an integer of e(sum h_i a_i / r_i). Throws
// BudgetExceeded when the enumeration would exceed options.term_budget.
ExpSumValue singular_series_expsum(const SquarefreeModulus& q, const OffsetSet& offsets,
                                   const ComputeOptions& options = {});

// counts[t] = #{(a_1..a_s) : 0 < a_i <= r_i, sum a_i/r_i = t/L mod 1} with L = lcm(r_i).
std::vector<std::uint64_t> representation_histogram(std::span<const std::uint64_t> denominators,
                                                    const ComputeOptions& options = {});

// The number of such tuples hitting target mod 1.
std::uint64_t representation_count(std::span<const std::uint64_t> denominators,
                                   const FractionModOne& target, const ComputeOptions& options = {});

// prod r_i / lcm(r_i).
std::uint64_t representation_multiplicity(std::span<const std::uint64_t> denominators);

// max over q, h <= 2000 of f_correlation(q, h) / (q min(q, h)); attained at q = 2000, h = 91.
inline constexpr double kCorrelationConstant = 3.911142816368851;

struct CorrelationValue {
  mpq_class value;  // sum_{0<a<q} F(a/q)^2
  double ratio = 0; // value / (q min(q, h))
};

CorrelationValue f_correlation(std::uint64_t q, std::uint64_t h);

// Largest ratio over 2 <= q <= q_max, 1 <= h <= h_max, in O(q_max h_max).
struct CorrelationMax {
  double ratio = 0;
  std::uint64_t q = 0;
  std::uint64_t h = 0;
};
CorrelationMax f_correlation_max(std::uint64_t q_max, std::uint64_t h_max);

// G_0(q) = C min(q, h).
double correlation_envelope(std::uint64_t q, std::uint64_t h, double constant = kCorrelationConstant);

struct ConstrainedSum {
  double lhs = 0;          // sum over 0 < a_i < q_i with sum a_i/q_i integral of prod F(a_i/q_i)
  double rhs = 0;          // (1/d) prod q_i G_0(q_i)^{1/2}, d = lcm(q_i)
  std::uint64_t lcm = 1;
  bool holds = false;      // lhs <= rhs
};

// Each q_i > 1 and squarefree.
ConstrainedSum constrained_product_sum(std::span<const std::uint64_t> moduli, std::uint64_t h,
                                       const ComputeOptions& options = {},
                                       double constant = kCorrelationConstant);

}  // namespace residue_lab
