#pragma once

// Exact elementary number theory for squarefree moduli.
//
// Everything here works on unsigned 64-bit moduli (products are formed in
// 128-bit intermediates) and exact GMP rationals for densities. Factorization
// is by trial division, which is plenty for the q <= 10^12 range the rest of
// the library targets.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace residue_lab {

// A squarefree q together with its factorization and Euler data.
class SquarefreeModulus {
 public:
  // q = 1.
  SquarefreeModulus();

  // Builds from distinct primes (any order). Throws InvalidArgument when a
  // value is not prime or repeats, and when the product overflows 64 bits.
  static SquarefreeModulus from_primes(std::vector<std::uint64_t> primes);

  std::uint64_t value() const { return q_; }
  const std::vector<std::uint64_t>& primes() const { return primes_; }
  std::size_t omega() const { return primes_.size(); }
  std::uint64_t phi() const { return phi_; }
  // P = phi(q)/q in lowest terms.
  const mpq_class& density() const { return density_; }

  bool divisible_by(std::uint64_t p) const;

  bool operator==(const SquarefreeModulus& other) const { return q_ == other.q_; }

 private:
  std::uint64_t q_ = 1;
  std::vector<std::uint64_t> primes_;
  std::uint64_t phi_ = 1;
  mpq_class density_{1};
};

// A divisor r of a squarefree q, carried with its prime set.
struct Divisor {
  std::uint64_t value = 1;
  int mu = 1;
  std::vector<std::uint64_t> primes;
};

// All 2^omega divisors, ordered by the bitmask over q.primes() (so 1 first, q last).
std::vector<Divisor> divisors(const SquarefreeModulus& q);

// Throws NotSquarefree when p^2 | n for some prime p; InvalidArgument for n = 0.
SquarefreeModulus factor_squarefree(std::uint64_t n);

// The squarefree kernel prod_{p | n} p.
SquarefreeModulus radical(std::uint64_t n);

bool is_prime(std::uint64_t n);
bool is_squarefree(std::uint64_t n);

// Distinct prime divisors in increasing order.
std::vector<std::uint64_t> prime_divisors(std::uint64_t n);

int moebius(std::uint64_t n);
std::uint64_t totient(std::uint64_t n);

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b);

// Reduces any signed integer into [0, m).
std::uint64_t mod_reduce(std::int64_t a, std::uint64_t m);

// Inverse of a modulo m in [0, m). Throws NonInvertible when gcd(a, m) != 1.
std::uint64_t mod_inverse(std::int64_t a, std::uint64_t m);

struct Congruence {
  std::int64_t residue = 0;
  std::uint64_t modulus = 1;
};

// The unique x in [0, prod m_i) with x = r_i (mod m_i). Throws
// NonCoprimeModuli when two moduli share a factor.
std::uint64_t crt_combine(std::span<const Congruence> system);

// Primes p with lo <= p <= hi, ascending, by a segmented sieve.
std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi);

// The product of the first n primes.
SquarefreeModulus primorial(std::size_t n);

// All squarefree q with lo <= q <= hi.
std::vector<std::uint64_t> squarefree_in_range(std::uint64_t lo, std::uint64_t hi);

mpz_class to_mpz(std::uint64_t v);
mpz_class to_mpz(std::int64_t v);

// num/den in lowest terms (den != 0).
mpq_class make_rational(const mpz_class& num, const mpz_class& den);

// "num/den" for a rational; integers print as "num/1".
std::string to_fraction_string(const mpq_class& value);

// Nearest double (GMP's get_d truncates).
double to_double(const mpz_class& value);
double to_double(const mpq_class& value);

// Rational power with a non-negative exponent.
mpq_class pow_rational(const mpq_class& base, unsigned exponent);

}  // namespace residue_lab
