#pragma once

// Squares modulo odd squarefree q, general per-prime class systems with their
// Weyl constants, and the D* construction behind the lower-bound experiment.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "residue_lab/arith.hpp"
#include "residue_lab/options.hpp"
#include "residue_lab/tuples.hpp"

namespace residue_lab {

// Per-prime excluded classes Omega_p; n survives iff n mod p is outside
// Omega_p for every p | q.
struct ResidueClassSystem {
  SquarefreeModulus modulus;
  ClassProfile classes;           // one entry per prime of q, in order
  std::vector<mpq_class> c;       // |Omega_p| / p
  std::vector<double> weyl;       // c'_p, empty until weyl_constants runs
  mpq_class allowed_density;      // prod (1 - c_p)

  // Validates that every prime of q appears once with distinct classes in
  // [0, p) and |Omega_p| < p. Throws InvalidArgument otherwise.
  static ResidueClassSystem make(const SquarefreeModulus& q, ClassProfile classes);

  // {"primes": [p, ...], "classes": {"p": [x, ...]}}; a missing prime means
  // Omega_p is empty. Throws ConfigError on malformed documents.
  static ResidueClassSystem from_json(const nlohmann::json& doc);
  static ResidueClassSystem load(const std::string& path);
  nlohmann::json to_json() const;

  // prod (p - |Omega_p|).
  std::uint64_t allowed_count() const;
};

// {x^2 mod p}, including 0. Throws EvenModulus for p = 2, InvalidArgument
// when p is not prime.
std::vector<std::uint64_t> quadratic_residues(std::uint64_t p);

// The complement of quadratic_residues(p).
std::vector<std::uint64_t> quadratic_nonresidues(std::uint64_t p);

struct CharacterSumMax {
  double value = 0;   // max over a in [1, p) of |sum_{x in set} e(ax/p)|
  std::uint64_t a = 0;
};

// Exhaustive scan over a in [1, p).
CharacterSumMax character_sum_max(std::uint64_t p, const std::vector<std::uint64_t>& set);

// |sum_{x in set} e(ax/p)|.
double character_sum_magnitude(std::uint64_t p, const std::vector<std::uint64_t>& set, std::uint64_t a);

// Fills system.weyl with max_a |sum_{x in Omega_p} e(ax/p)| / sqrt(p).
ResidueClassSystem weyl_constants(ResidueClassSystem system);

struct SquaresProfile {
  SquarefreeModulus modulus;
  ResidueSieve member_sieve;  // bit m set iff m is a square (or 0) modulo every p
  std::uint64_t count = 0;    // prod (p + 1) / 2
  mpq_class density_exact;    // prod (p + 1) / (2p)
  mpq_class density_paper;    // 1 / (2^omega P)
  ClassProfile nonresidues;   // excluded classes of the sieve
};

// Throws EvenModulus when q is even.
SquaresProfile squares_profile(const SquarefreeModulus& q, const ComputeOptions& options = {});

enum class Centering { exact, paper };

std::string to_string(Centering c);
Centering parse_centering(const std::string& name);

// sum_n (W(n) - h c)^2 with W the cyclic window count of squares in (n, n+h].
mpq_class square_window_variance(const SquaresProfile& profile, std::uint64_t h, Centering centering,
                                 const ComputeOptions& options = {});

// The k = 2 exponential-sum evaluation with D_p = negated non-residues.
double square_window_variance_expsum(const SquaresProfile& profile, std::uint64_t h,
                                     const ComputeOptions& options = {});

struct Thm02Report {
  std::uint64_t q = 1;
  std::uint64_t h = 1;
  mpq_class lhs_exact;
  mpq_class lhs_paper;
  mpq_class rhs;  // q h / (2^omega P)
  double ratio_exact = 0;
  double ratio_paper = 0;
};

Thm02Report thm02_check(const SquaresProfile& profile, std::uint64_t h, const ComputeOptions& options = {});

struct Thm41Report {
  std::uint64_t q = 1;
  std::uint64_t h = 1;
  mpq_class lhs;      // exact variance of the surviving count
  double rhs = 0;     // q h prod ((1 - c_p)^2 + c'_p^2)
  double ratio = 0;
};

// Computes the Weyl constants when the system has none. Throws
// PreconditionViolated when some Omega_p leaves no class.
Thm41Report thm41_check(const ResidueClassSystem& system, std::uint64_t h, const ComputeOptions& options = {});

// The survivor sieve of a class system.
ResidueSieve system_sieve(const ResidueClassSystem& system, const ComputeOptions& options = {});

// D*_p = {0, 2, 4, ..., p - 1}.
std::vector<std::uint64_t> dstar_classes(std::uint64_t p);

struct DStar {
  ResidueClassSystem system;  // Omega_p = D*_p, density prod (p - 1) / (2p)
  ResidueSieve members;       // n with n mod p in D*_p for every p
};

// Throws EvenModulus when q is even.
DStar dstar_system(const SquarefreeModulus& q, const ComputeOptions& options = {});

struct Corollary1Row {
  std::uint64_t h = 0;
  mpq_class statistic;  // sum_n (W(n) - h P / 2^omega)^2
  double lower = 0;     // q (h P / 2^omega)^2
  double ratio = 0;
};

struct Corollary1Result {
  std::uint64_t X = 0;
  std::vector<std::uint64_t> primes;  // closest pair first, then fillers
  SquarefreeModulus q;
  std::uint64_t h_min = 0;  // ceil(2^omega / P)
  std::uint64_t h_max = 0;  // floor(X^2 / ln X)
  std::vector<Corollary1Row> rows;
};

// Deterministic choice of floor(ln X) primes in (X, 2X).
std::vector<std::uint64_t> corollary1_primes(std::uint64_t X);

// h_min 2^j below h_max, then h_max.
std::vector<std::uint64_t> corollary1_default_h(std::uint64_t X, const SquarefreeModulus& q);

// Empty hs selects corollary1_default_h. Throws InsufficientPrimes when the
// interval is too thin and BudgetExceeded when q does not fit.
Corollary1Result corollary1_experiment(std::uint64_t X, const std::vector<std::uint64_t>& hs = {},
                                       const ComputeOptions& options = {});

}  // namespace residue_lab
