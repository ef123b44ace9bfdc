#include "residue_lab/special_sets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "residue_lab/error.hpp"
#include "residue_lab/identities.hpp"
#include "residue_lab/moments.hpp"

namespace residue_lab {

namespace {

void require_odd(const SquarefreeModulus& q) {
  if (q.divisible_by(2)) {
    throw EvenModulus("modulus " + std::to_string(q.value()) + " is even; every residue is a square mod 2");
  }
}

mpq_class window_variance(const ResidueSieve& sieve, std::uint64_t h, const mpz_class& num, const mpz_class& den,
                          const ComputeOptions& options) {
  const unsigned k2[] = {2};
  return centered_window_moments(sieve, h, k2, num, den, options).front().value;
}

std::vector<std::uint64_t> complement(std::uint64_t p, const std::vector<std::uint64_t>& set) {
  std::vector<bool> in(p, false);
  for (auto x : set) in[x] = true;
  std::vector<std::uint64_t> out;
  for (std::uint64_t x = 0; x < p; ++x) {
    if (!in[x]) out.push_back(x);
  }
  return out;
}

double ratio_of(const mpq_class& num, const mpq_class& den) {
  if (den == 0) return 0.0;
  return to_double(mpq_class(num / den));
}

}  // namespace

ResidueClassSystem ResidueClassSystem::make(const SquarefreeModulus& q, ClassProfile classes) {
  ResidueClassSystem out;
  out.modulus = q;
  out.allowed_density = 1;
  for (auto p : q.primes()) {
    const auto it = std::find_if(classes.begin(), classes.end(), [p](const ExcludedClasses& ec) { return ec.p == p; });
    if (it == classes.end()) throw InvalidArgument("class system lacks prime " + std::to_string(p));
    auto residues = it->residues;
    std::sort(residues.begin(), residues.end());
    if (std::adjacent_find(residues.begin(), residues.end()) != residues.end()) {
      throw InvalidArgument("repeated class modulo " + std::to_string(p));
    }
    if (!residues.empty() && residues.back() >= p) {
      throw InvalidArgument("class " + std::to_string(residues.back()) + " is not reduced modulo " + std::to_string(p));
    }
    if (residues.size() >= p) throw InvalidArgument("Omega_" + std::to_string(p) + " covers every class");
    out.c.emplace_back(to_mpz(residues.size()), to_mpz(p));
    out.c.back().canonicalize();
    out.allowed_density *= 1 - out.c.back();
    out.classes.push_back({p, std::move(residues)});
  }
  if (classes.size() != q.omega()) throw InvalidArgument("class system names a prime that does not divide q");
  return out;
}

ResidueClassSystem ResidueClassSystem::from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object() || !doc.contains("primes")) throw ConfigError("class system needs a \"primes\" array");
    std::vector<std::uint64_t> primes;
    for (const auto& p : doc.at("primes")) {
      if (!p.is_number_unsigned()) throw ConfigError("\"primes\" entries must be positive integers");
      primes.push_back(p.get<std::uint64_t>());
    }
    const auto q = SquarefreeModulus::from_primes(primes);
    ClassProfile classes;
    for (auto p : q.primes()) classes.push_back({p, {}});
    if (doc.contains("classes")) {
      const auto& cls = doc.at("classes");
      if (!cls.is_object()) throw ConfigError("\"classes\" must be an object keyed by prime");
      for (const auto& [key, values] : cls.items()) {
        std::uint64_t p = 0;
        try {
          p = std::stoull(key);
        } catch (const std::exception&) {
          throw ConfigError("\"classes\" key '" + key + "' is not an integer");
        }
        const auto it = std::find_if(classes.begin(), classes.end(), [p](const ExcludedClasses& ec) { return ec.p == p; });
        if (it == classes.end()) throw ConfigError("\"classes\" key " + key + " is not one of the primes");
        for (const auto& x : values) {
          if (!x.is_number_integer()) throw ConfigError("classes." + key + " must hold integers");
          it->residues.push_back(mod_reduce(x.get<std::int64_t>(), p));
        }
      }
    }
    return make(q, std::move(classes));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& err) {
    throw ConfigError(std::string("class system: ") + err.what());
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError(std::string("class system: ") + err.what());
  }
}

ResidueClassSystem ResidueClassSystem::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open class system file " + path);
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError("class system file " + path + ": " + err.what());
  }
}

nlohmann::json ResidueClassSystem::to_json() const {
  nlohmann::json doc;
  doc["primes"] = modulus.primes();
  doc["classes"] = nlohmann::json::object();
  for (const auto& ec : classes) doc["classes"][std::to_string(ec.p)] = ec.residues;
  return doc;
}

std::uint64_t ResidueClassSystem::allowed_count() const {
  return residue_lab::allowed_count(classes, modulus.primes());
}

std::vector<std::uint64_t> quadratic_residues(std::uint64_t p) {
  if (p == 2) throw EvenModulus("quadratic residues are only used for odd primes");
  if (!is_prime(p)) throw InvalidArgument(std::to_string(p) + " is not prime");
  std::vector<bool> seen(p, false);
  for (std::uint64_t x = 0; x <= p / 2; ++x) seen[x * x % p] = true;
  std::vector<std::uint64_t> out;
  for (std::uint64_t x = 0; x < p; ++x) {
    if (seen[x]) out.push_back(x);
  }
  return out;
}

std::vector<std::uint64_t> quadratic_nonresidues(std::uint64_t p) { return complement(p, quadratic_residues(p)); }

double character_sum_magnitude(std::uint64_t p, const std::vector<std::uint64_t>& set, std::uint64_t a) {
  CompensatedComplexSum sum;
  for (auto x : set) sum.add(e(FractionModOne{(a % p) * (x % p) % p, p}));
  return std::abs(sum.value());
}

CharacterSumMax character_sum_max(std::uint64_t p, const std::vector<std::uint64_t>& set) {
  // One table of p-th roots of unity serves every a.
  std::vector<Complex> roots(p);
  for (std::uint64_t j = 0; j < p; ++j) roots[j] = e(FractionModOne{j, p});
  CharacterSumMax best;
  for (std::uint64_t a = 1; a < p; ++a) {
    CompensatedComplexSum sum;
    for (auto x : set) sum.add(roots[(a * (x % p)) % p]);
    const double v = std::abs(sum.value());
    if (v > best.value) best = {v, a};
  }
  return best;
}

ResidueClassSystem weyl_constants(ResidueClassSystem system) {
  system.weyl.clear();
  for (const auto& ec : system.classes) {
    const double root = std::sqrt(static_cast<double>(ec.p));
    system.weyl.push_back(ec.residues.empty() ? 0.0 : character_sum_max(ec.p, ec.residues).value / root);
  }
  return system;
}

SquaresProfile squares_profile(const SquarefreeModulus& q, const ComputeOptions& options) {
  require_odd(q);
  SquaresProfile out;
  out.modulus = q;
  out.count = 1;
  out.density_exact = 1;
  for (auto p : q.primes()) {
    out.nonresidues.push_back({p, quadratic_nonresidues(p)});
    out.count *= (p + 1) / 2;
    out.density_exact *= make_rational(to_mpz(p + 1), to_mpz(2 * p));
  }
  out.density_exact.canonicalize();
  mpz_class two_pow;
  mpz_ui_pow_ui(two_pow.get_mpz_t(), 2, q.omega());
  out.density_paper = 1 / (mpq_class(two_pow) * q.density());
  out.density_paper.canonicalize();
  out.member_sieve = ResidueSieve::build(q, out.nonresidues, options);
  return out;
}

std::string to_string(Centering c) { return c == Centering::exact ? "exact" : "paper"; }

Centering parse_centering(const std::string& name) {
  if (name == "exact") return Centering::exact;
  if (name == "paper") return Centering::paper;
  throw InvalidArgument("centering must be exact or paper, got " + name);
}

mpq_class square_window_variance(const SquaresProfile& profile, std::uint64_t h, Centering centering,
                                 const ComputeOptions& options) {
  const mpq_class& c = centering == Centering::exact ? profile.density_exact : profile.density_paper;
  return window_variance(profile.member_sieve, h, c.get_num(), c.get_den(), options);
}

double square_window_variance_expsum(const SquaresProfile& profile, std::uint64_t h, const ComputeOptions& options) {
  return moment_expsum_k2(profile.modulus, profile.nonresidues, h, options);
}

Thm02Report thm02_check(const SquaresProfile& profile, std::uint64_t h, const ComputeOptions& options) {
  Thm02Report out;
  out.q = profile.modulus.value();
  out.h = h;
  out.lhs_exact = square_window_variance(profile, h, Centering::exact, options);
  out.lhs_paper = square_window_variance(profile, h, Centering::paper, options);
  out.rhs = mpq_class(to_mpz(out.q) * to_mpz(h)) * profile.density_paper;
  out.rhs.canonicalize();
  out.ratio_exact = ratio_of(out.lhs_exact, out.rhs);
  out.ratio_paper = ratio_of(out.lhs_paper, out.rhs);
  return out;
}

ResidueSieve system_sieve(const ResidueClassSystem& system, const ComputeOptions& options) {
  return ResidueSieve::build(system.modulus, system.classes, options);
}

Thm41Report thm41_check(const ResidueClassSystem& system, std::uint64_t h, const ComputeOptions& options) {
  for (const auto& ec : system.classes) {
    if (ec.residues.size() >= ec.p) {
      throw PreconditionViolated("p - |Omega_p| >= 1 fails at p = " + std::to_string(ec.p));
    }
  }
  const ResidueClassSystem filled = system.weyl.size() == system.classes.size() ? system : weyl_constants(system);
  Thm41Report out;
  out.q = system.modulus.value();
  out.h = h;
  const auto sieve = system_sieve(filled, options);
  out.lhs = window_variance(sieve, h, to_mpz(filled.allowed_count()), to_mpz(out.q), options);
  double rhs = static_cast<double>(out.q) * static_cast<double>(h);
  for (std::size_t i = 0; i < filled.classes.size(); ++i) {
    const double one_minus_c = 1.0 - to_double(filled.c[i]);
    rhs *= one_minus_c * one_minus_c + filled.weyl[i] * filled.weyl[i];
  }
  out.rhs = rhs;
  out.ratio = to_double(out.lhs) / rhs;
  return out;
}

std::vector<std::uint64_t> dstar_classes(std::uint64_t p) {
  if (p == 2) throw EvenModulus("D* is defined for odd primes");
  std::vector<std::uint64_t> out;
  for (std::uint64_t x = 0; x < p; x += 2) out.push_back(x);
  return out;
}

DStar dstar_system(const SquarefreeModulus& q, const ComputeOptions& options) {
  require_odd(q);
  ClassProfile dstar, rest;
  for (auto p : q.primes()) {
    dstar.push_back({p, dstar_classes(p)});
    rest.push_back({p, complement(p, dstar.back().residues)});
  }
  DStar out{ResidueClassSystem::make(q, dstar), ResidueSieve::build(q, rest, options)};
  return out;
}

std::vector<std::uint64_t> corollary1_primes(std::uint64_t X) {
  if (X < 10) throw InvalidArgument("X must be at least 10");
  const double logX = std::log(static_cast<double>(X));
  const auto count = static_cast<std::size_t>(std::floor(logX));
  const auto pool = primes_in_range(X + 1, 2 * X - 1);
  if (pool.size() < std::max<std::size_t>(count, 2)) {
    throw InsufficientPrimes("only " + std::to_string(pool.size()) + " primes in (" + std::to_string(X) + ", " +
                             std::to_string(2 * X) + ")");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i + 1 < pool.size(); ++i) {
    if (pool[i + 1] - pool[i] < pool[best + 1] - pool[best]) best = i;
  }
  if (static_cast<double>(pool[best + 1] - pool[best]) > 2 * logX) {
    throw InsufficientPrimes("no pair of primes within 2 ln X in (" + std::to_string(X) + ", " +
                             std::to_string(2 * X) + ")");
  }
  std::vector<std::uint64_t> out{pool[best], pool[best + 1]};
  for (std::size_t i = 0; i < pool.size() && out.size() < count; ++i) {
    if (i != best && i != best + 1) out.push_back(pool[i]);
  }
  return out;
}

std::vector<std::uint64_t> corollary1_default_h(std::uint64_t X, const SquarefreeModulus& q) {
  // ceil(2^omega q / phi) and floor(X^2 / ln X).
  const mpz_class num = (mpz_class(1) << static_cast<unsigned>(q.omega())) * to_mpz(q.value());
  mpz_class h_min_z;
  mpz_cdiv_q(h_min_z.get_mpz_t(), num.get_mpz_t(), to_mpz(q.phi()).get_mpz_t());
  const auto h_min = static_cast<std::uint64_t>(h_min_z.get_ui());
  const double x = static_cast<double>(X);
  const auto h_max = static_cast<std::uint64_t>(std::floor(x * x / std::log(x)));
  if (h_min > h_max) throw PreconditionViolated("empty h range: ceil(2^omega/P) exceeds X^2/ln X");
  std::vector<std::uint64_t> hs;
  for (std::uint64_t h = h_min; h < h_max; h *= 2) hs.push_back(h);
  hs.push_back(h_max);
  return hs;
}

Corollary1Result corollary1_experiment(std::uint64_t X, const std::vector<std::uint64_t>& hs,
                                       const ComputeOptions& options) {
  Corollary1Result out;
  out.X = X;
  out.primes = corollary1_primes(X);
  out.q = SquarefreeModulus::from_primes(out.primes);
  const auto grid = corollary1_default_h(X, out.q);
  out.h_min = grid.front();
  out.h_max = grid.back();
  const auto& use = hs.empty() ? grid : hs;

  const DStar dstar = dstar_system(out.q, options);
  const auto sieve = system_sieve(dstar.system, options);
  // Centering h P / 2^omega = h phi / (2^omega q).
  const mpz_class two_pow = mpz_class(1) << static_cast<unsigned>(out.q.omega());
  const mpz_class den = two_pow * to_mpz(out.q.value());
  const mpq_class mean_rate = make_rational(to_mpz(out.q.phi()), den);
  for (auto h : use) {
    Corollary1Row row;
    row.h = h;
    row.statistic = window_variance(sieve, h, to_mpz(out.q.phi()), den, options);
    const double expected = to_double(mpq_class(mpq_class(to_mpz(h)) * mean_rate));
    row.lower = static_cast<double>(out.q.value()) * expected * expected;
    row.ratio = to_double(row.statistic) / row.lower;
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace residue_lab
