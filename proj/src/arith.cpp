#include "residue_lab/arith.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

#include "residue_lab/error.hpp"

namespace residue_lab {

namespace {

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<unsigned __int128>(r) * r > n) --r;
  while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Trial division; returns (prime, exponent) pairs.
std::vector<std::pair<std::uint64_t, unsigned>> factor(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  auto take = [&](std::uint64_t p) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e > 0) out.emplace_back(p, e);
  };
  take(2);
  take(3);
  for (std::uint64_t p = 5; p <= n / p; p += 6) {
    take(p);
    take(p + 2);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

}  // namespace

SquarefreeModulus::SquarefreeModulus() = default;

SquarefreeModulus SquarefreeModulus::from_primes(std::vector<std::uint64_t> primes) {
  std::sort(primes.begin(), primes.end());
  if (std::adjacent_find(primes.begin(), primes.end()) != primes.end()) {
    throw InvalidArgument("repeated prime in squarefree modulus");
  }
  SquarefreeModulus m;
  unsigned __int128 q = 1;
  std::uint64_t phi = 1;
  for (auto p : primes) {
    if (!is_prime(p)) throw InvalidArgument("not a prime: " + std::to_string(p));
    q *= p;
    if (q > UINT64_MAX) throw InvalidArgument("modulus overflows 64 bits");
    phi *= p - 1;
  }
  m.q_ = static_cast<std::uint64_t>(q);
  m.primes_ = std::move(primes);
  m.phi_ = phi;
  m.density_ = mpq_class(to_mpz(phi), to_mpz(m.q_));
  m.density_.canonicalize();
  return m;
}

bool SquarefreeModulus::divisible_by(std::uint64_t p) const {
  return std::binary_search(primes_.begin(), primes_.end(), p);
}

std::vector<Divisor> divisors(const SquarefreeModulus& q) {
  const auto& ps = q.primes();
  const std::size_t count = std::size_t{1} << ps.size();
  std::vector<Divisor> out(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    Divisor& d = out[mask];
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (mask & (std::size_t{1} << i)) {
        d.value *= ps[i];
        d.mu = -d.mu;
        d.primes.push_back(ps[i]);
      }
    }
  }
  return out;
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  if (n % 3 == 0) return n == 3;
  for (std::uint64_t p = 5; p <= n / p; p += 6) {
    if (n % p == 0 || n % (p + 2) == 0) return false;
  }
  return true;
}

bool is_squarefree(std::uint64_t n) {
  if (n == 0) return false;
  for (auto [p, e] : factor(n)) {
    if (e > 1) return false;
  }
  return true;
}

std::vector<std::uint64_t> prime_divisors(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("prime_divisors(0)");
  std::vector<std::uint64_t> out;
  for (auto [p, e] : factor(n)) out.push_back(p);
  return out;
}

SquarefreeModulus factor_squarefree(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("modulus must be positive");
  std::vector<std::uint64_t> primes;
  for (auto [p, e] : factor(n)) {
    if (e > 1) {
      throw NotSquarefree(std::to_string(p) + "^2 divides " + std::to_string(n));
    }
    primes.push_back(p);
  }
  return SquarefreeModulus::from_primes(std::move(primes));
}

SquarefreeModulus radical(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("radical(0)");
  return SquarefreeModulus::from_primes(prime_divisors(n));
}

int moebius(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("moebius(0)");
  int mu = 1;
  for (auto [p, e] : factor(n)) {
    if (e > 1) return 0;
    mu = -mu;
  }
  return mu;
}

std::uint64_t totient(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("totient(0)");
  std::uint64_t phi = n;
  for (auto [p, e] : factor(n)) phi = phi / p * (p - 1);
  return phi;
}

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

std::uint64_t mod_reduce(std::int64_t a, std::uint64_t m) {
  if (m == 0) throw InvalidArgument("modulus must be positive");
  const __int128 r = static_cast<__int128>(a) % static_cast<__int128>(m);
  return static_cast<std::uint64_t>(r < 0 ? r + m : r);
}

std::uint64_t mod_inverse(std::int64_t a, std::uint64_t m) {
  if (m == 0) throw InvalidArgument("modulus must be positive");
  if (m == 1) return 0;
  __int128 old_r = mod_reduce(a, m), r = m;
  __int128 old_s = 1, s = 0;
  while (r != 0) {
    const __int128 quotient = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - quotient * r};
    std::tie(old_s, s) = std::pair{s, old_s - quotient * s};
  }
  if (old_r != 1) {
    throw NonInvertible(std::to_string(a) + " is not invertible modulo " + std::to_string(m));
  }
  old_s %= static_cast<__int128>(m);
  if (old_s < 0) old_s += m;
  return static_cast<std::uint64_t>(old_s);
}

std::uint64_t crt_combine(std::span<const Congruence> system) {
  unsigned __int128 modulus = 1;
  unsigned __int128 x = 0;
  for (const auto& c : system) {
    if (c.modulus == 0) throw InvalidArgument("zero modulus in CRT system");
    if (std::gcd(static_cast<std::uint64_t>(modulus), c.modulus) != 1) {
      throw NonCoprimeModuli("modulus " + std::to_string(c.modulus) +
                             " is not coprime to the previous moduli");
    }
    const std::uint64_t r = mod_reduce(c.residue, c.modulus);
    // Solve x + modulus * t = r (mod m).
    const std::uint64_t m = c.modulus;
    const std::uint64_t inv = mod_inverse(static_cast<std::int64_t>(modulus % m), m);
    const std::uint64_t diff = static_cast<std::uint64_t>((r + m - static_cast<std::uint64_t>(x % m)) % m);
    const std::uint64_t t = static_cast<std::uint64_t>(static_cast<unsigned __int128>(diff) * inv % m);
    x += modulus * t;
    modulus *= m;
    if (modulus > UINT64_MAX) throw InvalidArgument("CRT modulus overflows 64 bits");
  }
  return static_cast<std::uint64_t>(x);
}

std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  if (hi < 2 || lo > hi) return out;
  lo = std::max<std::uint64_t>(lo, 2);

  const std::uint64_t root = isqrt(hi);
  std::vector<std::uint8_t> small(root + 1, 1);
  std::vector<std::uint64_t> base;
  for (std::uint64_t i = 2; i <= root; ++i) {
    if (!small[i]) continue;
    base.push_back(i);
    for (std::uint64_t j = i * i; j <= root; j += i) small[j] = 0;
  }

  constexpr std::uint64_t kSegment = std::uint64_t{1} << 16;
  std::vector<std::uint8_t> seg;
  for (std::uint64_t start = lo; start <= hi;) {
    const std::uint64_t end = std::min(hi, start + kSegment - 1);  // inclusive
    seg.assign(end - start + 1, 1);
    for (auto p : base) {
      if (p * p > end) break;
      std::uint64_t first = std::max(p * p, (start + p - 1) / p * p);
      for (std::uint64_t j = first; j <= end; j += p) seg[j - start] = 0;
    }
    for (std::uint64_t i = start; i <= end; ++i) {
      if (seg[i - start]) out.push_back(i);
    }
    if (end == hi) break;
    start = end + 1;
  }
  return out;
}

SquarefreeModulus primorial(std::size_t n) {
  std::vector<std::uint64_t> primes;
  for (std::uint64_t c = 2; primes.size() < n; ++c) {
    if (is_prime(c)) primes.push_back(c);
  }
  return SquarefreeModulus::from_primes(std::move(primes));
}

std::vector<std::uint64_t> squarefree_in_range(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::uint64_t> out;
  if (lo == 0) lo = 1;
  if (lo > hi) return out;
  std::vector<std::uint8_t> ok(hi - lo + 1, 1);
  for (std::uint64_t p = 2; p <= hi / p; ++p) {
    const std::uint64_t sq = p * p;
    for (std::uint64_t j = (lo + sq - 1) / sq * sq; j <= hi; j += sq) ok[j - lo] = 0;
  }
  for (std::uint64_t n = lo; n <= hi; ++n) {
    if (ok[n - lo]) out.push_back(n);
  }
  return out;
}

mpz_class to_mpz(std::uint64_t v) {
  mpz_class out;
  mpz_import(out.get_mpz_t(), 1, -1, sizeof v, 0, 0, &v);
  return out;
}

mpz_class to_mpz(std::int64_t v) {
  const std::uint64_t magnitude = v < 0 ? std::uint64_t(0) - static_cast<std::uint64_t>(v) : static_cast<std::uint64_t>(v);
  mpz_class out = to_mpz(magnitude);
  if (v < 0) out = -out;
  return out;
}

mpq_class make_rational(const mpz_class& num, const mpz_class& den) {
  mpq_class out(num, den);
  out.canonicalize();
  return out;
}

std::string to_fraction_string(const mpq_class& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

double to_double(const mpz_class& value) { return std::strtod(value.get_str().c_str(), nullptr); }

double to_double(const mpq_class& value) {
  if (value.get_den() == 1) return to_double(value.get_num());
  // Enough decimal digits for any double, plus a sticky digit so strtod never sees a false tie.
  const mpz_class num = abs(value.get_num());
  const mpz_class& den = value.get_den();
  long shift = 40 + static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 10)) -
               static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 10));
  shift = std::max(shift, 0L);
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(shift));
  mpz_class quot, rem;
  const mpz_class scaled = num * scale;
  mpz_tdiv_qr(quot.get_mpz_t(), rem.get_mpz_t(), scaled.get_mpz_t(), den.get_mpz_t());
  std::string digits = quot.get_str() + (rem == 0 ? "0" : "1");
  digits += "e-" + std::to_string(shift + 1);
  const double out = std::strtod(digits.c_str(), nullptr);
  return value < 0 ? -out : out;
}

mpq_class pow_rational(const mpq_class& base, unsigned exponent) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exponent);
  mpq_class out(num, den);
  out.canonicalize();
  return out;
}

}  // namespace residue_lab
