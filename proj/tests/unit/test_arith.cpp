#include <doctest.h>

#include <cmath>
#include <numeric>

#include "residue_lab/arith.hpp"
#include "residue_lab/error.hpp"

using namespace residue_lab;

namespace {

// Trial-division reference, independent of the library.
std::vector<std::uint64_t> naive_primes_of(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      out.push_back(p);
      while (n % p == 0) n /= p;
    }
  }
  if (n > 1) out.push_back(n);
  return out;
}

bool naive_squarefree(std::uint64_t n) {
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % (d * d) == 0) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("arith") {
  TEST_CASE("factor_squarefree examples") {
    const auto q = factor_squarefree(30);
    CHECK(q.primes() == std::vector<std::uint64_t>{2, 3, 5});
    CHECK(q.phi() == 8);
    CHECK(q.density() == mpq_class(4, 15));
    CHECK(q.omega() == 3);

    const auto one = factor_squarefree(1);
    CHECK(one.primes().empty());
    CHECK(one.phi() == 1);
    CHECK(one.density() == 1);

    CHECK_THROWS_AS(factor_squarefree(12), NotSquarefree);
    CHECK_THROWS_AS(factor_squarefree(0), InvalidArgument);
  }

  TEST_CASE("radical") {
    CHECK(radical(12).value() == 6);
    CHECK(radical(30).value() == 30);
    CHECK(radical(1).value() == 1);
    CHECK(radical(1024).value() == 2);
  }

  TEST_CASE("elementary functions") {
    CHECK(moebius(30) == -1);
    CHECK(moebius(6) == 1);
    CHECK(moebius(12) == 0);
    CHECK(moebius(1) == 1);
    CHECK(mod_inverse(3, 5) == 2);
    CHECK(mod_inverse(-2, 7) == 3);
    CHECK_THROWS_AS(mod_inverse(4, 6), NonInvertible);
    CHECK(mod_reduce(-1, 7) == 6);
    CHECK(totient(1) == 1);
    CHECK(totient(36) == 12);
  }

  TEST_CASE("crt_combine") {
    const std::vector<Congruence> sys{{2, 3}, {4, 5}};
    CHECK(crt_combine(sys) == 14);
    const std::vector<Congruence> bad{{1, 4}, {1, 6}};
    CHECK_THROWS_AS(crt_combine(bad), NonCoprimeModuli);
  }

  TEST_CASE("primes_in_range against trial division") {
    const auto ps = primes_in_range(1, 2000);
    std::vector<std::uint64_t> ref;
    for (std::uint64_t n = 2; n <= 2000; ++n) {
      if (naive_primes_of(n) == std::vector<std::uint64_t>{n}) ref.push_back(n);
    }
    CHECK(ps == ref);
    CHECK(primes_in_range(21, 39) == std::vector<std::uint64_t>{23, 29, 31, 37});
    const auto far = primes_in_range(1'000'000'000, 1'000'000'100);
    std::vector<std::uint64_t> far_ref;
    for (std::uint64_t n = 1'000'000'000; n <= 1'000'000'100; ++n) {
      if (naive_primes_of(n) == std::vector<std::uint64_t>{n}) far_ref.push_back(n);
    }
    CHECK(far == far_ref);
    CHECK(far.size() == 7);
  }

  TEST_CASE("primorials") {
    CHECK(primorial(0).value() == 1);
    CHECK(primorial(6).value() == 30030);
    CHECK(primorial(13).value() == 304250263527210ULL);
  }

  TEST_CASE("property: totient and factorization for squarefree n <= 10^4") {
    for (std::uint64_t n = 1; n <= 10000; ++n) {
      CHECK(is_squarefree(n) == naive_squarefree(n));
      if (!naive_squarefree(n)) continue;
      const auto q = factor_squarefree(n);
      const auto ref = naive_primes_of(n);
      REQUIRE(q.primes() == ref);
      std::uint64_t prod = 1;
      for (auto p : q.primes()) prod *= p;
      CHECK(prod == n);
      mpq_class expected = mpq_class(to_mpz(n));
      for (auto p : ref) expected *= mpq_class(to_mpz(p - 1), to_mpz(p));
      expected.canonicalize();
      CHECK(mpq_class(to_mpz(q.phi())) == expected);
      CHECK(totient(n) == q.phi());
      std::uint64_t coprime = 0;
      if (n <= 2000) {
        for (std::uint64_t m = 0; m < n; ++m) coprime += std::gcd(m, n) == 1;
        CHECK(coprime == q.phi());
      }
    }
  }

  TEST_CASE("property: Moebius sums and multiplicativity") {
    for (std::uint64_t n = 1; n <= 10000; ++n) {
      long sum = 0;
      for (std::uint64_t d = 1; d <= n; ++d) {
        if (n % d == 0) sum += moebius(d);
      }
      CHECK(sum == (n == 1 ? 1 : 0));
    }
    for (std::uint64_t a = 1; a <= 100; ++a) {
      for (std::uint64_t b = 1; b <= 100; ++b) {
        if (std::gcd(a, b) == 1) CHECK(moebius(a * b) == moebius(a) * moebius(b));
      }
    }
  }

  TEST_CASE("property: CRT reconstructs every residue") {
    for (std::uint64_t n = 2; n <= 10000; n += 7) {
      if (!is_squarefree(n)) continue;
      const auto q = factor_squarefree(n);
      for (std::uint64_t x = 0; x < n; x += 1 + n / 300) {
        std::vector<Congruence> sys;
        for (auto p : q.primes()) sys.push_back({static_cast<std::int64_t>(x % p), p});
        CHECK(crt_combine(sys) == x);
      }
    }
  }

  TEST_CASE("divisors are ordered by bitmask") {
    const auto ds = divisors(factor_squarefree(30));
    REQUIRE(ds.size() == 8);
    CHECK(ds.front().value == 1);
    CHECK(ds.back().value == 30);
    for (const auto& d : ds) CHECK(moebius(d.value) == d.mu);
  }

  TEST_CASE("rationals are canonical") {
    const auto r = make_rational(6, 4);
    CHECK(r.get_num() == 3);
    CHECK(r.get_den() == 2);
    CHECK(to_fraction_string(r) == "3/2");
    CHECK(to_fraction_string(mpq_class(5)) == "5/1");
    CHECK(pow_rational(mpq_class(2, 3), 3) == mpq_class(8, 27));
  }

  TEST_CASE("to_double rounds to nearest") {
    CHECK(to_double(mpq_class(32, 5)) == 6.4);
    CHECK(to_double(mpq_class(-1, 3)) == -1.0 / 3.0);
    CHECK(to_double(mpz_class("123456789012345678901234567890")) == 1.2345678901234568e29);
    // small operands: IEEE division is already correctly rounded
    for (std::int64_t n = -300; n <= 300; n += 7) {
      for (std::int64_t d = 1; d <= 400; d += 3) {
        CHECK(to_double(make_rational(to_mpz(n), to_mpz(d))) == double(n) / double(d));
      }
    }
    // large operands: no neighbouring double is closer
    mpz_class num = 1;
    for (int i = 0; i < 40; ++i) {
      num = num * 7 + 3;
      const mpq_class x = make_rational(num, mpz_class(3) * num + 1);
      const double v = to_double(x);
      const mpq_class err = abs(mpq_class(v) - x);
      CHECK(err <= abs(mpq_class(std::nextafter(v, 0.0)) - x));
      CHECK(err <= abs(mpq_class(std::nextafter(v, 1.0)) - x));
    }
  }
}
