#include <doctest.h>

#include <cmath>

#include "residue_lab/error.hpp"
#include "residue_lab/moments.hpp"

using namespace residue_lab;

namespace {

// E[(X - hP)^k] for X ~ Bin(h, P) by summing over all 2^h outcomes grouped by count.
mpq_class brute_binomial(std::uint64_t h, const mpq_class& P, unsigned k) {
  mpq_class total = 0;
  const mpq_class mean = mpq_class(to_mpz(h)) * P;
  for (std::uint64_t t = 0; t <= h; ++t) {
    mpz_class c;
    mpz_bin_uiui(c.get_mpz_t(), h, t);
    const mpq_class prob = mpq_class(c) * pow_rational(P, unsigned(t)) * pow_rational(mpq_class(1) - P, unsigned(h - t));
    mpq_class dev = mpq_class(to_mpz(t)) - mean;
    dev.canonicalize();
    total += prob * pow_rational(dev, k);
  }
  total.canonicalize();
  return total;
}

}  // namespace

TEST_SUITE("moments") {
  TEST_CASE("moment_direct examples") {
    CHECK(moment_direct(factor_squarefree(3), OffsetSet({0}), 1, 2).value == mpq_class(2, 3));
    CHECK(moment_direct(factor_squarefree(15), OffsetSet({0, 2}), 15, 4).value == 0);
    for (std::uint64_t q : {2u, 15u, 30u, 210u}) {
      for (std::uint64_t h : {1u, 5u, 13u}) CHECK(moment_direct(factor_squarefree(q), OffsetSet({0, 2}), h, 1).value == 0);
    }
    const auto m = moment_direct(factor_squarefree(15), OffsetSet({0, 2}), 4, 2);
    CHECK(m.value == mpq_class(32, 5));
    CHECK(m.scaled_numerator == 32 * 15 * 15 / 5);
    CHECK_THROWS_AS(moment_direct(factor_squarefree(15), OffsetSet({0}), 4, 9), InvalidArgument);
  }

  TEST_CASE("property: direct moments against a naive loop, k even nonnegative") {
    for (std::uint64_t qv : {6u, 15u, 35u, 210u}) {
      const auto q = factor_squarefree(qv);
      for (const auto& offs : std::vector<std::vector<std::int64_t>>{{0}, {0, 2}, {0, 2, 6}}) {
        const OffsetSet D(offs);
        const auto sieve = sieve_tuple_starts(q, D);
        const mpq_class mean = make_rational(to_mpz(sieve.popcount()), to_mpz(qv));
        for (std::uint64_t h : {1u, 4u, 17u}) {
          const std::vector<unsigned> ks{1, 2, 3, 4, 5, 6};
          const auto ms = moments_direct(q, D, h, ks);
          for (const auto& m : ms) {
            mpq_class ref = 0;
            for (std::uint64_t n = 0; n < qv; ++n) {
              std::uint64_t w = 0;
              for (std::uint64_t j = 1; j <= h; ++j) w += sieve.test((n + j) % qv);
              mpq_class dev = mpq_class(to_mpz(w)) - mpq_class(to_mpz(h)) * mean;
              ref += pow_rational(dev, m.k);
            }
            ref.canonicalize();
            CHECK(m.value == ref);
            if (m.k % 2 == 0) CHECK(m.value >= 0);
          }
        }
        CHECK(moment_direct(q, D, qv, 2).value == 0);
      }
    }
  }

  TEST_CASE("moment_expsum_k2 examples") {
    CHECK(moment_expsum_k2(factor_squarefree(3), OffsetSet({0}), 1) == doctest::Approx(2.0 / 3).epsilon(1e-12));
    CHECK(std::abs(moment_expsum_k2(factor_squarefree(30), OffsetSet({0, 2}), 30)) < 1e-9);
    CHECK(moment_expsum_k2(factor_squarefree(15), OffsetSet({0, 2}), 4) ==
          doctest::Approx(moment_direct(factor_squarefree(15), OffsetSet({0, 2}), 4, 2).float_value).epsilon(1e-9));
    CHECK_THROWS_AS(moment_expsum_k2(factor_squarefree(3), OffsetSet({0, 1, 2}), 2), ZeroDensity);
  }

  TEST_CASE("class-profile expsum matches the offset form") {
    const auto q = factor_squarefree(1155);
    const OffsetSet D({0, 2, 6});
    for (std::uint64_t h : {1u, 10u, 33u}) {
      CHECK(moment_expsum_k2(q, excluded_classes(q, D), h) ==
            doctest::Approx(moment_expsum_k2(q, D, h)).epsilon(1e-10));
    }
  }

  TEST_CASE("stirling2") {
    CHECK(stirling2(3, 2) == 3);
    for (unsigned r = 1; r < 10; ++r) CHECK(stirling2(r, 1) == 1);
    CHECK(stirling2(4, 0) == 0);
    CHECK(stirling2(0, 0) == 1);
    CHECK(stirling2(10, 4) == 34105);
  }

  TEST_CASE("binomial moments") {
    CHECK(binomial_moment(4, mpq_class(1, 2), 2) == 1);
    CHECK(binomial_moment(3, mpq_class(1, 3), 3) == mpq_class(2, 9));
    CHECK(binomial_moment(7, mpq_class(2, 5), 1) == 0);
    CHECK_THROWS_AS(binomial_moment(3, mpq_class(3, 2), 2), InvalidArgument);
  }

  TEST_CASE("property: Stirling formula equals brute-force expectation") {
    for (const auto& P : {mpq_class(1, 2), mpq_class(1, 3), mpq_class(4, 15)}) {
      for (std::uint64_t h = 0; h <= 12; ++h) {
        for (unsigned k = 1; k <= 6; ++k) CHECK(binomial_moment(h, P, k) == brute_binomial(h, P, k));
      }
    }
  }

  TEST_CASE("theoretical_bound examples") {
    BoundParams p;
    p.q = factor_squarefree(30);
    p.h = 10;
    p.k = 2;
    p.s = 1;
    CHECK(theoretical_bound(BoundKind::lemma12, p).bound_value == doctest::Approx(4218.75).epsilon(1e-12));
    CHECK(theoretical_bound(BoundKind::lemma21, p).bound_value == doctest::Approx(160).epsilon(1e-12));

    BoundParams mv;
    mv.h = 4;
    mv.k = 2;
    mv.P = mpq_class(1, 2);
    const auto r = theoretical_bound(BoundKind::mv_mu_k, mv);
    CHECK(r.bound_value == doctest::Approx(4).epsilon(1e-12));
    CHECK(binomial_moment(4, mpq_class(1, 2), 2).get_d() <= r.bound_value);

    p.observed = 4218.75 / 2;
    CHECK(*theoretical_bound(BoundKind::lemma12, p).ratio == doctest::Approx(0.5));
  }

  TEST_CASE("theoretical_bound preconditions name the hypothesis") {
    BoundParams p;
    p.q = factor_squarefree(30);
    p.h = 10;
    p.k = 3;
    CHECK_THROWS_WITH_AS(theoretical_bound(BoundKind::lemma21, p), "k even", PreconditionViolated);
    p.k = 2;
    p.h = 1;
    CHECK_THROWS_WITH_AS(theoretical_bound(BoundKind::lemma31, p), "h > 1/P", PreconditionViolated);
    p.h = 0;
    CHECK_THROWS_AS(theoretical_bound(BoundKind::lemma12, p), PreconditionViolated);
    p.h = 5;
    p.y = 10;  // below h^k
    CHECK_THROWS_WITH_AS(theoretical_bound(BoundKind::lemma31, p), "y > h^k", PreconditionViolated);
    p.y.reset();
    const auto ok = theoretical_bound(BoundKind::lemma31, p);
    CHECK(*ok.q1 * *ok.q2 == 30);
    CHECK(ok.bound_value > 0);
  }

  TEST_CASE("astronomical bounds stay finite in log space") {
    BoundParams p;
    p.q = factor_squarefree(30030);
    p.h = 50;
    p.k = 8;
    p.s = 3;
    const auto r = theoretical_bound(BoundKind::lemma12, p);
    CHECK(std::isfinite(r.log_bound));
    CHECK(std::isinf(r.bound_value));
    CHECK(to_string(parse_bound_kind("thm42_general")) == "thm42_general");
    CHECK_THROWS_AS(parse_bound_kind("lemma99"), InvalidArgument);
  }
}
