#include "residue_lab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "residue_lab/error.hpp"
#include "residue_lab/identities.hpp"

namespace residue_lab {

namespace {

void check_order(unsigned k) {
  if (k < 1 || k > kMaxMomentOrder) {
    throw InvalidArgument("moment order k must lie in [1, " + std::to_string(kMaxMomentOrder) + "], got " +
                          std::to_string(k));
  }
}

double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (std::isinf(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_rational(const mpq_class& x) {
  // Split off binary exponents so huge numerators and denominators stay finite.
  long num_exp = 0, den_exp = 0;
  const double num_mant = mpz_get_d_2exp(&num_exp, x.get_num_mpz_t());
  const double den_mant = mpz_get_d_2exp(&den_exp, x.get_den_mpz_t());
  return std::log(num_mant / den_mant) + static_cast<double>(num_exp - den_exp) * std::log(2.0);
}

double expsum_k2(const SquarefreeModulus& q, std::uint64_t h, const ComputeOptions& options,
                 std::uint64_t phi_D_q,
                 const std::function<std::uint64_t(const Divisor&)>& phi_D,
                 const std::function<CharacterSumProfile(std::uint64_t)>& profile_for) {
  if (phi_D_q == 0) throw ZeroDensity("the tuple density vanishes modulo " + std::to_string(q.value()));
  if (q.value() > options.term_budget) {
    throw BudgetExceeded("k = 2 exponential sum over q = " + std::to_string(q.value()) +
                         " exceeds the term budget of " + std::to_string(options.term_budget));
  }
  CompensatedSum total;
  for (const auto& d : divisors(q)) {
    const std::uint64_t r = d.value;
    if (r == 1) continue;
    const auto profile = profile_for(r);
    const double phi = static_cast<double>(phi_D(d));
    CompensatedSum inner;
    for (std::uint64_t a = 1; a < r; ++a) {
      if (gcd_u64(a, r) != 1) continue;
      inner.add(E_h_norm2(FractionModOne{a, r}, h) * profile.norm2(static_cast<std::int64_t>(a)));
    }
    total.add(inner.value() / (phi * phi));
  }
  const double P_D = static_cast<double>(phi_D_q) / static_cast<double>(q.value());
  return static_cast<double>(q.value()) * P_D * P_D * total.value();
}

}  // namespace

std::vector<CenteredMoment> centered_window_moments(const ResidueSieve& sieve, std::uint64_t h,
                                                    std::span<const unsigned> ks, const mpz_class& num,
                                                    const mpz_class& den, const ComputeOptions& options) {
  for (auto k : ks) check_order(k);
  if (den <= 0) throw InvalidArgument("centering denominator must be positive");
  const WindowHistogram hist = window_histogram(sieve, h, options);
  std::vector<CenteredMoment> out;
  for (auto k : ks) out.push_back({k, 0, 0});

  const mpz_class center = to_mpz(h) * num;
  mpz_class residual, power;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    if (hist.counts[i] == 0) continue;
    residual = den * to_mpz(hist.base + i) - center;
    const mpz_class mult = to_mpz(hist.counts[i]);
    for (auto& m : out) {
      mpz_pow_ui(power.get_mpz_t(), residual.get_mpz_t(), m.k);
      m.scaled_numerator += mult * power;
    }
  }
  for (auto& m : out) {
    mpz_class scale;
    mpz_pow_ui(scale.get_mpz_t(), den.get_mpz_t(), m.k);
    m.value = mpq_class(m.scaled_numerator, scale);
    m.value.canonicalize();
  }
  return out;
}

std::vector<WindowMoment> moments_direct(const SquarefreeModulus& q, const OffsetSet& offsets, std::uint64_t h,
                                         std::span<const unsigned> ks, const ComputeOptions& options) {
  const auto sieve = sieve_tuple_starts(q, offsets, options);
  const auto raw = centered_window_moments(sieve, h, ks, to_mpz(sieve.popcount()), to_mpz(q.value()), options);
  std::vector<WindowMoment> out;
  for (const auto& m : raw) {
    WindowMoment w;
    w.q = q.value();
    w.offsets = offsets.offsets();
    w.h = h;
    w.k = m.k;
    w.value = m.value;
    w.scaled_numerator = m.scaled_numerator;
    w.float_value = to_double(m.value);
    out.push_back(std::move(w));
  }
  return out;
}

WindowMoment moment_direct(const SquarefreeModulus& q, const OffsetSet& offsets, std::uint64_t h, unsigned k,
                           const ComputeOptions& options) {
  const unsigned ks[] = {k};
  return std::move(moments_direct(q, offsets, h, ks, options).front());
}

double moment_expsum_k2(const SquarefreeModulus& q, const OffsetSet& offsets, std::uint64_t h,
                        const ComputeOptions& options) {
  const auto phi_D = [&](const Divisor& d) {
    std::uint64_t v = 1;
    for (auto p : d.primes) v *= p - offsets.residues_mod(p).size();
    return v;
  };
  Divisor whole;
  whole.value = q.value();
  whole.primes = q.primes();
  return expsum_k2(q, h, options, phi_D(whole), phi_D,
                   [&](std::uint64_t r) { return CharacterSumProfile::from_offsets(offsets, r); });
}

double moment_expsum_k2(const SquarefreeModulus& q, const ClassProfile& excluded, std::uint64_t h,
                        const ComputeOptions& options) {
  const auto phi_D = [&](const Divisor& d) { return allowed_count(excluded, d.primes); };
  return expsum_k2(q, h, options, allowed_count(excluded, q.primes()), phi_D,
                   [&](std::uint64_t r) { return CharacterSumProfile::from_excluded(excluded, r); });
}

mpz_class stirling2(unsigned r, unsigned t) {
  if (t > r) return 0;
  // Row-by-row triangle S(n, j) = j S(n-1, j) + S(n-1, j-1).
  std::vector<mpz_class> row(t + 1, 0);
  row[0] = 1;
  for (unsigned n = 1; n <= r; ++n) {
    for (unsigned j = std::min(n, t); j >= 1; --j) row[j] = j * row[j] + row[j - 1];
    row[0] = 0;
  }
  return row[t];
}

mpq_class binomial_moment(std::uint64_t h, const mpq_class& P, unsigned k) {
  if (P < 0 || P > 1) throw InvalidArgument("P must lie in [0, 1]");
  const mpq_class mean = mpq_class(to_mpz(h)) * P;

  // raw[r] = E[X^r] = sum_t C(h, t) S(r, t) t! P^t.
  std::vector<mpq_class> raw(k + 1, 0);
  std::vector<std::vector<mpz_class>> S(k + 1, std::vector<mpz_class>(k + 1, 0));
  S[0][0] = 1;
  for (unsigned n = 1; n <= k; ++n) {
    for (unsigned j = 1; j <= n; ++j) S[n][j] = j * S[n - 1][j] + S[n - 1][j - 1];
  }
  for (unsigned r = 0; r <= k; ++r) {
    mpz_class falling = 1;  // h (h-1) ... (h-t+1) = C(h, t) t!
    mpq_class Pt = 1;
    for (unsigned t = 0; t <= r; ++t) {
      if (t > 0) {
        if (t > h) break;
        falling *= to_mpz(h - (t - 1));
        Pt *= P;
      }
      raw[r] += mpq_class(S[r][t] * falling) * Pt;
    }
  }

  mpq_class out = 0;
  mpz_class binom;
  mpq_class neg_mean_pow = 1;  // (-hP)^{k-r}, built from r = k downwards
  for (unsigned r = k + 1; r-- > 0;) {
    mpz_bin_uiui(binom.get_mpz_t(), k, r);
    out += mpq_class(binom) * neg_mean_pow * raw[r];
    neg_mean_pow *= -mean;
  }
  out.canonicalize();
  return out;
}

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::lemma12: return "lemma12";
    case BoundKind::lemma21: return "lemma21";
    case BoundKind::lemma31: return "lemma31";
    case BoundKind::thm42_small_h: return "thm42_small_h";
    case BoundKind::thm42_general: return "thm42_general";
    case BoundKind::mv_mu_k: return "mv_mu_k";
  }
  return "unknown";
}

BoundKind parse_bound_kind(const std::string& name) {
  for (auto kind : {BoundKind::lemma12, BoundKind::lemma21, BoundKind::lemma31, BoundKind::thm42_small_h,
                    BoundKind::thm42_general, BoundKind::mv_mu_k}) {
    if (to_string(kind) == name) return kind;
  }
  throw InvalidArgument("unknown bound kind: " + name);
}

BoundReport theoretical_bound(BoundKind kind, const BoundParams& params) {
  BoundReport out;
  out.kind = kind;
  out.q = params.q.value();
  out.h = params.h;
  out.k = params.k;
  out.s = params.s;
  if (params.h == 0) throw PreconditionViolated("h >= 1");
  if (params.k == 0) throw PreconditionViolated("k >= 1");
  if (params.s == 0) throw PreconditionViolated("s >= 1");

  const mpq_class P = params.P.value_or(params.q.density());
  if (P <= 0) throw PreconditionViolated("P > 0");
  const double logP = log_rational(P);
  const double logq = std::log(static_cast<double>(out.q));
  const double logh = std::log(static_cast<double>(params.h));
  const double k = params.k, s = params.s;
  const double ks = k * s;
  // Exponent -2^{ks} + ks of the lemma12 bound.
  const auto weyl_exponent = [&] {
    if (ks > 1000) throw PreconditionViolated("k s <= 1000");
    return -std::exp2(ks) + ks;
  };
  const auto require_even = [&] {
    if (params.k % 2 != 0) throw PreconditionViolated("k even");
  };
  const double half_floor = std::floor(k / 2);

  switch (kind) {
    case BoundKind::lemma12:
      out.log_bound = logq + (k / 2) * logh + weyl_exponent() * logP;
      break;
    case BoundKind::lemma21: {
      require_even();
      const double log_hPs = logh + s * logP;
      out.log_bound = log_sum_exp(logq + half_floor * log_hPs, logq + log_hPs);
      break;
    }
    case BoundKind::lemma31: {
      require_even();
      if (logh + logP <= 0) throw PreconditionViolated("h > 1/P");
      const double y = params.y.value_or(std::pow(static_cast<double>(params.h), k) + 1.0);
      const double A = params.A.value_or(k + 1);
      if (!(k * logh < std::log(y))) throw PreconditionViolated("y > h^k");
      if (!(std::log(y) < A * logh)) throw PreconditionViolated("y < h^A");
      out.y = y;
      std::vector<std::uint64_t> small, large;
      for (auto p : params.q.primes()) (static_cast<double>(p) <= y ? small : large).push_back(p);
      const auto q1 = SquarefreeModulus::from_primes(small);
      const auto q2 = SquarefreeModulus::from_primes(large);
      out.q1 = q1.value();
      out.q2 = q2.value();
      const double logP1 = log_rational(q1.density()), logP2 = log_rational(q2.density());
      const double log_hPs = logh + s * logP;
      double acc = log_sum_exp(logq + half_floor * log_hPs, logq + log_hPs);
      acc = log_sum_exp(acc, logq + (k / 2) * logh + weyl_exponent() * logP1 + ks * logP2);
      out.log_bound = acc;
      break;
    }
    case BoundKind::thm42_small_h: {
      // h < e^{1 / (k P^{1/s})}.
      const double limit = 1.0 / (k * std::exp(logP / s));
      if (!(logh < limit)) throw PreconditionViolated("h < exp(1/(k P^(1/s)))");
      out.log_bound = logq + (k / 2) * (logh + s * logP);
      break;
    }
    case BoundKind::thm42_general:
      out.log_bound = logq + (k / 2) * logh + (s * k - s * s * k / 2) * logP;
      break;
    case BoundKind::mv_mu_k: {
      const double log_hP = logh + logP;
      out.log_bound = log_sum_exp(half_floor * log_hP, log_hP);
      break;
    }
  }
  out.bound_value = std::exp(out.log_bound);
  if (params.observed) {
    out.observed = params.observed;
    const double obs = *params.observed;
    if (obs == 0) {
      out.ratio = 0.0;
    } else if (obs > 0) {
      out.ratio = std::exp(std::log(obs) - out.log_bound);
    } else {
      out.ratio = obs / out.bound_value;
    }
  }
  return out;
}

}  // namespace residue_lab
