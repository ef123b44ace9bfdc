#include "residue_lab/identities.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "residue_lab/error.hpp"

namespace residue_lab {

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

// sin(pi t / r) for 0 <= t < 2r, folded so the argument stays small.
double sin_pi_fraction(std::uint64_t t, std::uint64_t r) {
  double sign = 1.0;
  if (t >= r) {
    t -= r;
    sign = -1.0;
  }
  if (2 * t > r) t = r - t;
  return sign * std::sin(std::numbers::pi * static_cast<double>(t) / static_cast<double>(r));
}

std::uint64_t lcm_checked(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t g = gcd_u64(a, b);
  const u128 l = static_cast<u128>(a / g) * b;
  if (l > UINT64_MAX) throw BudgetExceeded("lcm overflows 64 bits");
  return static_cast<std::uint64_t>(l);
}

std::uint64_t lcm_of(std::span<const std::uint64_t> values) {
  std::uint64_t l = 1;
  for (auto v : values) {
    if (v == 0) throw InvalidArgument("denominator must be positive");
    l = lcm_checked(l, v);
  }
  return l;
}

void check_budget(long double work, const ComputeOptions& options, const char* what) {
  if (work > static_cast<long double>(options.term_budget)) {
    throw BudgetExceeded(std::string(what) + " needs about " + std::to_string(static_cast<double>(work)) +
                         " terms, above the budget of " + std::to_string(options.term_budget));
  }
}

// Reduced residues 0 < a <= r, gcd(a, r) = 1.
std::vector<std::uint64_t> reduced_residues(std::uint64_t r) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t a = 1; a <= r; ++a) {
    if (gcd_u64(a, r) == 1) out.push_back(a);
  }
  return out;
}

}  // namespace

FractionModOne FractionModOne::make(std::int64_t a, std::uint64_t r) {
  if (r == 0) throw InvalidArgument("fraction denominator must be positive");
  return {mod_reduce(a, r), r};
}

FractionModOne FractionModOne::reduced() const {
  if (a == 0) return {0, 1};
  const std::uint64_t g = gcd_u64(a, r);
  return {a / g, r / g};
}

bool FractionModOne::operator==(const FractionModOne& other) const {
  const auto x = reduced(), y = other.reduced();
  return x.a == y.a && x.r == y.r;
}

Complex e(const FractionModOne& x) {
  // Map to the symmetric range (-1/2, 1/2] before converting.
  const std::uint64_t a = x.a % x.r;
  const double num = 2 * a > x.r ? -static_cast<double>(x.r - a) : static_cast<double>(a);
  const double angle = 2.0 * std::numbers::pi * num / static_cast<double>(x.r);
  return {std::cos(angle), std::sin(angle)};
}

Complex e(std::int64_t a, std::uint64_t r) { return e(FractionModOne::make(a, r)); }

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

double ExpSumValue::tolerance() const { return 1e-12 * static_cast<double>(terms) + 1e-9; }

int kq_indicator(const SquarefreeModulus& q, std::int64_t m) {
  return gcd_u64(mod_reduce(m, q.value()), q.value()) == 1 ? 1 : 0;
}

ExpSumValue kq_expansion(const SquarefreeModulus& q, std::int64_t m) {
  CompensatedComplexSum total;
  ExpSumValue out;
  for (const auto& d : divisors(q)) {
    const std::uint64_t r = d.value;
    const double weight = static_cast<double>(d.mu) / static_cast<double>(totient(r));
    const std::uint64_t mr = mod_reduce(m, r);
    for (auto a : reduced_residues(r)) {
      total.add(weight * e(FractionModOne{mulmod(mr, a % r, r), r}));
      ++out.terms;
    }
  }
  out.value = to_double(q.density()) * total.value();
  return out;
}

Complex E_h(const FractionModOne& x, std::uint64_t h) {
  if (x.a % x.r == 0) return {static_cast<double>(h), 0.0};
  // e((h+1)x/2) sin(pi h x) / sin(pi x), every argument reduced exactly.
  const std::uint64_t r = x.r, a = x.a % r;
  const std::uint64_t two_r = 2 * r;
  const std::uint64_t phase = mulmod((h + 1) % two_r, a, two_r);
  const double ratio = sin_pi_fraction(mulmod(h % two_r, a, two_r), r) / sin_pi_fraction(a, r);
  return ratio * e(FractionModOne{phase, two_r});
}

Complex E_h(double x, std::uint64_t h) {
  const double frac = x - std::floor(x);
  if (frac == 0.0) return {static_cast<double>(h), 0.0};
  const double hd = static_cast<double>(h);
  const double ratio = std::sin(std::numbers::pi * hd * frac) / std::sin(std::numbers::pi * frac);
  const double angle = std::numbers::pi * (hd + 1.0) * frac;
  return ratio * Complex(std::cos(angle), std::sin(angle));
}

double E_h_norm2(const FractionModOne& x, std::uint64_t h) {
  const std::uint64_t r = x.r, a = x.a % r;
  if (a == 0) return static_cast<double>(h) * static_cast<double>(h);
  const double ratio = sin_pi_fraction(mulmod(h % r, a, r), r) / sin_pi_fraction(a, r);
  return ratio * ratio;
}

double F(const FractionModOne& x, std::uint64_t h) {
  const std::uint64_t a = x.a % x.r;
  const auto hd = static_cast<double>(h);
  if (a == 0) return hd;
  const std::uint64_t b = std::min(a, x.r - a);
  // 1/||x|| = r/b; compare exactly before dividing.
  if (static_cast<u128>(h) * b <= x.r) return hd;
  return static_cast<double>(x.r) / static_cast<double>(b);
}

double F(double x, std::uint64_t h) {
  const double frac = x - std::floor(x);
  const double dist = std::min(frac, 1.0 - frac);
  const auto hd = static_cast<double>(h);
  if (dist == 0.0) return hd;
  return std::min(hd, 1.0 / dist);
}

CharacterSumProfile CharacterSumProfile::from_residue_sets(
    std::uint64_t r, const std::function<std::vector<std::uint64_t>(std::uint64_t)>& classes_at) {
  const SquarefreeModulus mod = factor_squarefree(r);
  CharacterSumProfile out;
  out.r_ = r;
  out.primes_ = mod.primes();
  for (auto p : out.primes_) {
    const auto residues = classes_at(p);
    std::vector<Complex> table(p);
    std::vector<double> norms(p);
    for (std::uint64_t b = 0; b < p; ++b) {
      CompensatedComplexSum sum;
      for (auto s : residues) sum.add(e(FractionModOne{mulmod(s, b, p), p}));
      table[b] = sum.value();
      norms[b] = std::norm(table[b]);
    }
    out.cofactor_inverse_.push_back(mod_inverse(static_cast<std::int64_t>((r / p) % p), p));
    out.class_sizes_.push_back(residues.size());
    out.tables_.push_back(std::move(table));
    out.norms_.push_back(std::move(norms));
  }
  return out;
}

CharacterSumProfile CharacterSumProfile::from_offsets(const OffsetSet& offsets, std::uint64_t r) {
  return from_residue_sets(r, [&](std::uint64_t p) { return offsets.residues_mod(p); });
}

CharacterSumProfile CharacterSumProfile::from_excluded(const ClassProfile& excluded, std::uint64_t r) {
  return from_residue_sets(r, [&](std::uint64_t p) {
    const auto it = std::find_if(excluded.begin(), excluded.end(),
                                 [p](const ExcludedClasses& ec) { return ec.p == p; });
    if (it == excluded.end()) throw InvalidArgument("prime " + std::to_string(p) + " missing from class profile");
    std::vector<std::uint64_t> residues;
    for (auto w : it->residues) residues.push_back((p - w % p) % p);
    return residues;
  });
}

std::uint64_t CharacterSumProfile::residue_index(std::uint64_t a, std::size_t i) const {
  const std::uint64_t p = primes_[i];
  return mulmod(a % p, cofactor_inverse_[i], p);
}

Complex CharacterSumProfile::value(std::int64_t a) const {
  const std::uint64_t ar = mod_reduce(a, r_);
  if (gcd_u64(ar, r_) != 1) {
    throw NonCoprime("mu_D needs gcd(a, r) = 1, got a = " + std::to_string(a) + ", r = " + std::to_string(r_));
  }
  Complex out{1.0, 0.0};
  for (std::size_t i = 0; i < primes_.size(); ++i) out *= tables_[i][residue_index(ar, i)];
  return out;
}

double CharacterSumProfile::norm2(std::int64_t a) const {
  const std::uint64_t ar = mod_reduce(a, r_);
  if (gcd_u64(ar, r_) != 1) {
    throw NonCoprime("mu_D needs gcd(a, r) = 1, got a = " + std::to_string(a) + ", r = " + std::to_string(r_));
  }
  double out = 1.0;
  for (std::size_t i = 0; i < primes_.size(); ++i) out *= norms_[i][residue_index(ar, i)];
  return out;
}

double CharacterSumProfile::magnitude_bound() const {
  double out = 1.0;
  for (auto n : class_sizes_) out *= static_cast<double>(n);
  return out;
}

Complex mu_D(const OffsetSet& offsets, std::int64_t a, std::uint64_t r) {
  return CharacterSumProfile::from_offsets(offsets, r).value(a);
}

ExpSumValue product_expansion(const SquarefreeModulus& q, const OffsetSet& offsets, std::int64_t m) {
  const TupleDensity dens = density(q, offsets);
  if (dens.phi_D == 0) {
    throw ZeroDensity("offsets " + offsets.to_string() + " cover every class modulo a prime of " +
                      std::to_string(q.value()));
  }
  CompensatedComplexSum total;
  ExpSumValue out;
  for (const auto& d : divisors(q)) {
    const std::uint64_t r = d.value;
    const auto profile = CharacterSumProfile::from_offsets(offsets, r);
    std::uint64_t phi_D_r = 1;
    for (auto p : d.primes) phi_D_r *= p - offsets.residues_mod(p).size();
    const double weight = static_cast<double>(d.mu) / static_cast<double>(phi_D_r);
    const std::uint64_t mr = mod_reduce(m, r);
    for (auto a : reduced_residues(r)) {
      total.add(weight * e(FractionModOne{mulmod(mr, a % r, r), r}) * profile.value(static_cast<std::int64_t>(a)));
      ++out.terms;
    }
  }
  out.value = to_double(dens.P_D) * total.value();
  return out;
}

ExpSumValue singular_series_expsum(const SquarefreeModulus& q, const OffsetSet& offsets,
                                   const ComputeOptions& options) {
  const std::uint64_t qv = q.value();
  const std::size_t s = offsets.size();
  const auto divs = divisors(q);
  // Terms: one per (r_1..r_s, a_1..a_{s-1}), i.e. tau(q) q^{s-1}.
  check_budget(static_cast<long double>(divs.size()) * std::pow(static_cast<long double>(qv), s - 1),
               options, "singular series sum");

  std::vector<std::uint64_t> h;
  for (auto v : offsets.offsets()) h.push_back(mod_reduce(v, qv));
  std::vector<std::vector<std::uint64_t>> residues;
  std::vector<double> weights;
  for (const auto& d : divs) {
    residues.push_back(reduced_residues(d.value));
    weights.push_back(static_cast<double>(d.mu) / static_cast<double>(totient(d.value)));
  }

  CompensatedComplexSum total;
  ExpSumValue out;
  std::vector<std::size_t> pick(s);
  // Walk every divisor tuple, then every a_1..a_{s-1}; a_s is forced by the constraint.
  std::function<void(std::size_t, std::uint64_t, std::uint64_t, double)> walk =
      [&](std::size_t i, std::uint64_t acc, std::uint64_t phase, double weight) {
        const std::uint64_t r = divs[pick[i]].value, c = qv / r;
        if (i + 1 == s) {
          const std::uint64_t x = (qv - acc) % qv;
          ++out.terms;
          if (x % c != 0) return;
          const std::uint64_t a = x / c;
          if (gcd_u64(a, r) != 1) return;
          const std::uint64_t ph = (phase + mulmod(h[i], mulmod(a, c, qv), qv)) % qv;
          total.add(weight * e(FractionModOne{ph, qv}));
          return;
        }
        for (auto a : residues[pick[i]]) {
          const std::uint64_t step = mulmod(a % r, c, qv);
          const std::uint64_t nacc = (acc + step) % qv;
          const std::uint64_t nphase = (phase + mulmod(h[i], step, qv)) % qv;
          for (std::size_t j = 0; j < divs.size(); ++j) {
            pick[i + 1] = j;
            walk(i + 1, nacc, nphase, weight * weights[j]);
          }
        }
      };
  for (std::size_t j = 0; j < divs.size(); ++j) {
    pick[0] = j;
    walk(0, 0, 0, weights[j]);
  }
  out.value = total.value();
  return out;
}

std::vector<std::uint64_t> representation_histogram(std::span<const std::uint64_t> denominators,
                                                    const ComputeOptions& options) {
  const std::uint64_t L = lcm_of(denominators);
  long double work = 0;
  for (auto r : denominators) work += static_cast<long double>(L) * r;
  check_budget(work, options, "representation count");

  std::vector<std::uint64_t> hist(L, 0), next(L);
  hist[0] = 1;
  for (auto r : denominators) {
    const std::uint64_t step = L / r;
    std::fill(next.begin(), next.end(), 0);
    for (std::uint64_t x = 0; x < L; ++x) {
      if (hist[x] == 0) continue;
      for (std::uint64_t a = 1; a <= r; ++a) next[(x + (a % r) * step) % L] += hist[x];
    }
    hist.swap(next);
  }
  return hist;
}

std::uint64_t representation_count(std::span<const std::uint64_t> denominators, const FractionModOne& target,
                                   const ComputeOptions& options) {
  const auto hist = representation_histogram(denominators, options);
  const std::uint64_t L = hist.size();
  const FractionModOne t = target.reduced();
  if (L % t.r != 0) return 0;
  return hist[t.a * (L / t.r)];
}

std::uint64_t representation_multiplicity(std::span<const std::uint64_t> denominators) {
  u128 prod = 1;
  for (auto r : denominators) {
    prod *= r;
    if (prod > UINT64_MAX) throw BudgetExceeded("product of denominators overflows 64 bits");
  }
  return static_cast<std::uint64_t>(prod / lcm_of(denominators));
}

CorrelationValue f_correlation(std::uint64_t q, std::uint64_t h) {
  if (q < 2) throw InvalidArgument("f_correlation needs q >= 2");
  if (h == 0) throw InvalidArgument("f_correlation needs h >= 1");
  // F(a/q) = h when h b <= q (b = min(a, q - a)), else q/b.
  std::uint64_t capped = 0;
  mpq_class tail = 0;
  for (std::uint64_t a = 1; a < q; ++a) {
    const std::uint64_t b = std::min(a, q - a);
    if (static_cast<u128>(h) * b <= q) {
      ++capped;
    } else {
      tail += mpq_class(1, to_mpz(b) * to_mpz(b));
    }
  }
  CorrelationValue out;
  const mpz_class hz = to_mpz(h), qz = to_mpz(q);
  out.value = mpq_class(to_mpz(capped) * hz * hz) + qz * qz * tail;
  out.value.canonicalize();
  const mpq_class ratio = out.value / mpq_class(qz * to_mpz(std::min(q, h)));
  out.ratio = to_double(ratio);
  return out;
}

CorrelationMax f_correlation_max(std::uint64_t q_max, std::uint64_t h_max) {
  // prefix[b] = sum_{j <= b} 1/j^2.
  std::vector<long double> prefix(q_max / 2 + 2, 0.0L);
  for (std::size_t b = 1; b < prefix.size(); ++b) {
    prefix[b] = prefix[b - 1] + 1.0L / (static_cast<long double>(b) * static_cast<long double>(b));
  }
  CorrelationMax best;
  for (std::uint64_t q = 2; q <= q_max; ++q) {
    const std::uint64_t pairs = (q - 1) / 2;  // b in [1, pairs] occurs twice
    const long double qq = static_cast<long double>(q) * static_cast<long double>(q);
    for (std::uint64_t h = 1; h <= h_max; ++h) {
      const long double hh = static_cast<long double>(h) * static_cast<long double>(h);
      const std::uint64_t cut = std::min(pairs, q / h);
      long double sum = 2.0L * (static_cast<long double>(cut) * hh + qq * (prefix[pairs] - prefix[cut]));
      if (q % 2 == 0) sum += h >= 2 ? 4.0L : 1.0L;
      const double ratio = static_cast<double>(sum / (static_cast<long double>(q) * static_cast<long double>(std::min(q, h))));
      if (ratio > best.ratio) best = {ratio, q, h};
    }
  }
  return best;
}

double correlation_envelope(std::uint64_t q, std::uint64_t h, double constant) {
  return constant * static_cast<double>(std::min(q, h));
}

ConstrainedSum constrained_product_sum(std::span<const std::uint64_t> moduli, std::uint64_t h,
                                       const ComputeOptions& options, double constant) {
  for (auto m : moduli) {
    if (m < 2 || !is_squarefree(m)) throw InvalidArgument("moduli must be squarefree and greater than 1");
  }
  ConstrainedSum out;
  out.lcm = lcm_of(moduli);
  const std::uint64_t L = out.lcm;
  long double work = 0;
  for (auto m : moduli) work += static_cast<long double>(L) * m;
  check_budget(work, options, "constrained product sum");

  std::vector<double> dp(L, 0.0), next(L);
  dp[0] = 1.0;
  for (auto m : moduli) {
    const std::uint64_t step = L / m;
    std::vector<double> weight(m);
    for (std::uint64_t a = 1; a < m; ++a) weight[a] = F(FractionModOne{a, m}, h);
    std::fill(next.begin(), next.end(), 0.0);
    for (std::uint64_t x = 0; x < L; ++x) {
      if (dp[x] == 0.0) continue;
      for (std::uint64_t a = 1; a < m; ++a) next[(x + a * step) % L] += dp[x] * weight[a];
    }
    dp.swap(next);
  }
  out.lhs = dp[0];
  double rhs = 1.0 / static_cast<double>(L);
  for (auto m : moduli) rhs *= static_cast<double>(m) * std::sqrt(correlation_envelope(m, h, constant));
  out.rhs = rhs;
  out.holds = out.lhs <= out.rhs;
  return out;
}

}  // namespace residue_lab
