// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "residue_lab/gaps.hpp"
#include "residue_lab/identities.hpp"
#include "residue_lab/moments.hpp"
#include "residue_lab/runner/config.hpp"
#include "residue_lab/runner/experiments.hpp"
#include "residue_lab/runner/pins.hpp"
#include "residue_lab/special_sets.hpp"

using namespace residue_lab;
namespace rr = residue_lab::runner;

namespace {

// Tolerances and runtime limits.
constexpr double kIdentityTol = 1e-9;
constexpr double kSingularTol = 1e-8;
constexpr double kMomentRelTol = 1e-6;
constexpr double kMomentAbsTol = 1e-9;
constexpr double kSquaresRelTol = 1e-6;
constexpr double kSquaresAbsTol = 1e-9;
constexpr double kCharSumSlack = 1e-12;

constexpr double kLimitKq = 10, kLimitProduct = 30, kLimitSingular = 60, kLimitRepr = 30;
constexpr double kLimitSquares = 300, kLimitCharSums = 10, kLimitClassSystems = 120, kLimitPerf = 5;
constexpr double kLimitSuite = 600;

const double kPi = std::acos(-1.0);

struct Verdict {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && first_failure_.empty()) first_failure_ = what;
    pass_ &= ok;
  }
  bool pass() const { return pass_; }
  const std::string& first_failure() const { return first_failure_; }

 private:
  bool pass_ = true;
  std::string first_failure_;
};

void print_line(bool pass, int id, const char* name, double seconds, std::string detail) {
  while (!detail.empty() && detail.back() == ' ') detail.pop_back();
  std::printf("%s  %2d. %-34s %7.2f s  %s\n", pass ? "PASS" : "FAIL", id, name, seconds, detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

rr::PinManifest pins() {
  static const auto m = rr::PinManifest::load(RESIDUE_LAB_PINS_PATH);
  return m;
}

const rr::PinEntry& pin(const std::string& id) {
  static const auto m = pins();
  const auto* p = m.find(id);
  if (!p) throw std::runtime_error("pin " + id + " missing from the manifest");
  return *p;
}

std::vector<std::uint64_t> squarefree_upto(std::uint64_t hi, std::uint64_t lo = 1) { return squarefree_in_range(lo, hi); }

// ---- criteria ----------------------------------------------------------------

Verdict kq_identity() {
  Check c;
  double worst = 0;
  std::size_t n = 0;
  for (auto qv : squarefree_upto(210)) {
    const auto q = factor_squarefree(qv);
    for (std::int64_t m = 0; m < static_cast<std::int64_t>(qv); ++m) {
      const auto v = kq_expansion(q, m).value;
      const double err = std::abs(v.real() - kq_indicator(q, m));
      worst = std::max({worst, err, std::abs(v.imag())});
      c.require(err <= kIdentityTol && std::abs(v.imag()) <= kIdentityTol,
                "q=" + std::to_string(qv) + " m=" + std::to_string(m));
      ++n;
    }
  }
  return {c.pass(), std::to_string(n) + " (q,m) checks, max error " + fmt("%.2e", worst) + " " + c.first_failure()};
}

Verdict product_identity() {
  Check c;
  double worst = 0;
  std::size_t n = 0;
  for (std::uint64_t qv : {15u, 30u, 105u, 210u}) {
    const auto q = factor_squarefree(qv);
    for (const auto& offs : std::vector<std::vector<std::int64_t>>{{0}, {0, 2}, {0, 2, 6}}) {
      const OffsetSet D(offs);
      for (std::int64_t m = 0; m < static_cast<std::int64_t>(qv); ++m) {
        int expected = 1;
        for (auto h : offs) expected *= kq_indicator(q, m + h);
        const double err = std::abs(product_expansion(q, D, m).value - double(expected));
        worst = std::max(worst, err);
        c.require(err <= kIdentityTol, "q=" + std::to_string(qv) + " D=" + D.to_string() + " m=" + std::to_string(m));
        ++n;
      }
    }
  }
  return {c.pass(), std::to_string(n) + " checks, max error " + fmt("%.2e", worst) + " " + c.first_failure()};
}

Verdict singular_identity() {
  Check c;
  double worst = 0;
  std::size_t n = 0;
  const std::vector<std::vector<std::int64_t>> corpus{{0}, {0, 1}, {0, 2}, {0, 4}, {0, 6}, {-1, 1}, {0, 30}};
  for (auto qv : squarefree_upto(105)) {
    const auto q = factor_squarefree(qv);
    for (const auto& offs : corpus) {
      const OffsetSet D(offs);
      const double expected = density(q, D).singular.get_d();
      const double err = std::abs(singular_series_expsum(q, D).value - expected);
      worst = std::max(worst, err);
      c.require(err <= kSingularTol, "q=" + std::to_string(qv) + " D=" + D.to_string());
      ++n;
    }
  }
  const double hand = std::abs(singular_series_expsum(factor_squarefree(3), OffsetSet({0, 2})).value - 0.75);
  c.require(hand <= kSingularTol, "(3,{0,2}) -> 3/4");
  return {c.pass(), std::to_string(n) + " (q,D) pairs, max error " + fmt("%.2e", worst) + ", (3,{0,2}) error " +
                        fmt("%.1e", hand) + " " + c.first_failure()};
}

Verdict representation() {
  Check c;
  std::vector<std::uint64_t> rs;
  for (const auto& d : divisors(factor_squarefree(210))) rs.push_back(d.value);
  std::size_t tuples = 0, targets = 0;
  const auto check = [&](const std::vector<std::uint64_t>& den) {
    const auto hist = representation_histogram(den);
    const auto mult = representation_multiplicity(den);
    std::uint64_t total = 0, prod = 1;
    for (auto r : den) prod *= r;
    for (auto cnt : hist) {
      c.require(cnt == 0 || cnt == mult, "count outside {0, prod/lcm}");
      total += cnt;
      ++targets;
    }
    c.require(total == prod, "counts do not add up to prod r_i");
    ++tuples;
  };
  for (auto a : rs) {
    for (auto b : rs) {
      check({a, b});
      for (auto d : rs) check({a, b, d});
    }
  }
  return {c.pass(), std::to_string(tuples) + " divisor tuples, " + std::to_string(targets) + " targets " +
                        c.first_failure()};
}

Verdict moment_oracle() {
  Check c;
  double worst = 0;
  std::size_t n = 0;
  for (auto qv : squarefree_upto(210)) {
    const auto q = factor_squarefree(qv);
    for (const auto& offs : std::vector<std::vector<std::int64_t>>{{0}, {0, 2}, {0, 2, 6}}) {
      const OffsetSet D(offs);
      if (density(q, D).phi_D == 0) continue;
      for (std::uint64_t h = 1; h <= 50; ++h) {
        const auto exact = moment_direct(q, D, h, 2);
        const double x = exact.value.get_d();
        const double err = std::abs(moment_expsum_k2(q, D, h) - x);
        const double tol = kMomentRelTol * std::abs(x) + kMomentAbsTol;
        worst = std::max(worst, err / tol);
        c.require(err <= tol, "q=" + std::to_string(qv) + " D=" + D.to_string() + " h=" + std::to_string(h));
        ++n;
      }
    }
  }
  c.require(moment_direct(factor_squarefree(3), OffsetSet({0}), 1, 2).value == mpq_class(2, 3), "M_2(3,{0},1) = 2/3");
  return {c.pass(), std::to_string(n) + " (q,D,h) triples, worst error/tolerance " + fmt("%.2e", worst) +
                        ", M_2(3,{0},1) = 2/3 " + c.first_failure()};
}

mpq_class brute_binomial(std::uint64_t h, const mpq_class& P, unsigned k) {
  // Sum over all 2^h outcome strings.
  mpq_class total = 0;
  const mpq_class mean = mpq_class(to_mpz(h)) * P;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << h); ++mask) {
    const unsigned t = static_cast<unsigned>(__builtin_popcountll(mask));
    mpq_class prob = pow_rational(P, t) * pow_rational(mpq_class(1) - P, static_cast<unsigned>(h - t));
    mpq_class dev = mpq_class(t) - mean;
    dev.canonicalize();
    total += prob * pow_rational(dev, k);
  }
  total.canonicalize();
  return total;
}

Verdict binomial_moments() {
  Check c;
  std::size_t n = 0;
  for (const auto& P : {mpq_class(1, 2), mpq_class(1, 3), mpq_class(4, 15)}) {
    for (std::uint64_t h = 0; h <= 12; ++h) {
      for (unsigned k = 1; k <= 6; ++k) {
        c.require(binomial_moment(h, P, k) == brute_binomial(h, P, k),
                  "h=" + std::to_string(h) + " k=" + std::to_string(k) + " P=" + P.get_str());
        ++n;
      }
    }
  }
  c.require(binomial_moment(4, mpq_class(1, 2), 2) == 1, "mu_2(4,1/2) = 1");
  c.require(binomial_moment(3, mpq_class(1, 3), 3) == mpq_class(2, 9), "mu_3(3,1/3) = 2/9");
  return {c.pass(), std::to_string(n) + " exact equalities, mu_2(4,1/2)=1, mu_3(3,1/3)=2/9 " + c.first_failure()};
}

Verdict square_variance() {
  Check c;
  // (a) exponential-sum form of the exact-centered variance.
  double worst_a = 0;
  for (std::uint64_t qv : {15u, 105u, 1155u}) {
    const auto sp = squares_profile(factor_squarefree(qv));
    for (std::uint64_t h = 1; h <= 30; ++h) {
      const double exact = square_window_variance(sp, h, Centering::exact).get_d();
      // h = q gives a zero variance, where only the absolute floor applies.
      const double err = std::abs(square_window_variance_expsum(sp, h) - exact);
      const double tol = kSquaresRelTol * std::abs(exact) + kSquaresAbsTol;
      worst_a = std::max(worst_a, err / tol);
      c.require(err <= tol, "(a) q=" + std::to_string(qv) + " h=" + std::to_string(h));
    }
  }
  // (b) exact-centering ratio under the pinned maximum.
  const auto& p = pin("thm02_exact");
  double worst_b = 0;
  std::uint64_t at_q = 0, at_h = 0;
  for (auto qv : squarefree_upto(2000, 3)) {
    if (qv % 2 == 0) continue;
    const auto sp = squares_profile(factor_squarefree(qv));
    std::vector<std::uint64_t> hs;
    for (std::uint64_t h = 1; h < qv; h *= 2) hs.push_back(h);
    hs.push_back(qv);
    for (auto h : hs) {
      const double r = thm02_check(sp, h).ratio_exact;
      if (r > worst_b) {
        worst_b = r;
        at_q = qv;
        at_h = h;
      }
    }
  }
  c.require(rr::pin_respected(p, worst_b, pins().margin), "(b) pinned maximum exceeded");
  // (c) the 1/(2^omega P) centering overshoots the right-hand side at q = 15.
  const auto sp15 = squares_profile(factor_squarefree(15));
  std::uint64_t first_h = 0;
  for (std::uint64_t h = 1; h <= 150 && first_h == 0; ++h) {
    const auto r = thm02_check(sp15, h);
    if (r.lhs_paper > r.rhs) first_h = h;
  }
  c.require(first_h != 0, "(c) no h <= 10q with paper-centered LHS > RHS");
  std::ostringstream d;
  d << "(a) worst error/tolerance " << fmt("%.1e", worst_a) << "; (b) max ratio " << fmt("%.6f", worst_b) << " at q=" << at_q
    << " h=" << at_h << " vs pin " << fmt("%.6f", p.value) << "+5%; (c) q=15 paper centering exceeds RHS from h="
    << first_h << " " << c.first_failure();
  return {c.pass(), d.str()};
}

Verdict character_sums() {
  Check c;
  double tightest = 0;
  for (auto p : primes_in_range(3, 200)) {
    const auto nr = quadratic_nonresidues(p);
    const double m = character_sum_max(p, nr).value;
    const double bound = (std::sqrt(double(p)) + 1) / 2;
    tightest = std::max(tightest, m / bound);
    c.require(m <= bound + kCharSumSlack, "(sqrt p + 1)/2 exceeded at p=" + std::to_string(p));
    const auto ds = dstar_classes(p);
    for (std::uint64_t a : {(p - 1) / 2, (p + 1) / 2}) {
      c.require(character_sum_magnitude(p, ds, a) >= double(p) / kPi,
                "D* factor below p/pi at p=" + std::to_string(p) + " a=" + std::to_string(a));
    }
  }
  const double at5 = character_sum_magnitude(5, quadratic_nonresidues(5), 1);
  c.require(std::abs(at5 - (1 + std::sqrt(5.0)) / 2) <= kCharSumSlack, "p=5 value is not (1+sqrt5)/2");
  c.require(at5 > std::sqrt(5.0) / 2, "sqrt(p)/2 not violated at p=5");
  return {c.pass(), "max |sum|/((sqrt p+1)/2) = " + fmt("%.6f", tightest) + "; p=5,a=1 gives " + fmt("%.6f", at5) +
                        " > sqrt5/2 = " + fmt("%.6f", std::sqrt(5.0) / 2) + "; D* >= p/pi for all odd p <= 200 " +
                        c.first_failure()};
}

Verdict class_systems() {
  Check c;
  std::ostringstream d;
  for (const char* corpus : {"singleton", "qr", "random"}) {
    rr::RawConfig raw = rr::default_config("omega-sets");
    raw["q-range"] = "1..2000";
    raw["corpus"] = corpus;
    const auto out = rr::run_experiment(rr::resolve_config("omega-sets", raw));
    double worst = 0;
    std::set<std::uint64_t> qs;
    for (const auto& row : out.table.rows_json()) {
      worst = std::max(worst, row["ratio"].get<double>());
      qs.insert(row["q"].get<std::uint64_t>());
    }
    c.require(out.failures.empty() && worst <= 1.0, std::string(corpus) + " corpus ratio above 1");
    c.require(qs.size() > 100, std::string(corpus) + " corpus too small");
    d << corpus << ": " << qs.size() << " systems, max ratio " << fmt("%.4f", worst) << "; ";
  }
  const auto hand = thm41_check(ResidueClassSystem::make(factor_squarefree(3), {{3, {0}}}), 1);
  c.require(hand.lhs == mpq_class(2, 3) && std::abs(hand.rhs - 7.0 / 3) < 1e-12 && hand.ratio <= 1,
            "2/3 vs 7/3 hand case");
  d << "hand case " << hand.lhs.get_str() << " <= " << fmt("%.6f", hand.rhs) << " " << c.first_failure();
  return {c.pass(), d.str()};
}

Verdict gap_statistics_criterion() {
  Check c;
  const std::vector<double> two{2};
  c.require(*gap_statistics(factor_squarefree(15), OffsetSet({0}), two).v[0].exact == 33, "V_2(15,{0}) = 33");
  c.require(*gap_statistics(factor_squarefree(30), OffsetSet({0}), two).v[0].exact == 132, "V_2(30,{0}) = 132");
  std::size_t runs = 0;
  const std::vector<double> lambdas{1, 2, 3, 4};
  for (auto qv : squarefree_upto(3000)) {
    const auto q = factor_squarefree(qv);
    for (const auto& offs : std::vector<std::vector<std::int64_t>>{{0}, {0, 2}, {0, 2, 6}}) {
      const OffsetSet D(offs);
      const auto dens = density(q, D);
      if (dens.phi_D == 0) continue;
      const auto s = gap_statistics(q, D, lambdas);
      c.require(std::accumulate(s.gaps.begin(), s.gaps.end(), std::uint64_t{0}) == qv, "sum of gaps != q");
      c.require(s.starts.size() == dens.phi_D, "|starts| != phi_D");
      for (unsigned lam = 1; lam <= 4; ++lam) {
        c.require(tail_integral(s, lam) == *s.v[lam - 1].exact, "tail integral != V_lambda");
      }
      ++runs;
    }
  }
  std::ostringstream d;
  d << "V_2 = 33, 132; " << runs << " runs with sum gaps = q, |starts| = phi_D, tail integral = V_lambda (lambda<=4);";
  for (const std::vector<std::int64_t>& offs : {std::vector<std::int64_t>{0}, std::vector<std::int64_t>{0, 2}}) {
    for (int lam : {2, 3}) {
      const OffsetSet D(offs);
      const std::string id = "erdos_ratio/D=" + D.to_string() + "/lambda=" + std::to_string(lam);
      double worst = 0;
      for (std::size_t w = 1; w <= 6; ++w) worst = std::max(worst, erdos_ratio(primorial(w), D, lam).ratio);
      c.require(rr::pin_respected(pin(id), worst, pins().margin), id + " above pin");
      d << " " << D.to_string() << "/" << lam << ": " << fmt("%.4f", worst) << " (pin " << fmt("%.4f", pin(id).value)
        << ")";
    }
  }
  d << " " << c.first_failure();
  return {c.pass(), d.str()};
}

Verdict corollary1() {
  Check c;
  std::ostringstream d;
  for (std::uint64_t X : {20u, 50u}) {
    const auto r = corollary1_experiment(X);
    c.require(r.q.value() == (X == 20 ? 899u : 190747u), "q for X=" + std::to_string(X));
    double worst = 1e300;
    for (const auto& row : r.rows) worst = std::min(worst, row.ratio);
    const auto& p = pin("corollary1/X=" + std::to_string(X));
    c.require(rr::pin_respected(p, worst, pins().margin), "X=" + std::to_string(X) + " below pin");
    d << "X=" << X << ": q=" << r.q.value() << ", " << r.rows.size() << " h values, min ratio " << fmt("%.4f", worst)
      << " (pin " << fmt("%.4f", p.value) << "-5%); ";
  }
  d << c.first_failure();
  return {c.pass(), d.str()};
}

Verdict performance(double suite_seconds) {
  Check c;
  const auto q = factor_squarefree(30030);
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = moment_direct(q, OffsetSet({0, 2}), 100, 4);
  const double dt = seconds_since(t0);
  c.require(dt < kLimitPerf, "moment_direct(30030,{0,2},100,4) too slow");
  const auto sieve = sieve_tuple_starts(q, OffsetSet({0, 2}));
  const std::size_t words = sieve.words().size();
  c.require(words == (30030 + 63) / 64 + 1, "sieve is not q bits");
  // Every experiment at its default configuration, pinned where pins apply.
  const auto t1 = std::chrono::steady_clock::now();
  for (const auto& name : rr::experiment_names()) {
    rr::RawConfig raw = rr::default_config(name);
    if (name != "pin" && name != "verify-identities" && name != "omega-sets" && name != "bounds-sweep") {
      raw["pins"] = RESIDUE_LAB_PINS_PATH;
    }
    const auto out = rr::run_experiment(rr::resolve_config(name, raw));
    c.require(out.failures.empty(), name + " defaults: " + (out.failures.empty() ? "" : out.failures.front()));
    c.require(name == "pin" ? out.manifest && out.manifest->pins.size() == pins().pins.size() : !out.table.rows().empty(),
              name + " defaults produced nothing");
  }
  const double defaults_seconds = seconds_since(t1);
  suite_seconds += defaults_seconds;
  c.require(suite_seconds < kLimitSuite, "suite slower than 10 minutes");
  return {c.pass(), "M_4 = " + fmt("%.6g", m.float_value) + " in " + fmt("%.4f", dt) + " s, sieve " +
                        std::to_string(words) + " words; default experiments " + fmt("%.1f", defaults_seconds) +
                        " s; suite " + fmt("%.1f", suite_seconds) + " s " +
                        c.first_failure()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Verdict()> run;
  };
  const auto suite_start = std::chrono::steady_clock::now();
  const std::vector<Criterion> criteria = {
      {1, "k_q expansion identity", kLimitKq, kq_identity},
      {2, "tuple product expansion identity", kLimitProduct, product_identity},
      {3, "singular-series identity", kLimitSingular, singular_identity},
      {4, "representation counts", kLimitRepr, representation},
      {5, "moment oracle equality", 0, moment_oracle},
      {6, "binomial moments", 0, binomial_moments},
      {7, "square-window variance", kLimitSquares, square_variance},
      {8, "character-sum extremum", kLimitCharSums, character_sums},
      {9, "class-system variance bound", kLimitClassSystems, class_systems},
      {10, "gap statistics", 0, gap_statistics_criterion},
      {11, "D* lower-bound statistic", 0, corollary1},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = cr.run();
    } catch (const std::exception& err) {
      v = {false, std::string("threw: ") + err.what()};
    }
    const double dt = seconds_since(t0);
    if (cr.limit > 0 && dt >= cr.limit) {
      v.pass = false;
      v.detail += " [runtime limit " + fmt("%.0f", cr.limit) + " s exceeded]";
    }
    failed += !v.pass;
    print_line(v.pass, cr.id, cr.name, dt, v.detail);
  }
  const auto t0 = std::chrono::steady_clock::now();
  Verdict perf;
  try {
    perf = performance(seconds_since(suite_start));
  } catch (const std::exception& err) {
    perf = {false, std::string("threw: ") + err.what()};
  }
  failed += !perf.pass;
  print_line(perf.pass, 12, "performance", seconds_since(t0), perf.detail);
  std::printf("%d of 12 criteria passed\n", 12 - failed);
  return failed == 0 ? 0 : 1;
}
