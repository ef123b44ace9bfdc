#include "residue_lab/runner/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "residue_lab/error.hpp"
#include "residue_lab/gaps.hpp"
#include "residue_lab/identities.hpp"
#include "residue_lab/moments.hpp"
#include "residue_lab/special_sets.hpp"
#include "residue_lab/tuples.hpp"

namespace residue_lab::runner {

namespace {

using Row = std::vector<Cell>;

Cell opt(const std::optional<double>& v) {
  if (!v) return std::monostate{};
  return *v;
}

Cell u64(std::uint64_t v) { return v; }

std::string list_label(const std::vector<std::uint64_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string lambda_label(double lambda) {
  if (std::floor(lambda) == lambda) return std::to_string(static_cast<long long>(lambda));
  return format_double(lambda);
}

struct PinBook {
  std::optional<PinManifest> manifest;
  std::vector<std::string>* failures = nullptr;

  // Returns whether the value respects the pin (true when nothing is pinned).
  bool check(const std::string& id, double observed, const std::string& context) const {
    if (!manifest) return true;
    const auto* pin = manifest->find(id);
    if (!pin) return true;
    if (pin_respected(*pin, observed, manifest->margin)) return true;
    std::ostringstream msg;
    msg << "pin " << id << " (" << (pin->kind == PinKind::max ? "max " : "min ") << format_double(pin->value)
        << ", margin " << manifest->margin << ") violated at " << context << ": observed " << format_double(observed);
    failures->push_back(msg.str());
    return false;
  }
};

PinBook load_pins(const ExperimentConfig& config, std::vector<std::string>& failures) {
  PinBook book;
  book.failures = &failures;
  if (!config.pins.empty()) book.manifest = PinManifest::load(config.pins);
  return book;
}

bool is_primorial_upto(std::uint64_t q, std::size_t omega_lo, std::size_t omega_hi) {
  for (std::size_t w = omega_lo; w <= omega_hi; ++w) {
    if (primorial(w).value() == q) return true;
  }
  return false;
}

std::vector<std::uint64_t> log2_grid(std::uint64_t q) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t h = 1; h < q; h *= 2) out.push_back(h);
  out.push_back(q);
  return out;
}

// ---- verify-identities ---------------------------------------------------

ExperimentOutcome verify_identities(const ExperimentConfig& config) {
  ExperimentOutcome out{ResultTable("verify-identities", {"check", "q", "offsets", "m", "observed_re", "observed_im",
                                                          "expected", "error", "tolerance", "pass"}),
                        {},
                        std::nullopt};
  const auto record = [&](const std::string& check, std::uint64_t q, const std::string& offsets, Cell m,
                          Complex observed, double expected, double error, double tol) {
    const bool pass = error <= tol;
    out.table.add_row({check, u64(q), offsets, std::move(m), observed.real(), observed.imag(), expected, error, tol,
                       pass});
    if (!pass) {
      out.failures.push_back(check + " failed at q=" + std::to_string(q) + " offsets=" + offsets + " (error " +
                             format_double(error) + ")");
    }
  };

  for (auto qv : config.qs) {
    const auto q = factor_squarefree(qv);
    for (std::uint64_t m = 0; m < qv; ++m) {
      const auto v = kq_expansion(q, static_cast<std::int64_t>(m));
      const double expected = kq_indicator(q, static_cast<std::int64_t>(m));
      record("kq_expansion", qv, "", u64(m), v.value, expected, std::abs(v.value - expected), kIdentityTolerance);
    }
  }

  for (const auto& offsets : config.offsets) {
    const OffsetSet D(offsets);
    for (auto qv : config.qs) {
      const auto q = factor_squarefree(qv);
      if (density(q, D).phi_D == 0) continue;
      for (std::uint64_t m = 0; m < qv; ++m) {
        int expected = 1;
        for (auto h : offsets) expected *= kq_indicator(q, static_cast<std::int64_t>(m) + h);
        const auto v = product_expansion(q, D, static_cast<std::int64_t>(m));
        record("product_expansion", qv, D.to_string(), u64(m), v.value, expected, std::abs(v.value - double(expected)),
               kIdentityTolerance);
      }
    }
  }

  for (const auto& offsets : config.offsets) {
    if (offsets.size() > 2) continue;
    const OffsetSet D(offsets);
    for (auto qv : config.qs) {
      if (qv > 105) continue;
      const auto q = factor_squarefree(qv);
      const auto v = singular_series_expsum(q, D, config.options);
      const double expected = to_double(density(q, D).singular);
      record("singular_series", qv, D.to_string(), std::monostate{}, v.value, expected,
             std::abs(v.value - expected), kSingularTolerance);
    }
  }

  // Representation counts over divisor tuples of the largest primorial in range.
  std::uint64_t top = 1;
  const std::uint64_t q_max = config.qs.empty() ? 0 : *std::max_element(config.qs.begin(), config.qs.end());
  for (std::size_t w = 1; primorial(w).value() <= q_max; ++w) top = primorial(w).value();
  if (top > 1) {
    const auto divs = divisors(factor_squarefree(top));
    std::vector<std::uint64_t> rs;
    for (const auto& d : divs) rs.push_back(d.value);
    const auto check_tuple = [&](const std::vector<std::uint64_t>& den) {
      const auto hist = representation_histogram(den, config.options);
      const auto mult = representation_multiplicity(den);
      std::uint64_t bad = 0, largest = 0;
      for (auto c : hist) {
        if (c != 0 && c != mult) ++bad;
        largest = std::max(largest, c);
      }
      std::uint64_t lcm = 1;
      for (auto r : den) lcm = lcm / gcd_u64(lcm, r) * r;
      record("representation", lcm, list_label(den), std::monostate{}, Complex(double(largest), 0.0), double(mult),
             double(bad), 0.0);
    };
    for (auto a : rs) {
      for (auto b : rs) check_tuple({a, b});
    }
    for (auto a : rs) {
      for (auto b : rs) {
        for (auto c : rs) check_tuple({a, b, c});
      }
    }
  }
  return out;
}

// ---- moments ---------------------------------------------------------------

std::optional<BoundReport> try_bound(BoundKind kind, const BoundParams& params, std::string& note) {
  try {
    return theoretical_bound(kind, params);
  } catch (const PreconditionViolated& err) {
    if (!note.empty()) note += "; ";
    note += to_string(kind) + ": " + err.what();
    return std::nullopt;
  }
}

bool in_moment_pin_domain(const SquarefreeModulus& q, const OffsetSet& D, std::uint64_t h) {
  if (D != OffsetSet({0, 2}) || !is_primorial_upto(q.value(), 2, 6)) return false;
  for (std::uint64_t scale : {1u, 10u}) {
    mpz_class c;
    const mpz_class num = scale * to_mpz(q.value()), phi = to_mpz(q.phi());
    mpz_cdiv_q(c.get_mpz_t(), num.get_mpz_t(), phi.get_mpz_t());
    if (c.get_ui() == h) return true;
  }
  return false;
}

ExperimentOutcome moments(const ExperimentConfig& config) {
  ExperimentOutcome out{ResultTable("moments", {"q", "omega", "offsets", "h", "k", "moment", "expsum", "lemma12_bound",
                                                "lemma12_ratio", "lemma21_bound", "lemma21_ratio", "thm42_bound",
                                                "thm42_ratio", "note"}),
                        {},
                        std::nullopt};
  const auto pins = load_pins(config, out.failures);
  for (auto qv : config.qs) {
    const auto q = factor_squarefree(qv);
    for (const auto& offsets : config.offsets) {
      const OffsetSet D(offsets);
      for (auto h : config.h.resolve(q)) {
        const auto ms = moments_direct(q, D, h, config.ks, config.options);
        for (const auto& m : ms) {
          std::string note;
          std::optional<double> expsum;
          if (m.k == 2) {
            try {
              expsum = moment_expsum_k2(q, D, h, config.options);
            } catch (const ZeroDensity&) {
              note = "expsum: phi_D(q) = 0";
            } catch (const BudgetExceeded& err) {
              note = std::string("expsum: ") + err.what();
            }
          }
          BoundParams params;
          params.q = q;
          params.h = h;
          params.k = m.k;
          params.s = static_cast<unsigned>(D.size());
          params.observed = m.float_value;
          const auto l12 = try_bound(BoundKind::lemma12, params, note);
          const auto l21 = try_bound(BoundKind::lemma21, params, note);
          const auto t42 = try_bound(BoundKind::thm42_general, params, note);
          const auto bound_of = [](const std::optional<BoundReport>& r) -> Cell {
            if (!r) return std::monostate{};
            return r->bound_value;
          };
          const auto ratio_of = [](const std::optional<BoundReport>& r) -> Cell {
            if (!r || !r->ratio) return std::monostate{};
            return *r->ratio;
          };
          out.table.add_row({u64(qv), u64(q.omega()), D.to_string(), u64(h), u64(m.k), m.value, opt(expsum),
                             bound_of(l12), ratio_of(l12), bound_of(l21), ratio_of(l21), bound_of(t42), ratio_of(t42),
                             note});
          if (in_moment_pin_domain(q, D, h)) {
            const std::string where = "q=" + std::to_string(qv) + " h=" + std::to_string(h);
            if (l12 && l12->ratio) pins.check("moments_lemma12/k=" + std::to_string(m.k), *l12->ratio, where);
            if (t42 && t42->ratio) pins.check("moments_thm42_general/k=" + std::to_string(m.k), *t42->ratio, where);
          }
        }
      }
    }
  }
  return out;
}

// ---- gaps ------------------------------------------------------------------

ExperimentOutcome gaps(const ExperimentConfig& config) {
  ExperimentOutcome out{
      ResultTable("gaps", {"q", "omega", "offsets", "lambda", "V_lambda", "bound", "ratio", "starts", "max_gap"}),
      {},
      std::nullopt};
  const auto pins = load_pins(config, out.failures);
  for (auto qv : config.qs) {
    const auto q = factor_squarefree(qv);
    for (const auto& offsets : config.offsets) {
      const OffsetSet D(offsets);
      const auto stats = gap_statistics(q, D, config.lambdas, config.options);
      const std::uint64_t max_gap = *std::max_element(stats.gaps.begin(), stats.gaps.end());
      for (const auto& v : stats.v) {
        // Same evaluation as erdos_ratio, without a second sieve.
        const double s = static_cast<double>(D.size());
        const double log_bound =
            std::log(static_cast<double>(stats.starts.size())) - s * v.lambda * std::log(to_double(q.density()));
        const double log_v = v.exact ? std::log(to_double(mpq_class(*v.exact))) : std::log(v.value);
        const double ratio = std::exp(log_v - log_bound);
        Cell value = v.value;
        if (v.exact) value = mpq_class(*v.exact);
        out.table.add_row({u64(qv), u64(q.omega()), D.to_string(), v.lambda, value, std::exp(log_bound), ratio,
                           u64(stats.starts.size()), u64(max_gap)});
        if (is_primorial_upto(qv, 1, 6)) {
          pins.check("erdos_ratio/D=" + D.to_string() + "/lambda=" + lambda_label(v.lambda), ratio,
                     "q=" + std::to_string(qv));
        }
      }
    }
  }
  return out;
}

// ---- squares ---------------------------------------------------------------

ExperimentOutcome squares(const ExperimentConfig& config) {
  ExperimentOutcome out{ResultTable("squares", {"q", "omega", "h", "lhs_exact", "lhs_paper", "rhs", "ratio_exact",
                                                "ratio_paper", "expsum", "centering", "within_rhs"}),
                        {},
                        std::nullopt};
  const auto pins = load_pins(config, out.failures);
  for (auto qv : config.qs) {
    const auto q = factor_squarefree(qv);
    const auto profile = squares_profile(q, config.options);
    const auto grid = log2_grid(qv);
    for (auto h : config.h.resolve(q)) {
      const auto r = thm02_check(profile, h, config.options);
      std::optional<double> expsum;
      if (qv <= config.options.term_budget) expsum = square_window_variance_expsum(profile, h, config.options);
      const double asserted = config.centering == Centering::exact ? r.ratio_exact : r.ratio_paper;
      out.table.add_row({u64(qv), u64(q.omega()), u64(h), r.lhs_exact, r.lhs_paper, r.rhs, r.ratio_exact,
                         r.ratio_paper, opt(expsum), to_string(config.centering), asserted <= 1.0});
      const bool pinned = config.centering == Centering::exact && qv % 2 == 1 && qv <= 2000 &&
                          std::find(grid.begin(), grid.end(), h) != grid.end();
      if (pinned) pins.check("thm02_exact", r.ratio_exact, "q=" + std::to_string(qv) + " h=" + std::to_string(h));
    }
  }
  return out;
}

// ---- omega-sets ------------------------------------------------------------

// p - |Omega_p| > p^{0.55}: the corpus filter for the Weyl-type variance bound.
bool corpus_admits(const ResidueClassSystem& system) {
  for (const auto& ec : system.classes) {
    const double room = static_cast<double>(ec.p - ec.residues.size());
    if (!(room > std::pow(static_cast<double>(ec.p), 0.55))) return false;
  }
  return true;
}

std::optional<ResidueClassSystem> corpus_system(const std::string& corpus, const SquarefreeModulus& q) {
  ClassProfile classes;
  std::mt19937_64 rng(0x5eed0000ULL ^ q.value());
  for (auto p : q.primes()) {
    std::vector<std::uint64_t> omega;
    if (corpus == "singleton") {
      omega = {0};
    } else if (corpus == "qr") {
      if (p == 2) return std::nullopt;
      omega = quadratic_residues(p);
    } else {
      std::vector<std::uint64_t> all(p);
      for (std::uint64_t x = 0; x < p; ++x) all[x] = x;
      std::shuffle(all.begin(), all.end(), rng);
      const std::uint64_t cap = std::max<std::uint64_t>(1, p / 2);
      const std::uint64_t size = std::uniform_int_distribution<std::uint64_t>(1, cap)(rng);
      omega.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
      std::sort(omega.begin(), omega.end());
    }
    classes.push_back({p, omega});
  }
  auto system = ResidueClassSystem::make(q, classes);
  if (!corpus_admits(system)) return std::nullopt;
  return system;
}

std::string system_label(const ResidueClassSystem& system) {
  std::string out;
  for (const auto& ec : system.classes) {
    if (!out.empty()) out += ';';
    out += std::to_string(ec.p) + ":" + std::to_string(ec.residues.size());
  }
  return out;
}

ExperimentOutcome omega_sets(const ExperimentConfig& config) {
  ExperimentOutcome out{ResultTable("omega-sets", {"q", "corpus", "system", "h", "lhs", "rhs", "ratio", "pass"}),
                        {},
                        std::nullopt};
  std::vector<std::pair<std::string, ResidueClassSystem>> systems;
  if (!config.system_path.empty()) {
    systems.emplace_back("file", ResidueClassSystem::load(config.system_path));
  } else {
    for (auto qv : config.qs) {
      if (auto s = corpus_system(config.corpus, factor_squarefree(qv))) systems.emplace_back(config.corpus, *s);
    }
  }
  for (auto& [label, system] : systems) {
    system = weyl_constants(std::move(system));
    for (auto h : config.h.resolve(system.modulus)) {
      const auto r = thm41_check(system, h, config.options);
      const bool pass = r.ratio <= 1.0;
      out.table.add_row({u64(r.q), label, system_label(system), u64(h), r.lhs, r.rhs, r.ratio, pass});
      if (!pass) {
        out.failures.push_back("class-system variance bound exceeded at q=" + std::to_string(r.q) +
                               " h=" + std::to_string(h) + " (ratio " + format_double(r.ratio) + ")");
      }
    }
  }
  return out;
}

// ---- corollary1 ------------------------------------------------------------

ExperimentOutcome corollary1(const ExperimentConfig& config) {
  ExperimentOutcome out{
      ResultTable("corollary1", {"X", "q", "omega", "primes", "h", "statistic", "lower", "ratio"}), {}, std::nullopt};
  const auto pins = load_pins(config, out.failures);
  for (auto X : config.xs) {
    const auto primes = corollary1_primes(X);
    const auto q = SquarefreeModulus::from_primes(primes);
    std::vector<std::uint64_t> hs;
    if (config.h.kind != HGrid::Kind::log2) hs = config.h.resolve(q);
    const auto result = corollary1_experiment(X, hs, config.options);
    const auto defaults = corollary1_default_h(X, result.q);
    for (const auto& row : result.rows) {
      out.table.add_row({u64(X), u64(result.q.value()), u64(result.q.omega()), list_label(result.primes), u64(row.h),
                         row.statistic, row.lower, row.ratio});
      if (std::find(defaults.begin(), defaults.end(), row.h) != defaults.end()) {
        pins.check("corollary1/X=" + std::to_string(X), row.ratio, "h=" + std::to_string(row.h));
      }
    }
  }
  return out;
}

// ---- bounds-sweep ----------------------------------------------------------

ExperimentOutcome bounds_sweep(const ExperimentConfig& config) {
  ExperimentOutcome out{ResultTable("bounds-sweep", {"q", "omega", "offsets", "h", "k", "bound", "observed",
                                                     "log_bound", "bound_value", "ratio", "y", "q1", "q2",
                                                     "precondition"}),
                        {},
                        std::nullopt};
  for (auto qv : config.qs) {
    const auto q = factor_squarefree(qv);
    for (const auto& offsets : config.offsets) {
      const OffsetSet D(offsets);
      for (auto h : config.h.resolve(q)) {
        const auto ms = moments_direct(q, D, h, config.ks, config.options);
        for (const auto& m : ms) {
          for (auto kind : config.bounds) {
            BoundParams params;
            params.q = q;
            params.h = h;
            params.k = m.k;
            params.s = static_cast<unsigned>(D.size());
            params.observed = m.float_value;
            Row row{u64(qv), u64(q.omega()), D.to_string(), u64(h), u64(m.k), to_string(kind), m.float_value};
            try {
              const auto r = theoretical_bound(kind, params);
              row.insert(row.end(), {r.log_bound, r.bound_value, opt(r.ratio), opt(r.y),
                                     r.q1 ? Cell(u64(*r.q1)) : Cell(std::monostate{}),
                                     r.q2 ? Cell(u64(*r.q2)) : Cell(std::monostate{}), std::string("ok")});
            } catch (const PreconditionViolated& err) {
              row.insert(row.end(), {std::monostate{}, std::monostate{}, std::monostate{}, std::monostate{},
                                     std::monostate{}, std::monostate{}, std::string(err.what())});
            }
            out.table.add_row(std::move(row));
          }
        }
      }
    }
  }
  return out;
}

// ---- pin -------------------------------------------------------------------

ExperimentOutcome pin(const ExperimentConfig& config) {
  ExperimentOutcome out{ResultTable("pin", {"id", "kind", "value", "where"}), {}, std::nullopt};
  out.manifest = compute_pin_manifest(config.options, config.sweeps);
  for (const auto& p : out.manifest->pins) {
    out.table.add_row({p.id, std::string(p.kind == PinKind::max ? "max" : "min"), p.value, p.where.dump()});
  }
  return out;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config) {
  static const std::map<std::string, std::function<ExperimentOutcome(const ExperimentConfig&)>> table = {
      {"verify-identities", verify_identities},
      {"moments", moments},
      {"gaps", gaps},
      {"squares", squares},
      {"omega-sets", omega_sets},
      {"corollary1", corollary1},
      {"bounds-sweep", bounds_sweep},
      {"pin", pin},
  };
  const auto it = table.find(config.experiment);
  if (it == table.end()) throw ConfigError("unknown experiment '" + config.experiment + "'");
  return it->second(config);
}

}  // namespace residue_lab::runner
