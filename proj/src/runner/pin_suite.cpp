#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "residue_lab/gaps.hpp"
#include "residue_lab/identities.hpp"
#include "residue_lab/moments.hpp"
#include "residue_lab/runner/pins.hpp"
#include "residue_lab/special_sets.hpp"

namespace residue_lab::runner {

namespace {

std::string join(const std::vector<std::int64_t>& values) { return OffsetSet(values).to_string(); }

std::string lambda_label(double lambda) {
  if (std::floor(lambda) == lambda) return std::to_string(static_cast<long long>(lambda));
  return format_double(lambda);
}

void keep_max(SweepResult& best, double value, Json where, bool& first) {
  if (first || value > best.value) {
    best.value = value;
    best.where = std::move(where);
    first = false;
  }
}

}  // namespace

SweepResult erdos_sweep(const std::vector<std::int64_t>& offsets, double lambda, unsigned omega_max,
                        const ComputeOptions& options) {
  SweepResult best;
  bool first = true;
  const OffsetSet D(offsets);
  for (unsigned w = 1; w <= omega_max; ++w) {
    const auto q = primorial(w);
    const auto r = erdos_ratio(q, D, lambda, options);
    keep_max(best, r.ratio, {{"q", q.value()}}, first);
  }
  return best;
}

SweepResult thm02_sweep(std::uint64_t q_max, const ComputeOptions& options) {
  SweepResult best;
  bool first = true;
  for (auto qv : squarefree_in_range(3, q_max)) {
    if (qv % 2 == 0) continue;
    const auto q = factor_squarefree(qv);
    const auto profile = squares_profile(q, options);
    std::vector<std::uint64_t> hs;
    for (std::uint64_t h = 1; h < qv; h *= 2) hs.push_back(h);
    hs.push_back(qv);
    for (auto h : hs) {
      const auto lhs = square_window_variance(profile, h, Centering::exact, options);
      const mpq_class rhs = mpq_class(to_mpz(qv) * to_mpz(h)) * profile.density_paper;
      keep_max(best, to_double(mpq_class(lhs / rhs)), {{"q", qv}, {"h", h}}, first);
    }
  }
  return best;
}

SweepResult moment_ratio_sweep(const std::string& kind, unsigned k, const ComputeOptions& options) {
  const BoundKind bound = parse_bound_kind(kind);
  const OffsetSet D({0, 2});
  SweepResult best;
  bool first = true;
  for (unsigned w = 2; w <= 6; ++w) {
    const auto q = primorial(w);
    const mpz_class qz = to_mpz(q.value()), phi = to_mpz(q.phi());
    for (std::uint64_t scale : {1u, 10u}) {
      mpz_class h;
      const mpz_class num = scale * qz;
      mpz_cdiv_q(h.get_mpz_t(), num.get_mpz_t(), phi.get_mpz_t());
      const auto m = moment_direct(q, D, h.get_ui(), k, options);
      BoundParams params;
      params.q = q;
      params.h = h.get_ui();
      params.k = k;
      params.s = static_cast<unsigned>(D.size());
      params.observed = m.float_value;
      const auto report = theoretical_bound(bound, params);
      keep_max(best, *report.ratio, {{"q", q.value()}, {"h", h.get_ui()}}, first);
    }
  }
  return best;
}

SweepResult corollary1_sweep(std::uint64_t X, const ComputeOptions& options) {
  const auto result = corollary1_experiment(X, {}, options);
  SweepResult best;
  bool first = true;
  for (const auto& row : result.rows) {
    if (first || row.ratio < best.value) {
      best.value = row.ratio;
      best.where = {{"q", result.q.value()}, {"h", row.h}};
      first = false;
    }
  }
  return best;
}

PinManifest compute_pin_manifest(const ComputeOptions& options, const std::vector<std::string>& prefixes) {
  PinManifest m;
  const auto add = [&](std::string id, PinKind kind, const std::function<SweepResult()>& sweep) {
    const bool wanted = std::any_of(prefixes.begin(), prefixes.end(),
                                    [&](const std::string& pre) { return id.rfind(pre, 0) == 0; });
    if (!wanted) return;
    auto r = sweep();
    m.pins.push_back({std::move(id), kind, r.value, std::move(r.where)});
  };
  for (const std::vector<std::int64_t>& D : {std::vector<std::int64_t>{0}, std::vector<std::int64_t>{0, 2}}) {
    for (double lambda : {2.0, 3.0}) {
      add("erdos_ratio/D=" + join(D) + "/lambda=" + lambda_label(lambda), PinKind::max,
          [&] { return erdos_sweep(D, lambda, 6, options); });
    }
  }
  add("thm02_exact", PinKind::max, [&] { return thm02_sweep(2000, options); });
  for (const char* kind : {"lemma12", "thm42_general"}) {
    for (unsigned k : {2u, 4u}) {
      add(std::string("moments_") + kind + "/k=" + std::to_string(k), PinKind::max,
          [&] { return moment_ratio_sweep(kind, k, options); });
    }
  }
  for (std::uint64_t X : {20u, 50u}) {
    add("corollary1/X=" + std::to_string(X), PinKind::min, [&] { return corollary1_sweep(X, options); });
  }
  add("f_correlation/C_F", PinKind::max, [] {
    const auto cf = f_correlation_max(2000, 2000);
    return SweepResult{cf.ratio, {{"q", cf.q}, {"h", cf.h}}};
  });
  return m;
}

}  // namespace residue_lab::runner
