#include "residue_lab/gaps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "residue_lab/error.hpp"

namespace residue_lab {

namespace {

bool is_integral(double x) { return std::floor(x) == x && x < 1e9; }

double log_mpz(const mpz_class& z) {
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, z.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * std::log(2.0);
}

}  // namespace

GapStatistics gap_statistics(const SquarefreeModulus& q, const OffsetSet& offsets, std::span<const double> lambdas,
                             const ComputeOptions& options) {
  for (auto l : lambdas) {
    if (!(l >= 1)) throw InvalidArgument("lambda must be at least 1");
  }
  const auto sieve = sieve_tuple_starts(q, offsets, options);
  if (sieve.popcount() == 0) {
    throw EmptySet("no tuple starts for offsets " + offsets.to_string() + " modulo " + std::to_string(q.value()));
  }
  GapStatistics stats;
  stats.q = q.value();
  stats.offsets = offsets.offsets();
  stats.starts = sieve.members();
  const auto& a = stats.starts;
  stats.gaps.reserve(a.size());
  for (std::size_t i = 0; i + 1 < a.size(); ++i) stats.gaps.push_back(a[i + 1] - a[i]);
  stats.gaps.push_back(a.front() + stats.q - a.back());
  for (auto g : stats.gaps) ++stats.gap_counts[g];
  for (auto l : lambdas) stats.v.push_back(v_lambda(stats, l));
  return stats;
}

GapMoment v_lambda(const GapStatistics& stats, double lambda) {
  if (!(lambda >= 1)) throw InvalidArgument("lambda must be at least 1");
  GapMoment out;
  out.lambda = lambda;
  if (is_integral(lambda)) {
    const auto e = static_cast<unsigned long>(lambda);
    mpz_class total = 0, power;
    for (const auto& [g, n] : stats.gap_counts) {
      mpz_ui_pow_ui(power.get_mpz_t(), g, e);
      total += power * to_mpz(n);
    }
    out.value = to_double(total);
    out.exact = std::move(total);
  } else {
    double total = 0;
    for (const auto& [g, n] : stats.gap_counts) total += static_cast<double>(n) * std::pow(static_cast<double>(g), lambda);
    out.value = total;
  }
  return out;
}

std::uint64_t tail_count(const GapStatistics& stats, double x) {
  std::uint64_t count = 0;
  for (auto it = stats.gap_counts.rbegin(); it != stats.gap_counts.rend() && static_cast<double>(it->first) > x; ++it) {
    count += it->second;
  }
  return count;
}

mpz_class tail_integral(const GapStatistics& stats, unsigned lambda) {
  // On (g_prev, g) the tail L is #{gaps >= g}, and lambda * int x^{lambda-1} = g^lambda - g_prev^lambda.
  mpz_class total = 0, hi, lo = 0;
  std::uint64_t prev = 0;
  for (const auto& [g, n] : stats.gap_counts) {
    (void)n;
    mpz_ui_pow_ui(hi.get_mpz_t(), g, lambda);
    total += to_mpz(tail_count(stats, static_cast<double>(prev))) * (hi - lo);
    lo = hi;
    prev = g;
  }
  return total;
}

ErdosRatio erdos_ratio(const SquarefreeModulus& q, const OffsetSet& offsets, double lambda,
                       const ComputeOptions& options) {
  const auto stats = gap_statistics(q, offsets, {}, options);
  ErdosRatio out;
  out.v = v_lambda(stats, lambda);
  const double s = static_cast<double>(offsets.size());
  const double logP = std::log(to_double(q.density()));
  const double log_bound = std::log(static_cast<double>(stats.starts.size())) - s * lambda * logP;
  const double log_v = out.v.exact ? log_mpz(*out.v.exact) : std::log(out.v.value);
  out.bound = std::exp(log_bound);
  out.ratio = std::exp(log_v - log_bound);
  return out;
}

SpacingHistogram spacing_histogram(const GapStatistics& stats, std::span<const double> edges) {
  if (stats.gaps.empty()) throw EmptySet("no gaps to bin");
  if (edges.empty() || !std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw InvalidArgument("spacing edges must be strictly increasing and nonempty");
  }
  SpacingHistogram out;
  const auto count = static_cast<double>(stats.gaps.size());
  out.mean_gap = static_cast<double>(stats.q) / count;
  double total = 0;
  for (const auto& [g, n] : stats.gap_counts) total += static_cast<double>(g) * static_cast<double>(n);
  out.mean_normalized = total / out.mean_gap / count;

  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < edges.size(); ++i) {
    SpacingBin bin;
    bin.lo = edges[i];
    bin.hi = i + 1 < edges.size() ? edges[i + 1] : inf;
    bin.poisson_tail = std::exp(-std::max(0.0, bin.lo));
    bin.poisson_mass = bin.poisson_tail - (std::isinf(bin.hi) ? 0.0 : std::exp(-std::max(0.0, bin.hi)));
    out.bins.push_back(bin);
  }
  // Normalized gap t = g phi_D / q lands in the last bin whose lo <= t.
  for (const auto& [g, n] : stats.gap_counts) {
    const double t = static_cast<double>(g) * count / static_cast<double>(stats.q);
    auto it = std::upper_bound(edges.begin(), edges.end(), t);
    if (it == edges.begin()) continue;  // below the first edge
    out.bins[static_cast<std::size_t>(it - edges.begin()) - 1].count += n;
  }
  for (auto& bin : out.bins) bin.fraction = static_cast<double>(bin.count) / count;
  return out;
}

std::vector<double> default_spacing_edges() {
  std::vector<double> edges;
  for (int i = 0; i <= 16; ++i) edges.push_back(0.25 * i);
  return edges;
}

}  // namespace residue_lab
