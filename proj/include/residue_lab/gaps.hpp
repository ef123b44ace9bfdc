#pragma once

// Cyclic gaps between consecutive tuple starts, the power sums V_lambda and
// the tail counts L(x).

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "residue_lab/arith.hpp"
#include "residue_lab/options.hpp"
#include "residue_lab/tuples.hpp"

namespace residue_lab {

struct GapMoment {
  double lambda = 1;
  std::optional<mpz_class> exact;  // set for integer lambda
  double value = 0;
};

struct GapStatistics {
  std::uint64_t q = 1;
  std::vector<std::int64_t> offsets;
  std::vector<std::uint64_t> starts;  // ascending, in [0, q)
  // gaps[i] = starts[i+1] - starts[i]; the last one wraps to starts[0] + q.
  std::vector<std::uint64_t> gaps;
  std::map<std::uint64_t, std::uint64_t> gap_counts;  // distinct gap -> multiplicity
  std::vector<GapMoment> v;
};

// Throws EmptySet when no tuple start exists, InvalidArgument for lambda < 1.
GapStatistics gap_statistics(const SquarefreeModulus& q, const OffsetSet& offsets,
                             std::span<const double> lambdas = {}, const ComputeOptions& options = {});

// V_lambda; exact when lambda is an integer.
GapMoment v_lambda(const GapStatistics& stats, double lambda);

// L(x): number of gaps strictly greater than x.
std::uint64_t tail_count(const GapStatistics& stats, double x);

// lambda * integral_0^inf L(x) x^{lambda-1} dx, evaluated step by step over the
// distinct gap values. Equals V_lambda.
mpz_class tail_integral(const GapStatistics& stats, unsigned lambda);

struct ErdosRatio {
  GapMoment v;
  double bound = 0;  // phi_D(q) P^{-s lambda}
  double ratio = 0;
};

ErdosRatio erdos_ratio(const SquarefreeModulus& q, const OffsetSet& offsets, double lambda,
                       const ComputeOptions& options = {});

struct SpacingBin {
  double lo = 0;
  double hi = 0;  // +inf for the overflow bin
  std::uint64_t count = 0;
  double fraction = 0;
  double poisson_mass = 0;  // e^{-lo} - e^{-hi}
  double poisson_tail = 0;  // e^{-lo}
};

struct SpacingHistogram {
  double mean_gap = 0;         // q / phi_D(q)
  double mean_normalized = 0;  // always 1
  std::vector<SpacingBin> bins;
};

// Gaps divided by the mean gap, binned on the given ascending edges; a final
// bin collects everything from the last edge upward.
SpacingHistogram spacing_histogram(const GapStatistics& stats, std::span<const double> edges);

// Edges 0, 0.25, ..., 4.
std::vector<double> default_spacing_edges();

}  // namespace residue_lab
