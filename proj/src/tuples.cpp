#include "residue_lab/tuples.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <thread>

#include "residue_lab/error.hpp"
#include "residue_lab/kernels/kernels.hpp"

namespace residue_lab {

namespace {

// Primes up to this size are applied as a periodic word pattern (p words per
// period); larger primes clear their classes one bit at a time.
constexpr std::uint64_t kPatternPrimeLimit = 4096;

constexpr std::size_t kBlockBits = 4096;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

void require_window(std::uint64_t h) {
  if (h == 0) throw PreconditionViolated("window length h must be at least 1");
  if (h > UINT32_MAX) throw PreconditionViolated("window length h must be below 2^32");
}

// Splits [0, q) into contiguous chunks, one per worker.
std::vector<std::pair<std::uint64_t, std::uint64_t>> chunk_ranges(std::uint64_t q, unsigned threads) {
  const std::uint64_t workers = std::max<std::uint64_t>(1, std::min<std::uint64_t>(threads, q / kBlockBits + 1));
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (std::uint64_t i = 0; i < workers; ++i) {
    out.emplace_back(q * i / workers, q * (i + 1) / workers);
  }
  return out;
}

template <typename Fn>
void run_chunks(const std::vector<std::pair<std::uint64_t, std::uint64_t>>& chunks, Fn&& fn) {
  if (chunks.size() == 1) {
    fn(std::size_t{0});
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) workers.emplace_back([&fn, i] { fn(i); });
}

// Feeds W(n) for n in [begin, end) to sink(const uint32_t*, count) in blocks.
template <typename Sink>
void sweep_windows(const ResidueSieve& sieve, std::uint64_t h, std::uint64_t begin,
                   std::uint64_t end, Sink&& sink) {
  const std::uint64_t q = sieve.modulus();
  const auto& k = kernels::active();
  std::vector<std::uint64_t> lead(kBlockBits / 64 + 1), trail(kBlockBits / 64 + 1);
  std::vector<std::uint32_t> block(kBlockBits);

  auto w = static_cast<std::uint32_t>((h / q) * sieve.popcount() +
                                      sieve.count_cyclic((begin + 1) % q, h % q));
  // W(n+1) = W(n) + t(n+h+1) - t(n+1).
  for (std::uint64_t n = begin; n < end; n += kBlockBits) {
    const auto nbits = static_cast<std::size_t>(std::min<std::uint64_t>(kBlockBits, end - n));
    sieve.extract_cyclic((n + h + 1) % q, nbits, lead.data());
    sieve.extract_cyclic((n + 1) % q, nbits, trail.data());
    w = k.window_run(lead.data(), trail.data(), nbits, w, block.data());
    sink(block.data(), nbits);
  }
}

}  // namespace

OffsetSet::OffsetSet(std::vector<std::int64_t> offsets) : offsets_(std::move(offsets)) {
  if (offsets_.empty()) throw InvalidArgument("offset set must not be empty");
  std::sort(offsets_.begin(), offsets_.end());
  if (std::adjacent_find(offsets_.begin(), offsets_.end()) != offsets_.end()) {
    throw InvalidArgument("offset set has a repeated element");
  }
}

OffsetSet OffsetSet::parse(std::string_view text) {
  std::vector<std::int64_t> values;
  while (true) {
    const auto comma = text.find(',');
    const std::string_view item = trim(text.substr(0, comma));
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size()) {
      throw InvalidArgument("bad offset '" + std::string(item) + "'");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return OffsetSet(std::move(values));
}

std::uint64_t OffsetSet::span() const {
  return static_cast<std::uint64_t>(offsets_.back()) - static_cast<std::uint64_t>(offsets_.front());
}

std::vector<std::uint64_t> OffsetSet::residues_mod(std::uint64_t p) const {
  std::vector<std::uint64_t> out;
  out.reserve(offsets_.size());
  for (auto h : offsets_) out.push_back(mod_reduce(h, p));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string OffsetSet::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < offsets_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(offsets_[i]);
  }
  return out;
}

std::uint64_t nu_p(const OffsetSet& offsets, std::uint64_t p) {
  if (!is_prime(p)) throw InvalidArgument("nu_p needs a prime, got " + std::to_string(p));
  return offsets.residues_mod(p).size();
}

bool is_admissible(const OffsetSet& offsets) {
  for (auto p : primes_in_range(2, offsets.size())) {
    if (offsets.residues_mod(p).size() == p) return false;
  }
  return true;
}

bool is_admissible(const OffsetSet& offsets, const SquarefreeModulus& q) {
  for (auto p : q.primes()) {
    if (offsets.residues_mod(p).size() == p) return false;
  }
  return true;
}

TupleDensity density(const SquarefreeModulus& q, const OffsetSet& offsets) {
  TupleDensity d;
  const auto s = static_cast<unsigned>(offsets.size());
  d.phi_D = 1;
  d.singular = 1;
  for (auto p : q.primes()) {
    const std::uint64_t nu = offsets.residues_mod(p).size();
    d.phi_D *= p - nu;
    const mpq_class one_minus_inv = make_rational(to_mpz(p - 1), to_mpz(p));
    const mpq_class local = make_rational(to_mpz(p - nu), to_mpz(p));
    d.singular *= local / pow_rational(one_minus_inv, s);
  }
  d.singular.canonicalize();
  d.P_D = mpq_class(to_mpz(d.phi_D), to_mpz(q.value()));
  d.P_D.canonicalize();
  d.P_pow_s = pow_rational(q.density(), s);
  return d;
}

ClassProfile excluded_classes(const SquarefreeModulus& q, const OffsetSet& offsets) {
  ClassProfile profile;
  for (auto p : q.primes()) {
    ExcludedClasses ec{p, {}};
    for (auto h : offsets.offsets()) ec.residues.push_back(mod_reduce(-h, p));
    std::sort(ec.residues.begin(), ec.residues.end());
    ec.residues.erase(std::unique(ec.residues.begin(), ec.residues.end()), ec.residues.end());
    profile.push_back(std::move(ec));
  }
  return profile;
}

std::uint64_t allowed_count(const ClassProfile& profile, std::span<const std::uint64_t> primes) {
  std::uint64_t out = 1;
  for (auto p : primes) {
    const auto it = std::find_if(profile.begin(), profile.end(),
                                 [p](const ExcludedClasses& ec) { return ec.p == p; });
    if (it == profile.end()) throw InvalidArgument("prime " + std::to_string(p) + " missing from profile");
    out *= p - it->residues.size();
  }
  return out;
}

ResidueSieve ResidueSieve::build(const SquarefreeModulus& q, const ClassProfile& profile,
                                 const ComputeOptions& options) {
  if (q.value() > options.memory_budget_bits) {
    throw BudgetExceeded("sieve of " + std::to_string(q.value()) + " bits exceeds the memory budget of " +
                         std::to_string(options.memory_budget_bits) + " bits");
  }
  ResidueSieve sieve;
  sieve.q_ = q.value();
  const std::size_t nwords = static_cast<std::size_t>((sieve.q_ + 63) / 64);
  sieve.words_.assign(nwords + 1, ~std::uint64_t{0});
  sieve.words_[nwords] = 0;
  if (const unsigned tail = sieve.q_ % 64; tail != 0) {
    sieve.words_[nwords - 1] = (std::uint64_t{1} << tail) - 1;
  }

  const auto& k = kernels::active();
  std::vector<std::uint64_t> pattern;
  for (const auto& ec : profile) {
    if (ec.residues.empty()) continue;
    if (!q.divisible_by(ec.p)) throw InvalidArgument("profile prime does not divide q");
    const std::uint64_t p = ec.p;
    if (p <= kPatternPrimeLimit) {
      // 64 * p bits is a whole number of periods of p.
      pattern.assign(p + kernels::kPatternPadWords, ~std::uint64_t{0});
      for (auto r : ec.residues) {
        for (std::uint64_t b = r; b < 64 * p; b += p) pattern[b >> 6] &= ~(std::uint64_t{1} << (b & 63));
      }
      for (std::size_t j = 0; j < kernels::kPatternPadWords; ++j) pattern[p + j] = pattern[j % p];
      k.and_periodic(sieve.words_.data(), nwords, pattern.data(), p, 0);
    } else {
      for (auto r : ec.residues) {
        for (std::uint64_t b = r; b < sieve.q_; b += p) sieve.words_[b >> 6] &= ~(std::uint64_t{1} << (b & 63));
      }
    }
  }
  sieve.popcount_ = k.popcount(sieve.words_.data(), nwords);
  return sieve;
}

std::vector<std::uint64_t> ResidueSieve::members() const {
  std::vector<std::uint64_t> out;
  out.reserve(popcount_);
  for (std::size_t w = 0; w + 1 < words_.size(); ++w) {
    for (std::uint64_t bits = words_[w]; bits != 0; bits &= bits - 1) {
      out.push_back(64 * w + static_cast<unsigned>(std::countr_zero(bits)));
    }
  }
  return out;
}

std::uint64_t ResidueSieve::read_linear(std::uint64_t pos, unsigned count) const {
  const std::size_t w = pos >> 6;
  const unsigned off = pos & 63;
  std::uint64_t v = words_[w] >> off;
  if (off != 0 && off + count > 64) v |= words_[w + 1] << (64 - off);
  return count == 64 ? v : v & ((std::uint64_t{1} << count) - 1);
}

std::uint64_t ResidueSieve::count_linear(std::uint64_t begin, std::uint64_t end) const {
  if (begin >= end) return 0;
  const std::size_t wb = begin >> 6, we = end >> 6;
  const std::uint64_t low_mask = ~std::uint64_t{0} << (begin & 63);
  if (wb == we) {
    const std::uint64_t high_mask = (std::uint64_t{1} << (end & 63)) - 1;
    return static_cast<std::uint64_t>(std::popcount(words_[wb] & low_mask & high_mask));
  }
  std::uint64_t total = static_cast<std::uint64_t>(std::popcount(words_[wb] & low_mask));
  total += kernels::active().popcount(words_.data() + wb + 1, we - wb - 1);
  if (end & 63) total += static_cast<std::uint64_t>(std::popcount(words_[we] & ((std::uint64_t{1} << (end & 63)) - 1)));
  return total;
}

std::uint64_t ResidueSieve::count_cyclic(std::uint64_t start, std::uint64_t len) const {
  if (len > q_) throw InvalidArgument("cyclic range longer than the period");
  const std::uint64_t first = std::min(len, q_ - start);
  return count_linear(start, start + first) + count_linear(0, len - first);
}

void ResidueSieve::extract_cyclic(std::uint64_t start, std::size_t nbits, std::uint64_t* out) const {
  std::uint64_t pos = start % q_;
  for (std::size_t k = 0; 64 * k < nbits; ++k) {
    const auto want = static_cast<unsigned>(std::min<std::size_t>(64, nbits - 64 * k));
    std::uint64_t word = 0;
    unsigned got = 0;
    while (got < want) {
      const auto take = static_cast<unsigned>(std::min<std::uint64_t>(want - got, q_ - pos));
      word |= read_linear(pos, take) << got;
      got += take;
      pos += take;
      if (pos == q_) pos = 0;
    }
    out[k] = word;
  }
}

TupleStartSieve sieve_tuple_starts(const SquarefreeModulus& q, const OffsetSet& offsets,
                                   const ComputeOptions& options) {
  return ResidueSieve::build(q, excluded_classes(q, offsets), options);
}

std::vector<std::uint32_t> window_counts(const ResidueSieve& sieve, std::uint64_t h,
                                         const ComputeOptions& options) {
  require_window(h);
  std::vector<std::uint32_t> out(sieve.modulus());
  const auto chunks = chunk_ranges(sieve.modulus(), options.threads);
  run_chunks(chunks, [&](std::size_t i) {
    auto [begin, end] = chunks[i];
    std::uint32_t* dst = out.data() + begin;
    sweep_windows(sieve, h, begin, end, [&](const std::uint32_t* w, std::size_t n) {
      std::copy(w, w + n, dst);
      dst += n;
    });
  });
  return out;
}

WindowHistogram window_histogram(const ResidueSieve& sieve, std::uint64_t h,
                                 const ComputeOptions& options) {
  require_window(h);
  const std::uint64_t q = sieve.modulus();
  WindowHistogram hist;
  hist.base = (h / q) * sieve.popcount();
  const std::uint64_t spread = std::min(h % q, sieve.popcount());
  if (spread >= (std::uint64_t{1} << 27)) {
    throw BudgetExceeded("window histogram with " + std::to_string(spread + 1) + " bins");
  }
  const auto chunks = chunk_ranges(q, options.threads);
  std::vector<std::vector<std::uint64_t>> partial(chunks.size(), std::vector<std::uint64_t>(spread + 1));
  run_chunks(chunks, [&](std::size_t i) {
    auto& local = partial[i];
    const auto base = static_cast<std::uint32_t>(hist.base);
    sweep_windows(sieve, h, chunks[i].first, chunks[i].second, [&](const std::uint32_t* w, std::size_t n) {
      for (std::size_t j = 0; j < n; ++j) ++local[w[j] - base];
    });
  });
  hist.counts = std::move(partial.front());
  for (std::size_t i = 1; i < partial.size(); ++i) {
    for (std::size_t j = 0; j <= spread; ++j) hist.counts[j] += partial[i][j];
  }
  return hist;
}

}  // namespace residue_lab
