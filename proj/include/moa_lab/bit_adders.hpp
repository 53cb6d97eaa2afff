#pragma once

// Bit-exact two-operand adders: the exact ripple adder and the Lower-part OR
// Adder (LOA), plus the mean relative error distance (MRED) between them.

#include <algorithm>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "moa_lab/errors.hpp"
#include "moa_lab/parallel.hpp"

namespace moa_lab {

inline constexpr unsigned kMaxAdderWidth = 63;        // keeps b+1 result bits in a uint64_t
inline constexpr unsigned kMaxExhaustiveWidth = 12;   // 2^24 operand pairs

namespace detail {

constexpr std::uint64_t low_mask(unsigned bits) {
  return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1;
}

// LOA over `width` bit patterns with `approx` OR-ed low bits. The result keeps
// the carry-out, so it has width+1 significant bits (truncated to 64).
constexpr std::uint64_t loa_bits(std::uint64_t x, std::uint64_t y, unsigned approx) {
  if (approx == 0) return x + y;
  const std::uint64_t low = (x | y) & low_mask(approx);
  const std::uint64_t carry_in = ((x & y) >> (approx - 1)) & 1u;
  const std::uint64_t upper = (x >> approx) + (y >> approx) + carry_in;
  return (upper << approx) | low;
}

}  // namespace detail

inline constexpr unsigned ceil_log2(std::uint64_t n) {
  unsigned bits = 0;
  while (bits < 64 && (std::uint64_t{1} << bits) < n) ++bits;
  return bits;
}

// Width b and number l of OR-approximated low bits. l == 0 is an exact adder.
class AdderSpec {
 public:
  AdderSpec(unsigned width_b, unsigned approx_l = 0) : width_b_(width_b), approx_l_(approx_l) {
    if (width_b == 0 || width_b > kMaxAdderWidth) {
      throw InputDomainError("adder width must be in [1, " + std::to_string(kMaxAdderWidth) +
                             "], got " + std::to_string(width_b));
    }
    if (approx_l > width_b) {
      throw InputDomainError("approximate bit count " + std::to_string(approx_l) +
                             " exceeds adder width " + std::to_string(width_b));
    }
  }

  unsigned width_b() const noexcept { return width_b_; }
  unsigned approx_l() const noexcept { return approx_l_; }
  bool is_exact() const noexcept { return approx_l_ == 0; }
  std::uint64_t max_operand() const noexcept { return detail::low_mask(width_b_); }

  friend bool operator==(const AdderSpec&, const AdderSpec&) = default;

 private:
  unsigned width_b_;
  unsigned approx_l_;
};

struct AddResult {
  std::uint64_t value = 0;
  unsigned width = 0;  // width_b + 1

  friend bool operator==(const AddResult&, const AddResult&) = default;
};

namespace detail {

inline void check_operands(std::uint64_t x, std::uint64_t y, const AdderSpec& spec) {
  if (x > spec.max_operand() || y > spec.max_operand()) {
    throw InputDomainError("operand does not fit in " + std::to_string(spec.width_b()) + " bits");
  }
}

}  // namespace detail

// Exact b-bit addition with carry-out; the approximate bit count is ignored.
inline AddResult add_exact(std::uint64_t x, std::uint64_t y, const AdderSpec& spec) {
  detail::check_operands(x, y, spec);
  return {x + y, spec.width_b() + 1};
}

// LOA: low l bits are x|y, the carry into the exact upper (b-l)-bit part is
// x[l-1] & y[l-1].
inline AddResult add_loa(std::uint64_t x, std::uint64_t y, const AdderSpec& spec) {
  detail::check_operands(x, y, spec);
  return {detail::loa_bits(x, y, spec.approx_l()), spec.width_b() + 1};
}

// Two's-complement LOA for signed trees. Operands are b-bit signed values; both
// are sign-extended to b+1 bits, added with the LOA rule and the carry out of
// bit b is dropped. With l == 0 this is the exact signed sum.
inline std::int64_t add_loa_signed(std::int64_t x, std::int64_t y, const AdderSpec& spec) {
  const unsigned b = spec.width_b();
  const std::int64_t lo = -(std::int64_t{1} << (b - 1));
  const std::int64_t hi = (std::int64_t{1} << (b - 1)) - 1;
  if (x < lo || x > hi || y < lo || y > hi) {
    throw InputDomainError("signed operand does not fit in " + std::to_string(b) + " bits");
  }
  const unsigned out_bits = b + 1;
  const std::uint64_t mask = detail::low_mask(out_bits);
  const std::uint64_t sum =
      detail::loa_bits(static_cast<std::uint64_t>(x) & mask, static_cast<std::uint64_t>(y) & mask,
                       spec.approx_l()) &
      mask;
  if (out_bits < 64 && ((sum >> (out_bits - 1)) & 1u) != 0) {
    return static_cast<std::int64_t>(sum | ~mask);
  }
  return static_cast<std::int64_t>(sum);
}

// SplitMix64 (Steele, Lea, Flood 2014). Splitting is done by deriving the seed
// of stream k as mix(seed + k * golden_gamma), so streams are independent of
// the order in which they are consumed.
class SplitMix64 {
 public:
  static constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += kGoldenGamma;
    return mix(state_);
  }

  SplitMix64 split(std::uint64_t stream) const { return SplitMix64(mix(state_ + stream * kGoldenGamma)); }

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

struct Exhaustive {};

struct MonteCarlo {
  std::uint64_t sample_count = 0;
  std::uint64_t seed = 0;
};

using ErrorSampling = std::variant<Exhaustive, MonteCarlo>;

namespace detail {

inline double relative_error(std::uint64_t x, std::uint64_t y, unsigned approx) {
  const std::uint64_t exact = x + y;
  if (exact == 0) return 0.0;  // only x == y == 0, where the LOA is exact too
  const std::uint64_t approx_sum = loa_bits(x, y, approx);
  const std::uint64_t distance = approx_sum > exact ? approx_sum - exact : exact - approx_sum;
  return static_cast<double>(distance) / static_cast<double>(exact);
}

inline constexpr std::uint64_t kMonteCarloChunk = 1u << 14;

}  // namespace detail

// Mean of |s_hat - s| / s over operand pairs. Partial sums are formed per
// fixed partition (one row of x for exhaustive runs, one chunk of samples for
// Monte-Carlo runs) and combined in partition order, so the result is
// bit-identical for any thread count.
inline double mred(const AdderSpec& spec, const ErrorSampling& sampling,
                   unsigned threads = default_thread_count()) {
  const unsigned b = spec.width_b();
  const unsigned l = spec.approx_l();
  const std::uint64_t mask = spec.max_operand();

  if (std::holds_alternative<Exhaustive>(sampling)) {
    if (b > kMaxExhaustiveWidth) {
      throw ResourceGuardError("exhaustive MRED limited to b <= " + std::to_string(kMaxExhaustiveWidth) +
                               ", got b = " + std::to_string(b));
    }
    if (l == 0) return 0.0;
    const std::uint64_t side = std::uint64_t{1} << b;
    std::vector<double> rows(side, 0.0);
    parallel_for(side, threads, [&](std::size_t x) {
      double acc = 0.0;
      for (std::uint64_t y = 0; y < side; ++y) acc += detail::relative_error(x, y, l);
      rows[x] = acc;
    });
    double total = 0.0;
    for (double r : rows) total += r;
    return total / static_cast<double>(side * side);
  }

  const auto& mc = std::get<MonteCarlo>(sampling);
  if (mc.sample_count == 0) throw InputDomainError("Monte-Carlo sample_count must be positive");
  const std::uint64_t chunks = (mc.sample_count + detail::kMonteCarloChunk - 1) / detail::kMonteCarloChunk;
  const SplitMix64 root(mc.seed);
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    SplitMix64 rng = root.split(chunk);
    const std::uint64_t begin = chunk * detail::kMonteCarloChunk;
    const std::uint64_t end = std::min(mc.sample_count, begin + detail::kMonteCarloChunk);
    double acc = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
      const std::uint64_t x = rng.next() & mask;
      const std::uint64_t y = rng.next() & mask;
      acc += detail::relative_error(x, y, l);
    }
    partial[chunk] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total / static_cast<double>(mc.sample_count);
}

}  // namespace moa_lab
