#pragma once

// Single-constant multiplication by canonical signed-digit (CSD) recoding.
// A zero constant yields no hardware, a power of two a pure shift, and any
// other constant a chain of (nonzero digits - 1) adders/subtractors.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "moa_lab/errors.hpp"

namespace moa_lab {

struct ScmTerm {
  unsigned shift = 0;
  int sign = +1;  // +1 or -1

  friend bool operator==(const ScmTerm&, const ScmTerm&) = default;
};

struct ScmNetwork {
  std::int64_t constant = 0;
  std::vector<ScmTerm> terms;  // descending shift

  std::size_t adder_count() const noexcept { return terms.empty() ? 0 : terms.size() - 1; }
  bool eliminated() const noexcept { return terms.empty(); }

  // Human-readable form, e.g. "+2^3 -2^0"; "0" for an eliminated multiplier.
  std::string to_string() const {
    if (terms.empty()) return "0";
    std::string out;
    for (const auto& t : terms) {
      if (!out.empty()) out += ' ';
      out += t.sign > 0 ? '+' : '-';
      out += "2^" + std::to_string(t.shift);
    }
    return out;
  }
};

inline constexpr std::int64_t kMaxScmMagnitude = (std::int64_t{1} << 31) - 1;

// Negative constants recode |constant| and flip every digit sign.
inline ScmNetwork csd_recode(std::int64_t constant) {
  if (constant < -kMaxScmMagnitude || constant > kMaxScmMagnitude) {
    throw InputDomainError("SCM constant " + std::to_string(constant) + " outside |c| < 2^31");
  }
  ScmNetwork net;
  net.constant = constant;
  const int sign = constant < 0 ? -1 : +1;
  std::int64_t rest = constant < 0 ? -constant : constant;
  std::vector<ScmTerm> ascending;
  for (unsigned shift = 0; rest != 0; ++shift, rest >>= 1) {
    if ((rest & 1) == 0) continue;
    // Digit is +1 when rest = 1 (mod 4), -1 when rest = 3 (mod 4).
    const int digit = (rest & 3) == 1 ? +1 : -1;
    rest -= digit;
    ascending.push_back({shift, sign * digit});
  }
  net.terms.assign(ascending.rbegin(), ascending.rend());
  return net;
}

// constant * x using shifts and adds/subs only. Intermediate terms are held
// in 128 bits; the final product must fit a signed 64-bit integer.
inline std::int64_t eval_scm(const ScmNetwork& net, std::int64_t x) {
  __int128 acc = 0;
  for (const auto& t : net.terms) {
    const __int128 shifted = static_cast<__int128>(x) << t.shift;
    acc = t.sign > 0 ? acc + shifted : acc - shifted;
  }
  if (acc < std::numeric_limits<std::int64_t>::min() || acc > std::numeric_limits<std::int64_t>::max()) {
    throw RangeError("product " + std::to_string(net.constant) + " * " + std::to_string(x) +
                     " overflows 64-bit signed range");
  }
  return static_cast<std::int64_t>(acc);
}

}  // namespace moa_lab
