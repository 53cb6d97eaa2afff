#pragma once

// Binary adder trees realizing a multi-operand adder (MOA).
//
// Level 0 holds the operands. Level d >= 1 pairs the outputs of level d-1 in
// order: output 2i and 2i+1 feed adder i; an unpaired last output is forwarded
// unchanged. Adders at level d have width_b = operand_width + d - 1 and emit
// operand_width + d bits, so a tree over n operands has n-1 adders and
// ceil(log2 n) levels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "moa_lab/bit_adders.hpp"
#include "moa_lab/errors.hpp"

namespace moa_lab {

struct ExactAll {
  friend bool operator==(const ExactAll&, const ExactAll&) = default;
};

// Every node gets approx_l = floor(ratio * width_b).
struct UniformRatio {
  double ratio = 0.0;
  friend bool operator==(const UniformRatio&, const UniformRatio&) = default;
};

// approx_l per tree level, first entry for level 1. Levels past the end are exact.
struct PerLevel {
  std::vector<unsigned> approx_bits;
  friend bool operator==(const PerLevel&, const PerLevel&) = default;
};

using ApproxPolicy = std::variant<ExactAll, UniformRatio, PerLevel>;

// floor(ratio * width) with a small tolerance so ratios such as 0.29 are not
// pushed below an exact product by binary rounding.
inline unsigned approx_bits_for_ratio(double ratio, unsigned width) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw InputDomainError("approximation ratio must be in [0, 1], got " + std::to_string(ratio));
  }
  const double bits = std::floor(ratio * static_cast<double>(width) + 1e-9);
  return std::min(width, static_cast<unsigned>(bits));
}

inline unsigned approx_bits_for(const ApproxPolicy& policy, unsigned level, unsigned width_b) {
  if (std::holds_alternative<UniformRatio>(policy)) {
    return approx_bits_for_ratio(std::get<UniformRatio>(policy).ratio, width_b);
  }
  if (const auto* per_level = std::get_if<PerLevel>(&policy)) {
    if (level == 0 || level > per_level->approx_bits.size()) return 0;
    const unsigned l = per_level->approx_bits[level - 1];
    if (l > width_b) {
      throw InputDomainError("level " + std::to_string(level) + " requests " + std::to_string(l) +
                             " approximate bits on a " + std::to_string(width_b) + "-bit adder");
    }
    return l;
  }
  return 0;
}

struct AdderNode {
  std::size_t left = 0;   // index into the previous level's outputs
  std::size_t right = 0;
  AdderSpec spec{1};

  friend bool operator==(const AdderNode&, const AdderNode&) = default;
};

struct TreeLevel {
  std::vector<AdderNode> adders;
  std::optional<std::size_t> forwarded;  // previous-level output passed through

  std::size_t output_count() const { return adders.size() + (forwarded ? 1 : 0); }

  friend bool operator==(const TreeLevel&, const TreeLevel&) = default;
};

struct TreeStats {
  std::size_t adder_count = 0;
  unsigned depth = 0;
  std::vector<unsigned> per_level_widths;  // adder width_b at levels 1..depth
};

class MoaTree {
 public:
  MoaTree(std::size_t n_operands, unsigned operand_width, const ApproxPolicy& policy = ExactAll{})
      : n_operands_(n_operands), operand_width_(operand_width) {
    if (n_operands == 0) throw InputDomainError("a multi-operand adder needs at least one operand");
    if (operand_width == 0 || operand_width > kMaxAdderWidth) {
      throw InputDomainError("operand width must be in [1, " + std::to_string(kMaxAdderWidth) + "]");
    }
    std::size_t count = n_operands;
    unsigned level = 1;
    while (count > 1) {
      const unsigned width_b = operand_width + level - 1;
      if (width_b > kMaxAdderWidth) {
        throw InputDomainError("tree of " + std::to_string(n_operands) + " operands of " +
                               std::to_string(operand_width) + " bits exceeds the maximum adder width");
      }
      const AdderSpec spec(width_b, approx_bits_for(policy, level, width_b));
      TreeLevel tl;
      tl.adders.reserve(count / 2);
      for (std::size_t i = 0; i + 1 < count; i += 2) tl.adders.push_back({i, i + 1, spec});
      if (count % 2 == 1) tl.forwarded = count - 1;
      count = tl.output_count();
      levels_.push_back(std::move(tl));
      ++level;
    }
  }

  std::size_t n_operands() const noexcept { return n_operands_; }
  unsigned operand_width() const noexcept { return operand_width_; }
  unsigned depth() const noexcept { return static_cast<unsigned>(levels_.size()); }
  unsigned output_width() const noexcept { return operand_width_ + depth(); }
  const std::vector<TreeLevel>& levels() const noexcept { return levels_; }

  std::size_t adder_count() const noexcept {
    std::size_t total = 0;
    for (const auto& l : levels_) total += l.adders.size();
    return total;
  }

  friend bool operator==(const MoaTree&, const MoaTree&) = default;

 private:
  std::size_t n_operands_;
  unsigned operand_width_;
  std::vector<TreeLevel> levels_;
};

inline MoaTree build_tree(std::size_t n, unsigned operand_width, const ApproxPolicy& policy = ExactAll{}) {
  return MoaTree(n, operand_width, policy);
}

inline TreeStats tree_stats(const MoaTree& tree) {
  TreeStats stats{tree.adder_count(), tree.depth(), {}};
  for (const auto& level : tree.levels()) {
    stats.per_level_widths.push_back(level.adders.empty() ? 0 : level.adders.front().spec.width_b());
  }
  return stats;
}

namespace detail {

template <typename Value, typename AddFn>
Value reduce_tree(const MoaTree& tree, std::vector<Value> values, AddFn&& add) {
  std::vector<Value> next;
  for (const auto& level : tree.levels()) {
    next.clear();
    next.reserve(level.output_count());
    for (const auto& node : level.adders) next.push_back(add(values[node.left], values[node.right], node.spec));
    if (level.forwarded) next.push_back(values[*level.forwarded]);
    values.swap(next);
  }
  return values.front();
}

}  // namespace detail

// Unsigned evaluation, applying each node's adder (exact or LOA).
inline std::uint64_t eval_tree(const MoaTree& tree, std::span<const std::uint64_t> operands) {
  if (operands.size() != tree.n_operands()) {
    throw InputDomainError("tree expects " + std::to_string(tree.n_operands()) + " operands, got " +
                           std::to_string(operands.size()));
  }
  const std::uint64_t max_operand = detail::low_mask(tree.operand_width());
  for (std::uint64_t v : operands) {
    if (v > max_operand) {
      throw InputDomainError("operand " + std::to_string(v) + " does not fit in " +
                             std::to_string(tree.operand_width()) + " bits");
    }
  }
  return detail::reduce_tree(tree, std::vector<std::uint64_t>(operands.begin(), operands.end()),
                             [](std::uint64_t a, std::uint64_t b, const AdderSpec& spec) {
                               return detail::loa_bits(a, b, spec.approx_l());
                             });
}

// Two's-complement evaluation: operands are operand_width-bit signed values and
// every node works on the raw bit patterns of its declared width.
inline std::int64_t eval_tree_signed(const MoaTree& tree, std::span<const std::int64_t> operands) {
  if (operands.size() != tree.n_operands()) {
    throw InputDomainError("tree expects " + std::to_string(tree.n_operands()) + " operands, got " +
                           std::to_string(operands.size()));
  }
  const unsigned w = tree.operand_width();
  const std::int64_t lo = -(std::int64_t{1} << (w - 1));
  const std::int64_t hi = (std::int64_t{1} << (w - 1)) - 1;
  for (std::int64_t v : operands) {
    if (v < lo || v > hi) {
      throw InputDomainError("signed operand " + std::to_string(v) + " does not fit in " + std::to_string(w) +
                             " bits");
    }
  }
  return detail::reduce_tree(tree, std::vector<std::int64_t>(operands.begin(), operands.end()),
                             [](std::int64_t a, std::int64_t b, const AdderSpec& spec) {
                               return add_loa_signed(a, b, spec);
                             });
}

}  // namespace moa_lab
