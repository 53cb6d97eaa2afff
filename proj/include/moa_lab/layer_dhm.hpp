#pragma once

// Direct hardware mapping of a convolution layer: one constant multiplier per
// nonzero weight feeding one multi-operand adder per filter.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "moa_lab/bit_adders.hpp"
#include "moa_lab/errors.hpp"
#include "moa_lab/fpga_cost.hpp"
#include "moa_lab/moa_tree.hpp"
#include "moa_lab/parallel.hpp"
#include "moa_lab/scm.hpp"
#include "moa_lab/serial_moa.hpp"

namespace moa_lab {

struct LayerShape {
  std::size_t n_filters = 1;  // N
  std::size_t channels = 1;   // C
  std::size_t kernel_h = 1;   // J
  std::size_t kernel_w = 1;   // K
  std::size_t out_h = 1;      // V
  std::size_t out_w = 1;      // U

  std::size_t cjk() const noexcept { return channels * kernel_h * kernel_w; }

  void validate() const {
    if (n_filters == 0 || channels == 0 || kernel_h == 0 || kernel_w == 0 || out_h == 0 || out_w == 0) {
      throw InputDomainError("layer dimensions must all be positive");
    }
  }

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

// Filter weights in row-major (n, c, j, k) order.
class WeightTensor {
 public:
  WeightTensor(std::size_t n, std::size_t c, std::size_t j, std::size_t k, std::vector<std::int64_t> values)
      : n_(n), c_(c), j_(j), k_(k), values_(std::move(values)) {
    if (n == 0 || c == 0 || j == 0 || k == 0) throw InputDomainError("weight tensor dimensions must be positive");
    if (values_.size() != n * c * j * k) {
      throw InputDomainError("weight tensor " + std::to_string(n) + "x" + std::to_string(c) + "x" +
                             std::to_string(j) + "x" + std::to_string(k) + " needs " +
                             std::to_string(n * c * j * k) + " values, got " + std::to_string(values_.size()));
    }
  }

  std::size_t n_filters() const noexcept { return n_; }
  std::size_t channels() const noexcept { return c_; }
  std::size_t kernel_h() const noexcept { return j_; }
  std::size_t kernel_w() const noexcept { return k_; }
  std::size_t cjk() const noexcept { return c_ * j_ * k_; }

  std::int64_t at(std::size_t n, std::size_t c, std::size_t j, std::size_t k) const {
    return values_[((n * c_ + c) * j_ + j) * k_ + k];
  }

  std::span<const std::int64_t> filter(std::size_t n) const {
    return std::span<const std::int64_t>(values_).subspan(n * cjk(), cjk());
  }

  const std::vector<std::int64_t>& values() const noexcept { return values_; }

  LayerShape shape(std::size_t out_h = 1, std::size_t out_w = 1) const { return {n_, c_, j_, k_, out_h, out_w}; }

 private:
  std::size_t n_, c_, j_, k_;
  std::vector<std::int64_t> values_;
};

// One receptive field X[c, v+j, u+k] flattened in (c, j, k) order.
struct FeaturePatch {
  std::size_t channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::vector<std::int64_t> values;

  std::int64_t at(std::size_t c, std::size_t j, std::size_t k) const {
    return values[(c * kernel_h + j) * kernel_w + k];
  }
};

namespace detail {

inline void check_patch(const FeaturePatch& patch, const WeightTensor& weights) {
  if (patch.channels != weights.channels() || patch.kernel_h != weights.kernel_h() ||
      patch.kernel_w != weights.kernel_w() || patch.values.size() != weights.cjk()) {
    throw InputDomainError("feature patch shape does not match the filter shape");
  }
}

}  // namespace detail

// Golden dot product: the plain triple sum over (c, j, k).
inline std::int64_t dot_product_ref(const FeaturePatch& patch, const WeightTensor& weights, std::size_t filter) {
  detail::check_patch(patch, weights);
  if (filter >= weights.n_filters()) throw InputDomainError("filter index out of range");
  __int128 acc = 0;
  for (std::size_t c = 0; c < weights.channels(); ++c) {
    for (std::size_t j = 0; j < weights.kernel_h(); ++j) {
      for (std::size_t k = 0; k < weights.kernel_w(); ++k) {
        acc += static_cast<__int128>(patch.at(c, j, k)) * weights.at(filter, c, j, k);
      }
    }
  }
  if (acc < std::numeric_limits<std::int64_t>::min() || acc > std::numeric_limits<std::int64_t>::max()) {
    throw RangeError("dot product overflows 64-bit signed range");
  }
  return static_cast<std::int64_t>(acc);
}

struct OperandStats {
  std::size_t cjk = 0;
  double n_opd = 0.0;  // mean nonzero weights per filter
  std::vector<std::size_t> per_filter_nonzero;
};

inline OperandStats operand_stats(const WeightTensor& weights) {
  OperandStats stats;
  stats.cjk = weights.cjk();
  std::size_t total = 0;
  for (std::size_t n = 0; n < weights.n_filters(); ++n) {
    const auto f = weights.filter(n);
    const auto nz = static_cast<std::size_t>(std::count_if(f.begin(), f.end(), [](std::int64_t w) { return w != 0; }));
    stats.per_filter_nonzero.push_back(nz);
    total += nz;
  }
  stats.n_opd = static_cast<double>(total) / static_cast<double>(weights.n_filters());
  return stats;
}

// ---------------------------------------------------------------------------
// Weight files: first line "N C J K", then N*C*J*K whitespace-separated signed
// integers in (n, c, j, k) order, spread over any number of lines.

inline WeightTensor parse_weights(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto tokens_of = [](const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      const std::size_t start = i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
  };
  auto to_int = [&](const std::string& tok, std::int64_t& value) {
    const char* first = tok.data();
    if (*first == '+') ++first;
    const auto [end, ec] = std::from_chars(first, tok.data() + tok.size(), value);
    return ec == std::errc{} && end == tok.data() + tok.size();
  };

  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    header = tokens_of(line);
  }
  if (header.empty()) throw ParseError(line_no == 0 ? 1 : line_no, "missing header 'N C J K'");
  if (header.size() != 4) throw ParseError(line_no, "header must have exactly 4 fields 'N C J K'");
  std::size_t dims[4];
  for (std::size_t i = 0; i < 4; ++i) {
    std::int64_t v = 0;
    if (!to_int(header[i], v) || v <= 0) {
      throw ParseError(line_no, "header field '" + header[i] + "' is not a positive integer");
    }
    dims[i] = static_cast<std::size_t>(v);
  }
  const std::size_t expected = dims[0] * dims[1] * dims[2] * dims[3];
  std::vector<std::int64_t> values;
  values.reserve(std::min<std::size_t>(expected, std::size_t{1} << 24));
  while (std::getline(in, line)) {
    ++line_no;
    for (const auto& tok : tokens_of(line)) {
      std::int64_t v = 0;
      if (!to_int(tok, v)) throw ParseError(line_no, "'" + tok + "' is not a signed integer");
      if (values.size() == expected) {
        throw ParseError(line_no, "more than the " + std::to_string(expected) + " weights declared in the header");
      }
      values.push_back(v);
    }
  }
  if (values.size() != expected) {
    throw ParseError(line_no, "expected " + std::to_string(expected) + " weights, found " +
                                  std::to_string(values.size()));
  }
  return WeightTensor(dims[0], dims[1], dims[2], dims[3], std::move(values));
}

inline WeightTensor load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open weight file '" + path + "'");
  return parse_weights(in);
}

// One filter per line after the header.
inline void write_weights(std::ostream& out, const WeightTensor& weights) {
  out << weights.n_filters() << ' ' << weights.channels() << ' ' << weights.kernel_h() << ' '
      << weights.kernel_w() << '\n';
  for (std::size_t n = 0; n < weights.n_filters(); ++n) {
    const auto f = weights.filter(n);
    for (std::size_t i = 0; i < f.size(); ++i) out << (i ? " " : "") << f[i];
    out << '\n';
  }
}

enum class SyntheticSparsity { Dense, HalfZero };

// Random signed weights of `weight_bits` bits. Dense draws only nonzero values;
// HalfZero additionally zeroes floor(cjk / 2) positions per filter.
inline WeightTensor synthetic_weights(const LayerShape& shape, SyntheticSparsity sparsity, std::uint64_t seed,
                                      unsigned weight_bits = 8) {
  shape.validate();
  if (weight_bits < 2 || weight_bits > 32) throw InputDomainError("synthetic weight bits must be in [2, 32]");
  std::mt19937_64 rng(seed);
  const std::int64_t hi = (std::int64_t{1} << (weight_bits - 1)) - 1;
  std::uniform_int_distribution<std::int64_t> magnitude(-hi - 1, hi);
  const std::size_t cjk = shape.cjk();
  std::vector<std::int64_t> values(shape.n_filters * cjk);
  std::vector<std::size_t> order(cjk);
  for (std::size_t n = 0; n < shape.n_filters; ++n) {
    for (std::size_t i = 0; i < cjk; ++i) {
      std::int64_t w = 0;
      while (w == 0) w = magnitude(rng);
      values[n * cjk + i] = w;
    }
    if (sparsity == SyntheticSparsity::HalfZero) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i = 0; i < cjk / 2; ++i) values[n * cjk + order[i]] = 0;
    }
  }
  return WeightTensor(shape.n_filters, shape.channels, shape.kernel_h, shape.kernel_w, std::move(values));
}

// ---------------------------------------------------------------------------
// Layer mapping.

struct TreeArch {};

// Each MOA is split into clusters of `cluster_size` operands, each summed by a
// serializer/accumulator pair; a tree then adds the cluster sums.
struct SerialArch {
  std::size_t cluster_size = 6;
  double base_freq_hz = kVideo720pPixelRateHz;
};

using MoaArchitecture = std::variant<TreeArch, SerialArch>;

struct MapOptions {
  ApproxPolicy policy = ExactAll{};
  MoaArchitecture arch = TreeArch{};
  unsigned activation_bits = 8;  // signed feature-map width
  CostModel model{};
};

struct FilterMapping {
  std::vector<std::size_t> taps;        // flat (c, j, k) index of each nonzero weight
  std::vector<std::int64_t> weights;    // weight at each tap; keys into LayerReport::multipliers
  std::size_t adder_count = 0;          // n_opd - 1, or 0 when the filter is all-zero
  std::size_t scm_adder_count = 0;
  CostReport cost;                      // components "scm" and "moa"
  double moa_fraction = 0.0;

  std::size_t n_opd() const noexcept { return taps.size(); }
};

struct LayerReport {
  LayerShape shape;
  std::size_t cjk = 0;
  double n_opd = 0.0;
  unsigned weight_bits = 0;    // smallest signed width holding every weight
  unsigned product_width = 0;  // activation_bits + weight_bits
  MapOptions options;
  std::map<std::int64_t, ScmNetwork> multipliers;  // one network per distinct nonzero weight
  std::vector<FilterMapping> filters;
  // Shared structures keyed by operand count.
  std::map<std::size_t, std::shared_ptr<const MoaTree>> trees;          // TreeArch: per n_opd
  std::map<std::size_t, std::shared_ptr<const MoaTree>> combine_trees;  // SerialArch: per cluster count
  std::size_t total_adders = 0;
  std::size_t total_scm_adders = 0;
  CostReport cost;  // "scm" and "moa" summed over filters
  double moa_fraction = 0.0;

  std::size_t moa_count() const noexcept { return filters.size(); }
};

namespace detail {

inline unsigned signed_width(std::int64_t v) {
  unsigned bits = 1;
  while (bits < 64) {
    const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
    const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
    if (v >= lo && v <= hi) break;
    ++bits;
  }
  return bits;
}

inline std::size_t cluster_count(std::size_t n_opd, std::size_t cluster_size) {
  return (n_opd + cluster_size - 1) / cluster_size;
}

}  // namespace detail

inline LayerReport map_layer(const LayerShape& shape, const WeightTensor& weights, const MapOptions& options = {},
                             unsigned threads = default_thread_count()) {
  shape.validate();
  options.model.validate();
  if (shape.n_filters != weights.n_filters() || shape.channels != weights.channels() ||
      shape.kernel_h != weights.kernel_h() || shape.kernel_w != weights.kernel_w()) {
    throw InputDomainError("layer shape does not match the weight tensor");
  }
  if (options.activation_bits < 2 || options.activation_bits > 32) {
    throw InputDomainError("activation bits must be in [2, 32]");
  }
  const auto* serial = std::get_if<SerialArch>(&options.arch);
  if (serial != nullptr && serial->cluster_size == 0) throw InputDomainError("cluster size must be positive");

  LayerReport report;
  report.shape = shape;
  report.cjk = weights.cjk();
  report.options = options;
  report.n_opd = operand_stats(weights).n_opd;

  std::int64_t min_w = 0, max_w = 0;
  for (std::int64_t w : weights.values()) {
    min_w = std::min(min_w, w);
    max_w = std::max(max_w, w);
    if (w != 0 && !report.multipliers.contains(w)) report.multipliers.emplace(w, csd_recode(w));
  }
  report.weight_bits = std::max(detail::signed_width(min_w), detail::signed_width(max_w));
  report.product_width = options.activation_bits + report.weight_bits;
  if (report.product_width > kMaxAdderWidth) throw InputDomainError("product width exceeds the maximum adder width");

  report.filters.resize(weights.n_filters());
  for (std::size_t n = 0; n < weights.n_filters(); ++n) {
    auto& fm = report.filters[n];
    const auto f = weights.filter(n);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (f[i] == 0) continue;
      fm.taps.push_back(i);
      fm.weights.push_back(f[i]);
    }
    const std::size_t nz = fm.taps.size();
    if (nz == 0) continue;
    if (serial == nullptr) {
      if (!report.trees.contains(nz)) report.trees.emplace(nz, nullptr);
    } else {
      const std::size_t clusters = detail::cluster_count(nz, serial->cluster_size);
      if (!report.combine_trees.contains(clusters)) report.combine_trees.emplace(clusters, nullptr);
    }
  }

  const unsigned combine_width =
      serial == nullptr ? 0 : SerialMoaConfig(serial->cluster_size, report.product_width).accumulator_width();
  std::vector<std::pair<const std::size_t, std::shared_ptr<const MoaTree>>*> slots;
  for (auto& entry : report.trees) slots.push_back(&entry);
  for (auto& entry : report.combine_trees) slots.push_back(&entry);
  parallel_for(slots.size(), threads, [&](std::size_t i) {
    const unsigned width = serial == nullptr ? report.product_width : combine_width;
    slots[i]->second = std::make_shared<const MoaTree>(slots[i]->first, width, options.policy);
  });

  std::map<std::size_t, double> tree_cost;
  for (const auto& [n_opd, tree] : report.trees) tree_cost[n_opd] = cost_tree(*tree, options.model).alm_total();
  for (const auto& [clusters, tree] : report.combine_trees) {
    tree_cost[clusters] = cost_tree(*tree, options.model).alm_total();
  }

  parallel_for(report.filters.size(), threads, [&](std::size_t n) {
    auto& fm = report.filters[n];
    const std::size_t nz = fm.n_opd();
    fm.adder_count = nz == 0 ? 0 : nz - 1;
    double scm_alm = 0.0;
    for (std::int64_t w : fm.weights) {
      const std::size_t adders = report.multipliers.at(w).adder_count();
      fm.scm_adder_count += adders;
      scm_alm += static_cast<double>(adders) * report.product_width * options.model.alm_per_fulladd_bit;
    }
    double moa_alm = 0.0;
    if (nz > 0) {
      if (serial == nullptr) {
        moa_alm = tree_cost.at(nz);
      } else {
        const std::size_t clusters = detail::cluster_count(nz, serial->cluster_size);
        for (std::size_t c = 0; c < clusters; ++c) {
          const std::size_t size = std::min(serial->cluster_size, nz - c * serial->cluster_size);
          const SerialMoaConfig cfg(size, report.product_width, serial->base_freq_hz);
          moa_alm += cost_serial_moa(cfg, options.model).alm_total();
        }
        moa_alm += tree_cost.at(clusters);
      }
    }
    fm.cost.add("scm", scm_alm);
    fm.cost.add("moa", moa_alm);
    const double total = fm.cost.alm_total();
    fm.moa_fraction = total > 0.0 ? moa_alm / total : 0.0;
  });

  report.cost.add("scm", 0.0);
  report.cost.add("moa", 0.0);
  for (const auto& fm : report.filters) {
    report.total_adders += fm.adder_count;
    report.total_scm_adders += fm.scm_adder_count;
    report.cost.merge(fm.cost);
  }
  const double total = report.cost.alm_total();
  report.moa_fraction = total > 0.0 ? report.cost.component("moa") / total : 0.0;
  return report;
}

// Runs one mapped filter on a patch: SCM products, then the filter's MOA
// (tree, or serializer/accumulator clusters plus a combining tree).
inline std::int64_t evaluate_filter(const LayerReport& report, std::size_t filter, const FeaturePatch& patch) {
  if (filter >= report.filters.size()) throw InputDomainError("filter index out of range");
  if (patch.channels != report.shape.channels || patch.kernel_h != report.shape.kernel_h ||
      patch.kernel_w != report.shape.kernel_w || patch.values.size() != report.cjk) {
    throw InputDomainError("feature patch shape does not match the layer");
  }
  const unsigned a = report.options.activation_bits;
  const std::int64_t lo = -(std::int64_t{1} << (a - 1));
  const std::int64_t hi = (std::int64_t{1} << (a - 1)) - 1;
  for (std::int64_t x : patch.values) {
    if (x < lo || x > hi) {
      throw InputDomainError("activation " + std::to_string(x) + " does not fit in " + std::to_string(a) + " bits");
    }
  }

  const auto& fm = report.filters[filter];
  if (fm.n_opd() == 0) return 0;
  std::vector<std::int64_t> products;
  products.reserve(fm.n_opd());
  for (std::size_t i = 0; i < fm.n_opd(); ++i) {
    products.push_back(eval_scm(report.multipliers.at(fm.weights[i]), patch.values[fm.taps[i]]));
  }

  const auto* serial = std::get_if<SerialArch>(&report.options.arch);
  if (serial == nullptr) return eval_tree_signed(*report.trees.at(fm.n_opd()), products);

  // The accumulator is unsigned, so operands enter offset by 2^(w-1) and the
  // bias is removed from each cluster sum.
  const unsigned w = report.product_width;
  const std::int64_t bias = std::int64_t{1} << (w - 1);
  const std::size_t clusters = detail::cluster_count(fm.n_opd(), serial->cluster_size);
  std::vector<std::int64_t> cluster_sums;
  cluster_sums.reserve(clusters);
  for (std::size_t c = 0; c < clusters; ++c) {
    const std::size_t begin = c * serial->cluster_size;
    const std::size_t size = std::min(serial->cluster_size, fm.n_opd() - begin);
    std::vector<std::uint64_t> biased(size);
    for (std::size_t i = 0; i < size; ++i) biased[i] = static_cast<std::uint64_t>(products[begin + i] + bias);
    const FrameResult frame = run_frame(SerialMoaConfig(size, w, serial->base_freq_hz), biased);
    cluster_sums.push_back(static_cast<std::int64_t>(frame.sum) - static_cast<std::int64_t>(size) * bias);
  }
  return eval_tree_signed(*report.combine_trees.at(clusters), cluster_sums);
}

inline std::vector<std::int64_t> evaluate_layer(const LayerReport& report, const FeaturePatch& patch) {
  std::vector<std::int64_t> out;
  out.reserve(report.filters.size());
  for (std::size_t n = 0; n < report.filters.size(); ++n) out.push_back(evaluate_filter(report, n, patch));
  return out;
}

}  // namespace moa_lab
