#pragma once

// CSV-producing sweeps and reports behind the moa-lab command line. Each
// command writes to a stream so output can be captured byte-for-byte.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "moa_lab/bit_adders.hpp"
#include "moa_lab/csv.hpp"
#include "moa_lab/errors.hpp"
#include "moa_lab/fpga_cost.hpp"
#include "moa_lab/layer_dhm.hpp"
#include "moa_lab/moa_tree.hpp"
#include "moa_lab/parallel.hpp"
#include "moa_lab/scm.hpp"
#include "moa_lab/serial_moa.hpp"

namespace moa_lab {

inline constexpr std::uint64_t kDefaultMonteCarloSamples = std::uint64_t{1} << 20;

struct SweepSpec {
  std::vector<unsigned> bitwidths{4, 8, 12, 16};
  std::vector<double> ratios{0.0, 0.125, 0.25, 0.375, 0.5};
  std::vector<std::size_t> cluster_sizes{1, 2, 3, 4, 5, 6, 7, 8, 12, 16, 24, 32, 48, 64};
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> samples;  // forces Monte-Carlo
  bool exhaustive = false;               // forces exhaustive (b <= 12)
  unsigned operand_width = 8;            // serial-cost operand width
  CostModel model{};

  void validate() const {
    if (bitwidths.empty()) throw InputDomainError("--bits needs at least one value");
    if (ratios.empty()) throw InputDomainError("--ratios needs at least one value");
    if (cluster_sizes.empty()) throw InputDomainError("--clusters needs at least one value");
    if (exhaustive && samples) throw InputDomainError("--exhaustive and --samples are mutually exclusive");
    for (double r : ratios) {
      if (!(r >= 0.0 && r <= 1.0)) throw InputDomainError("ratio " + format_real(r) + " outside [0, 1]");
    }
    for (unsigned b : bitwidths) {
      if (b == 0 || b > kMaxAdderWidth) throw InputDomainError("bit-width " + std::to_string(b) + " out of range");
    }
    for (std::size_t n : cluster_sizes) {
      if (n == 0) throw InputDomainError("cluster size must be positive");
    }
    model.validate();
  }
};

// Exhaustive when requested or when b <= 12 and no sample count was given;
// Monte-Carlo otherwise.
inline ErrorSampling sampling_for(const SweepSpec& spec, unsigned b) {
  if (spec.exhaustive) return Exhaustive{};
  if (spec.samples) return MonteCarlo{*spec.samples, spec.seed};
  if (b <= kMaxExhaustiveWidth) return Exhaustive{};
  return MonteCarlo{kDefaultMonteCarloSamples, spec.seed};
}

// Columns: b, ratio, l, mred, alm_cost. Rows in (bitwidth, ratio) order.
inline void cmd_mred_sweep(const SweepSpec& spec, std::ostream& out, unsigned threads = default_thread_count()) {
  spec.validate();
  CsvWriter csv(out);
  csv.row({"b", "ratio", "l", "mred", "alm_cost"});
  for (unsigned b : spec.bitwidths) {
    for (double ratio : spec.ratios) {
      const AdderSpec adder(b, approx_bits_for_ratio(ratio, b));
      const double error = mred(adder, sampling_for(spec, b), threads);
      const double alm = cost_binary_adder(adder, spec.model).alm_total();
      csv.row({std::to_string(b), format_real(ratio), std::to_string(adder.approx_l()), format_real(error),
               format_real(alm)});
    }
  }
}

// Columns: n_c, serializer_alm, accumulator_alm, serial_total, tree_alm,
// f_c_at_27.6MHz (in MHz).
inline void cmd_serial_cost(const SweepSpec& spec, std::ostream& out) {
  spec.validate();
  CsvWriter csv(out);
  csv.row({"n_c", "serializer_alm", "accumulator_alm", "serial_total", "tree_alm", "f_c_at_27.6MHz"});
  for (std::size_t n_c : spec.cluster_sizes) {
    const SerialMoaConfig config(n_c, spec.operand_width, kVideo720pPixelRateHz);
    const CostReport serial = cost_serial_moa(config, spec.model);
    const double tree = cost_tree(build_tree(n_c, spec.operand_width), spec.model).alm_total();
    csv.row({std::to_string(n_c), format_real(serial.component("serializer")),
             format_real(serial.component("accumulator")), format_real(serial.alm_total()), format_real(tree),
             format_real(config.fast_freq_hz() / 1e6)});
  }
}

struct LayerReportOptions {
  MapOptions map{};
  bool per_filter = false;
  std::string layer_name = "layer";
};

// Summary row (default) or one row per filter.
inline void cmd_layer_report(const WeightTensor& weights, const LayerShape& shape, const LayerReportOptions& options,
                             std::ostream& out, unsigned threads = default_thread_count()) {
  const LayerReport report = map_layer(shape, weights, options.map, threads);
  CsvWriter csv(out);
  if (options.per_filter) {
    csv.row({"filter", "n_opd", "adders", "scm_adders", "scm_alm", "moa_alm", "moa_fraction"});
    for (std::size_t n = 0; n < report.filters.size(); ++n) {
      const auto& fm = report.filters[n];
      csv.row({std::to_string(n), std::to_string(fm.n_opd()), std::to_string(fm.adder_count),
               std::to_string(fm.scm_adder_count), format_real(fm.cost.component("scm")),
               format_real(fm.cost.component("moa")), format_real(fm.moa_fraction)});
    }
    return;
  }
  csv.row({"layer", "N", "cjk", "n_opd", "moa_count", "total_adders", "scm_adders", "product_width", "scm_alm",
           "moa_alm", "total_alm", "moa_fraction"});
  csv.row({options.layer_name, std::to_string(report.shape.n_filters), std::to_string(report.cjk),
           format_real(report.n_opd), std::to_string(report.moa_count()), std::to_string(report.total_adders),
           std::to_string(report.total_scm_adders), std::to_string(report.product_width),
           format_real(report.cost.component("scm")), format_real(report.cost.component("moa")),
           format_real(report.cost.alm_total()), format_real(report.moa_fraction)});
}

// Columns: n, operand_width, adder_count, depth, level_widths, alm_cost.
// level_widths lists the adder width of each level joined by ';'.
inline void cmd_tree_build(std::size_t n, unsigned operand_width, const ApproxPolicy& policy, const CostModel& model,
                           std::ostream& out) {
  model.validate();
  const MoaTree tree = build_tree(n, operand_width, policy);
  const TreeStats stats = tree_stats(tree);
  std::string widths;
  for (unsigned w : stats.per_level_widths) {
    if (!widths.empty()) widths += ';';
    widths += std::to_string(w);
  }
  CsvWriter csv(out);
  csv.row({"n", "operand_width", "adder_count", "depth", "level_widths", "alm_cost"});
  csv.row({std::to_string(n), std::to_string(operand_width), std::to_string(stats.adder_count),
           std::to_string(stats.depth), widths, format_real(cost_tree(tree, model).alm_total())});
}

// Columns: constant, terms, nonzero_digits, adder_count.
inline void cmd_scm(const std::vector<std::int64_t>& constants, std::ostream& out) {
  CsvWriter csv(out);
  csv.row({"constant", "terms", "nonzero_digits", "adder_count"});
  for (std::int64_t c : constants) {
    const ScmNetwork net = csd_recode(c);
    csv.row({std::to_string(c), net.to_string(), std::to_string(net.terms.size()), std::to_string(net.adder_count())});
  }
}

}  // namespace moa_lab
