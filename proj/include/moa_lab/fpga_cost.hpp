#pragma once

// ALM-level resource model. An ALM carries a hard-wired full adder on its carry
// chain, so an OR-approximated bit costs the same ALM slice as an exact
// full-adder bit; the default model encodes that with equal coefficients.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>

#include "moa_lab/bit_adders.hpp"
#include "moa_lab/errors.hpp"
#include "moa_lab/moa_tree.hpp"
#include "moa_lab/serial_moa.hpp"

namespace moa_lab {

struct CostModel {
  double alm_per_fulladd_bit = 1.0;
  double alm_per_or_bit = 1.0;
  double alm_per_serializer_bit = 1.0;  // register plus parallel-load mux
  double alm_per_register_bit = 0.5;    // two flip-flops per ALM

  void validate() const {
    for (double c : {alm_per_fulladd_bit, alm_per_or_bit, alm_per_serializer_bit, alm_per_register_bit}) {
      if (!(c >= 0.0) || !std::isfinite(c)) throw InputDomainError("cost coefficients must be finite and >= 0");
    }
  }

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

class CostReport {
 public:
  CostReport() = default;

  void add(const std::string& component, double alm) { breakdown_[component] += alm; }

  void merge(const CostReport& other) {
    for (const auto& [name, alm] : other.breakdown_) add(name, alm);
  }

  // Sum in key order, so the total is reproducible regardless of insertion order.
  double alm_total() const {
    double total = 0.0;
    for (const auto& [name, alm] : breakdown_) total += alm;
    return total;
  }

  double component(const std::string& name) const {
    const auto it = breakdown_.find(name);
    return it == breakdown_.end() ? 0.0 : it->second;
  }

  const std::map<std::string, double>& breakdown() const noexcept { return breakdown_; }

 private:
  std::map<std::string, double> breakdown_;
};

inline CostReport cost_binary_adder(const AdderSpec& spec, const CostModel& model = {}) {
  const unsigned exact_bits = spec.width_b() - spec.approx_l();
  CostReport report;
  report.add("fulladd", exact_bits * model.alm_per_fulladd_bit);
  report.add("or", spec.approx_l() * model.alm_per_or_bit);
  return report;
}

inline CostReport cost_tree(const MoaTree& tree, const CostModel& model = {}) {
  CostReport report;
  report.add("fulladd", 0.0);
  report.add("or", 0.0);
  for (const auto& level : tree.levels()) {
    for (const auto& node : level.adders) report.merge(cost_binary_adder(node.spec, model));
  }
  return report;
}

inline CostReport cost_serial_moa(const SerialMoaConfig& config, const CostModel& model = {}) {
  CostReport report;
  report.add("serializer", static_cast<double>(config.serializer_count()) *
                               static_cast<double>(config.cluster_size()) * config.operand_width() *
                               model.alm_per_serializer_bit);
  report.add("accumulator", config.accumulator_width() * model.alm_per_fulladd_bit);
  return report;
}

// key = value lines; '#' starts a comment; blank lines ignored. Keys are the
// four coefficient names. Unspecified keys keep their defaults.
inline CostModel parse_cost_model(std::istream& in) {
  CostModel model;
  const std::map<std::string_view, double CostModel::*> fields = {
      {"alm_per_fulladd_bit", &CostModel::alm_per_fulladd_bit},
      {"alm_per_or_bit", &CostModel::alm_per_or_bit},
      {"alm_per_serializer_bit", &CostModel::alm_per_serializer_bit},
      {"alm_per_register_bit", &CostModel::alm_per_register_bit},
  };
  std::map<std::string_view, std::size_t> seen;
  auto trim = [](std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return std::string_view{};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
    const std::string_view key = trim(text.substr(0, eq));
    const std::string value(trim(text.substr(eq + 1)));
    const auto field = fields.find(key);
    if (field == fields.end()) throw ParseError(line_no, "unknown cost model key '" + std::string(key) + "'");
    if (const auto prev = seen.find(field->first); prev != seen.end()) {
      throw ParseError(line_no, "duplicate key '" + std::string(key) + "' (first set on line " +
                                    std::to_string(prev->second) + ")");
    }
    seen.emplace(field->first, line_no);
    double parsed = 0.0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
    if (ec != std::errc{} || end != value.data() + value.size()) {
      throw ParseError(line_no, "'" + value + "' is not a number");
    }
    if (!(parsed >= 0.0) || !std::isfinite(parsed)) {
      throw ParseError(line_no, "coefficient '" + std::string(key) + "' must be finite and >= 0");
    }
    model.*(field->second) = parsed;
  }
  return model;
}

inline CostModel load_cost_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cost model file '" + path + "'");
  return parse_cost_model(in);
}

}  // namespace moa_lab
