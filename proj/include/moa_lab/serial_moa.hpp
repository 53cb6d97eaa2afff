#pragma once

// Behavioral model of the serializer + accumulator MOA. A cluster of n_c
// operands is loaded in parallel once per slow cycle (f_0) and drained one
// operand per fast cycle into a single accumulator clocked at f_c = n_c * f_0.
// Clock domains are modeled by cycle counting only.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "moa_lab/bit_adders.hpp"
#include "moa_lab/errors.hpp"

namespace moa_lab {

inline constexpr double kVideo720pPixelRateHz = 27.6e6;
inline constexpr double kDspBlockCeilingHz = 200e6;

class SerialMoaConfig {
 public:
  // serializer_count defaults to a double-buffered pair: one register loads
  // frame k+1 while the other drains frame k.
  SerialMoaConfig(std::size_t cluster_size, unsigned operand_width, double base_freq_hz = kVideo720pPixelRateHz,
                  unsigned serializer_count = 2)
      : cluster_size_(cluster_size),
        operand_width_(operand_width),
        base_freq_hz_(base_freq_hz),
        serializer_count_(serializer_count) {
    if (cluster_size == 0) throw InputDomainError("cluster size must be positive");
    if (operand_width == 0 || operand_width > kMaxAdderWidth) {
      throw InputDomainError("operand width must be in [1, " + std::to_string(kMaxAdderWidth) + "]");
    }
    if (accumulator_width() > 64) throw InputDomainError("accumulator wider than 64 bits");
    if (!(base_freq_hz > 0.0) || !std::isfinite(base_freq_hz)) {
      throw InputDomainError("base frequency must be positive");
    }
    if (serializer_count == 0) throw InputDomainError("serializer count must be positive");
  }

  std::size_t cluster_size() const noexcept { return cluster_size_; }
  unsigned operand_width() const noexcept { return operand_width_; }
  double base_freq_hz() const noexcept { return base_freq_hz_; }
  unsigned serializer_count() const noexcept { return serializer_count_; }

  double fast_freq_hz() const noexcept { return static_cast<double>(cluster_size_) * base_freq_hz_; }

  // One guard bit above the ceil(log2 n_c) growth.
  unsigned accumulator_width() const noexcept { return operand_width_ + ceil_log2(cluster_size_) + 1; }

 private:
  std::size_t cluster_size_;
  unsigned operand_width_;
  double base_freq_hz_;
  unsigned serializer_count_;
};

struct SerialMoaState {
  std::vector<std::uint64_t> shift_register;
  std::uint64_t accumulator = 0;
  std::size_t fast_cycle_index = 0;
  unsigned accumulator_width = 0;

  bool frame_complete() const noexcept { return fast_cycle_index >= shift_register.size(); }
};

struct FrameResult {
  std::uint64_t sum = 0;
  std::size_t fast_cycles_used = 0;
  double fast_freq_hz = 0.0;
};

inline SerialMoaState load_parallel(const SerialMoaConfig& config, std::span<const std::uint64_t> operands) {
  if (operands.size() != config.cluster_size()) {
    throw InputDomainError("serializer expects " + std::to_string(config.cluster_size()) + " operands, got " +
                           std::to_string(operands.size()));
  }
  const std::uint64_t max_operand = detail::low_mask(config.operand_width());
  for (std::uint64_t v : operands) {
    if (v > max_operand) {
      throw InputDomainError("operand " + std::to_string(v) + " does not fit in " +
                             std::to_string(config.operand_width()) + " bits");
    }
  }
  return {{operands.begin(), operands.end()}, 0, 0, config.accumulator_width()};
}

inline SerialMoaState step_fast_cycle(SerialMoaState state) {
  if (state.frame_complete()) {
    throw SequencingError("frame already drained after " + std::to_string(state.fast_cycle_index) +
                          " fast cycles; load a new frame first");
  }
  const std::uint64_t next = state.accumulator + state.shift_register[state.fast_cycle_index];
  if (next > detail::low_mask(state.accumulator_width)) {
    throw RangeError("accumulator overflow at " + std::to_string(state.accumulator_width) + " bits");
  }
  state.accumulator = next;
  ++state.fast_cycle_index;
  return state;
}

inline FrameResult run_frame(const SerialMoaConfig& config, std::span<const std::uint64_t> operands) {
  SerialMoaState state = load_parallel(config, operands);
  while (!state.frame_complete()) state = step_fast_cycle(std::move(state));
  return {state.accumulator, state.fast_cycle_index, config.fast_freq_hz()};
}

// Largest cluster whose fast clock stays at or below `ceiling_hz`.
inline std::size_t max_feasible_cluster(double base_freq_hz, double ceiling_hz = kDspBlockCeilingHz) {
  if (!(base_freq_hz > 0.0)) throw InputDomainError("base frequency must be positive");
  return static_cast<std::size_t>(std::floor(ceiling_hz / base_freq_hz));
}

inline bool is_feasible(const SerialMoaConfig& config, double ceiling_hz = kDspBlockCeilingHz) {
  return config.fast_freq_hz() <= ceiling_hz;
}

}  // namespace moa_lab
