#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aimsim/topology.hpp"

namespace aimsim {

/// One bit per input line: did cell k's input toggle between this cycle and
/// the next. Length equals the number of cells in a bank.
using BitToggleFrame = std::vector<std::uint8_t>;

struct RtogSample {
    double value = 0.0;  // in [0,1]
    std::size_t cycle = 0;
    int bank = 0;
};

struct HammingResult {
    std::uint64_t hm = 0;  // count of set bits across all q-bit encodings
    double hr = 0.0;       // hm / (n*q)
};

/// Set bits in the q-bit two's-complement encoding. The sign bit counts, so
/// small negative values score high.
inline int popcount_q(std::int32_t value, int q) {
    const std::uint32_t mask = q >= 32 ? ~0u : ((1u << q) - 1u);
    return __builtin_popcount(static_cast<std::uint32_t>(value) & mask);
}

/// Per-bank toggle rate for one cycle: the fraction of weight bits whose
/// input line toggled; one toggle bit per cell line gates all q weight bits.
double rtog(std::span<const std::int32_t> bank_weights, int q, const BitToggleFrame& frame);

inline RtogSample rtog_sample(std::span<const std::int32_t> bank_weights, int q,
                              const BitToggleFrame& frame, std::size_t cycle, int bank) {
    return {rtog(bank_weights, q, frame), cycle, bank};
}

/// Hamming value and rate of a weight slice; the input-independent upper
/// bound of rtog over all toggle frames.
HammingResult hamming(std::span<const std::int32_t> values, int q);

/// Affine supply-sag estimate from the toggle rate.
double ir_drop_estimate(double rtog_value, const IrCoefficients& coeffs);

/// Mean of the per-bank rates; the macro-level activity figure.
double macro_rtog(std::span<const double> bank_rates);

}  // namespace aimsim
