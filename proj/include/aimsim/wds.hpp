#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aimsim/tensor.hpp"

namespace aimsim {

/// Result of the offline weight-distribution shift: base tensor, the applied
/// power-of-two delta, the saturated tensor, and how many weights clamped.
struct ShiftedLayer {
    QuantizedTensor base;
    std::int32_t delta = 8;
    QuantizedTensor shifted;
    std::size_t clamped_count = 0;

    bool overflow_warning() const {
        return clamped_count * 100 > base.values.size();  // more than 1% clamped
    }
};

/// Raw shift with saturation at the q-bit INTMAX. No delta validation; also
/// used to evaluate deliberately bad deltas in sweeps.
std::vector<std::int32_t> shift_values(std::span<const std::int32_t> values, std::int32_t delta,
                                       int q, std::size_t* clamped_count = nullptr);

/// Offline preprocessing step: delta must be a power of two below 2^(q-1).
/// Clamping more than 1% of the weights flags overflow_warning().
ShiftedLayer shift_weights(const QuantizedTensor& t, std::int32_t delta);

/// shifted * input with the broadcast correction -sum(input column) * delta
/// added to every row. Equals base * input exactly when nothing clamped.
/// The layer is (rows x cols); input is (cols x batch), row-major.
std::vector<std::int64_t> corrected_matmul(const ShiftedLayer& layer,
                                           std::span<const std::int32_t> input,
                                           std::size_t input_cols);

/// Plain integer matmul, the reference the correction must reproduce.
std::vector<std::int64_t> matmul(const QuantizedTensor& a, std::span<const std::int32_t> input,
                                 std::size_t input_cols);

/// One-stage pipeline of the shift compensator: the register latches the
/// correction for input column t while the adder applies column t-1's.
class CompensatorState {
public:
    explicit CompensatorState(std::int32_t delta) : delta_(delta) {}

    struct ColumnInput {
        std::vector<std::int64_t> mac_out;  // raw shifted-weight MAC results, one per bank row
        std::int64_t input_col_sum = 0;
    };

    /// Feeds one column (or std::nullopt to flush) and returns the corrected
    /// outputs of the previous column once the pipeline is primed.
    std::optional<std::vector<std::int64_t>> step(const std::optional<ColumnInput>& in);

    std::int32_t delta() const { return delta_; }
    bool pending() const { return pending_.has_value(); }
    std::optional<std::int64_t> pending_correction() const {
        if (!pending_) return std::nullopt;
        return pending_->correction;
    }

private:
    struct Latched {
        std::vector<std::int64_t> mac_out;
        std::int64_t correction = 0;
    };
    std::int32_t delta_;
    std::optional<Latched> pending_;
};

}  // namespace aimsim
