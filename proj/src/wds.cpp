#include "aimsim/wds.hpp"

#include <limits>

#include "aimsim/errors.hpp"

namespace aimsim {

namespace {

bool is_power_of_two(std::int32_t v) { return v > 0 && (v & (v - 1)) == 0; }

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
    std::int64_t out;
    if (__builtin_add_overflow(a, b, &out))
        throw SimError("wds: accumulator overflow");
    return out;
}

}  // namespace

std::vector<std::int32_t> shift_values(std::span<const std::int32_t> values, std::int32_t delta,
                                       int q, std::size_t* clamped_count) {
    const std::int32_t hi = int_max_for(q);
    std::vector<std::int32_t> out;
    out.reserve(values.size());
    std::size_t clamped = 0;
    for (std::int32_t v : values) {
        const std::int32_t s = v + delta;
        if (s > hi) {
            out.push_back(hi);
            ++clamped;
        } else {
            out.push_back(s);
        }
    }
    if (clamped_count) *clamped_count = clamped;
    return out;
}

ShiftedLayer shift_weights(const QuantizedTensor& t, std::int32_t delta) {
    t.validate();
    if (!is_power_of_two(delta))
        throw ValidationError("wds: delta " + std::to_string(delta) + " is not a power of two");
    if (delta >= (std::int32_t{1} << (t.q - 1)))
        throw ValidationError("wds: delta " + std::to_string(delta) + " too large for q=" +
                              std::to_string(t.q));
    ShiftedLayer layer;
    layer.base = t;
    layer.delta = delta;
    layer.shifted = t;
    layer.shifted.values = shift_values(t.values, delta, t.q, &layer.clamped_count);
    return layer;
}

std::vector<std::int64_t> matmul(const QuantizedTensor& a, std::span<const std::int32_t> input,
                                 std::size_t input_cols) {
    const std::size_t rows = a.rows();
    const std::size_t inner = a.cols();
    if (input_cols == 0 || input.size() % input_cols != 0 || input.size() / input_cols != inner)
        throw ValidationError("wds: input shape does not match weight columns");
    std::vector<std::int64_t> out(rows * input_cols, 0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < inner; ++k) {
            const std::int64_t w = a.at(r, k);
            for (std::size_t c = 0; c < input_cols; ++c)
                out[r * input_cols + c] =
                    checked_add(out[r * input_cols + c], w * input[k * input_cols + c]);
        }
    return out;
}

std::vector<std::int64_t> corrected_matmul(const ShiftedLayer& layer,
                                           std::span<const std::int32_t> input,
                                           std::size_t input_cols) {
    std::vector<std::int64_t> out = matmul(layer.shifted, input, input_cols);
    const std::size_t inner = layer.shifted.cols();
    const std::size_t rows = layer.shifted.rows();
    // One correction per output column, broadcast to all bank rows.
    for (std::size_t c = 0; c < input_cols; ++c) {
        std::int64_t col_sum = 0;
        for (std::size_t k = 0; k < inner; ++k)
            col_sum = checked_add(col_sum, input[k * input_cols + c]);
        const std::int64_t correction = -col_sum * layer.delta;
        for (std::size_t r = 0; r < rows; ++r)
            out[r * input_cols + c] = checked_add(out[r * input_cols + c], correction);
    }
    return out;
}

std::optional<std::vector<std::int64_t>> CompensatorState::step(
    const std::optional<ColumnInput>& in) {
    std::optional<std::vector<std::int64_t>> emitted;
    if (pending_) {
        emitted = std::move(pending_->mac_out);
        for (auto& v : *emitted) v = checked_add(v, pending_->correction);
        pending_.reset();
    }
    if (in) {
        Latched l;
        l.mac_out = in->mac_out;
        l.correction = -in->input_col_sum * delta_;
        pending_ = std::move(l);
    }
    return emitted;
}

}  // namespace aimsim
