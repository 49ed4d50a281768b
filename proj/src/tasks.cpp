#include "aimsim/tasks.hpp"

#include <algorithm>
#include <cmath>

#include "aimsim/errors.hpp"
#include "aimsim/metrics.hpp"
#include "aimsim/rng.hpp"
#include "aimsim/wds.hpp"

namespace aimsim {

namespace {

std::int32_t sign_extend(std::uint32_t bits, int q) {
    const std::uint32_t mask = (1u << q) - 1u;
    bits &= mask;
    if (bits & (1u << (q - 1))) return static_cast<std::int32_t>(bits) - (1 << q);
    return static_cast<std::int32_t>(bits);
}

// Runtime-produced in-memory data for an operator without a predecessor: a
// mix of full-range values and small negatives, which dominate the hamming
// weight of two's-complement data.
std::vector<std::int32_t> synthetic_runtime_values(std::size_t n, int q, Rng& rng) {
    const std::int32_t lo = int_min_for(q);
    const std::int32_t hi = int_max_for(q);
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
    std::vector<std::int32_t> out(n);
    for (auto& v : out) {
        if (rng.uniform() < 0.5)
            v = lo + static_cast<std::int32_t>(rng.uniform_below(span));
        else
            v = -1 - static_cast<std::int32_t>(rng.uniform_below(8));  // -1..-8
    }
    return out;
}

// Previous operator's outputs, requantized to q bits, as the in-memory data
// of an input-determined operator. `needed` values, row-major, cycling when
// the output matrix is smaller.
std::vector<std::int32_t> derived_runtime_values(const Operator& prev,
                                                 const QuantizedTensor& prev_input,
                                                 std::size_t needed, int q) {
    const std::size_t batch = prev_input.cols();
    const auto outputs = matmul(*prev.weight, prev_input.values, batch);
    std::int64_t max_abs = 1;
    for (std::int64_t v : outputs) max_abs = std::max<std::int64_t>(max_abs, std::abs(v));
    const std::int64_t hi = int_max_for(q);
    const std::int64_t divisor = std::max<std::int64_t>(1, (max_abs + hi - 1) / hi);
    std::vector<std::int32_t> out(needed);
    for (std::size_t i = 0; i < needed; ++i)
        out[i] = static_cast<std::int32_t>(outputs[i % outputs.size()] / divisor);
    return out;
}

}  // namespace

std::vector<QuantizedTensor> synth_operator_inputs(const Workload& w, const ChipTopology& topo,
                                                   std::uint64_t seed) {
    const int q = topo.q;
    const std::int32_t lo = int_min_for(q);
    const std::int32_t hi = int_max_for(q);
    const std::uint32_t mask = (1u << q) - 1u;
    const std::int32_t pat_a = sign_extend(0x55555555u & mask, q);
    const std::int32_t pat_b = sign_extend(~0x55555555u & mask, q);

    std::vector<QuantizedTensor> inputs;
    inputs.reserve(w.operators.size());
    for (std::size_t oi = 0; oi < w.operators.size(); ++oi) {
        const Operator& op = w.operators[oi];
        Rng rng(split_seed(seed, stream_id("input") ^ oi));
        const std::size_t rows = op.matrix_cols();
        QuantizedTensor t;
        t.shape = {rows, static_cast<std::size_t>(op.input_vectors)};
        t.q = q;
        t.values.resize(rows * static_cast<std::size_t>(op.input_vectors));
        for (int v = 0; v < op.input_vectors; ++v) {
            const bool burst = op.kind == OperatorKind::InputDetermined && (v / 4) % 4 == 0;
            for (std::size_t k = 0; k < rows; ++k) {
                std::int32_t val;
                if (burst) {
                    val = (v % 2 == 0) ? pat_a : pat_b;
                } else if (op.kind == OperatorKind::InputDetermined) {
                    val = lo + static_cast<std::int32_t>(
                                   rng.uniform_below(static_cast<std::uint64_t>(hi - lo + 1)));
                } else {
                    // Feature-like activations: nonnegative, concentrated low,
                    // so the sign planes stay quiet like post-ReLU data does.
                    double x = std::nearbyint(rng.normal(0.25 * hi, 0.25 * hi));
                    val = static_cast<std::int32_t>(std::clamp(x, 0.0, double(hi)));
                }
                t.values[k * static_cast<std::size_t>(op.input_vectors) +
                         static_cast<std::size_t>(v)] = val;
            }
        }
        inputs.push_back(std::move(t));
    }
    return inputs;
}

std::vector<TaskData> materialize_tasks(const Workload& w, const ChipTopology& topo,
                                        std::uint64_t seed) {
    std::vector<TaskData> tasks;
    tasks.reserve(w.task_count());
    const std::size_t banks = static_cast<std::size_t>(topo.banks_per_macro);
    const std::size_t cells = static_cast<std::size_t>(topo.cells_per_bank);

    std::vector<QuantizedTensor> op_inputs;  // built lazily, only for derived operands
    for (std::size_t oi = 0; oi < w.operators.size(); ++oi) {
        const Operator& op = w.operators[oi];
        Rng rng(split_seed(seed, stream_id("task-data") ^ oi));

        // In-memory data of the whole operator, tile slices below.
        std::vector<std::int32_t> matrix;
        const std::size_t matrix_size = op.matrix_rows() * op.matrix_cols();
        if (op.weight) {
            if (op.weight->q != topo.q)
                throw ValidationError("tasks: operator '" + op.name + "' has q=" +
                                      std::to_string(op.weight->q) + ", topology q=" +
                                      std::to_string(topo.q));
            matrix = op.weight->values;
        } else {
            const Operator* prev = oi > 0 ? &w.operators[oi - 1] : nullptr;
            if (prev && prev->weight) {
                if (op_inputs.empty()) op_inputs = synth_operator_inputs(w, topo, seed);
                matrix = derived_runtime_values(*prev, op_inputs[oi - 1], matrix_size, topo.q);
            } else {
                matrix = synthetic_runtime_values(matrix_size, topo.q, rng);
            }
        }

        const std::size_t C = op.matrix_cols();
        for (std::size_t ti = 0; ti < op.tiles.size(); ++ti) {
            const Tile& tile = op.tiles[ti];
            if (tile.rows() != banks || tile.cols() != cells)
                throw ValidationError("tasks: tile " + std::to_string(ti) + " of operator '" +
                                      op.name + "' is " + std::to_string(tile.rows()) + "x" +
                                      std::to_string(tile.cols()) + ", macro geometry needs " +
                                      std::to_string(banks) + "x" + std::to_string(cells));
            TaskData t;
            t.ordinal = w.task_ordinal(oi, ti);
            t.op_index = oi;
            t.tile_index = ti;
            t.input_determined = op.kind == OperatorKind::InputDetermined;
            t.weights.reserve(banks * cells);
            for (std::size_t r = tile.row0; r < tile.row1; ++r)
                for (std::size_t c = tile.col0; c < tile.col1; ++c)
                    t.weights.push_back(matrix[r * C + c]);
            t.hr = hamming(t.weights, topo.q).hr;
            tasks.push_back(std::move(t));
        }
    }
    return tasks;
}

}  // namespace aimsim
