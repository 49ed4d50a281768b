#pragma once

#include <cstdint>
#include <vector>

#include "aimsim/topology.hpp"
#include "aimsim/workload.hpp"

namespace aimsim {

/// One weight tile materialized for placement on a macro: bank-major weight
/// values plus its hamming rate. Input-determined operators get seeded
/// synthetic in-memory data standing in for runtime-produced operands.
struct TaskData {
    int ordinal = 0;
    std::size_t op_index = 0;
    std::size_t tile_index = 0;
    bool input_determined = false;
    std::vector<std::int32_t> weights;  // banks_per_macro * cells_per_bank
    double hr = 0.0;
};

/// Builds every task of the workload. Each tile must match the macro
/// geometry: rows == banks_per_macro, cols == cells_per_bank. In-memory data
/// of an input-determined operator is derived from the preceding operator's
/// simulated outputs (requantized); the first operator falls back to seeded
/// runtime-like data.
std::vector<TaskData> materialize_tasks(const Workload& w, const ChipTopology& topo,
                                        std::uint64_t seed);

/// Synthetic per-operator input streams, [matrix_cols x input_vectors] each.
/// Weight-stationary operators see feature-like nonnegative data;
/// input-determined ones see runtime data with periodic high-toggle bursts.
/// Shared by the engine (frames) and the task builder (derived operands).
std::vector<QuantizedTensor> synth_operator_inputs(const Workload& w, const ChipTopology& topo,
                                                   std::uint64_t seed);

}  // namespace aimsim
