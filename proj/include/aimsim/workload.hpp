#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aimsim/tensor.hpp"
#include "aimsim/topology.hpp"

namespace aimsim {

/// Half-open row/column block of an operator's weight matrix. One tile is the
/// unit of work placed on one macro.
struct Tile {
    std::size_t row0 = 0, row1 = 0;
    std::size_t col0 = 0, col1 = 0;

    std::size_t rows() const { return row1 - row0; }
    std::size_t cols() const { return col1 - col0; }
};

enum class OperatorKind { WeightStationary, InputDetermined };

struct Operator {
    std::string name;
    OperatorKind kind = OperatorKind::WeightStationary;
    std::optional<QuantizedTensor> weight;        // present iff weight-stationary
    std::size_t runtime_rows = 0, runtime_cols = 0;  // matrix shape for input-determined ops
    std::vector<Tile> tiles;
    int input_vectors = 16;
    std::optional<int> wds_delta;  // per-operator shift override

    std::size_t matrix_rows() const { return weight ? weight->rows() : runtime_rows; }
    std::size_t matrix_cols() const { return weight ? weight->cols() : runtime_cols; }
};

struct Workload {
    std::vector<Operator> operators;

    std::size_t task_count() const;
    /// Global task ordinal of tile `tile_idx` of operator `op_idx`.
    int task_ordinal(std::size_t op_idx, std::size_t tile_idx) const;
    /// Inverse of task_ordinal.
    std::pair<std::size_t, std::size_t> task_location(int ordinal) const;
    std::string task_name(int ordinal) const;
    int task_by_name(const std::string& name) const;

    void validate() const;
};

inline constexpr int kEmptyMacro = -1;

/// Assignment of tasks (weight tiles) to macros. EMPTY is a distinguished
/// value so annealing swaps stay uniform. Sets — the groups of macros jointly
/// computing one operator — are derived from the assignment.
struct TaskMapping {
    std::vector<int> assignment;  // macro id -> task ordinal or kEmptyMacro

    /// Macros computing each operator, indexed by operator. Sorted ascending.
    std::vector<std::vector<int>> sets(const Workload& w) const;

    /// O(#macros): rejects duplicate task assignment, unknown tasks, and a
    /// size mismatch with the topology.
    void validate(const Workload& w, const ChipTopology& t) const;

    /// True when every task of the workload is placed (required to simulate).
    bool complete(const Workload& w) const;
};

Workload load_workload(const std::filesystem::path& path);
Workload workload_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
nlohmann::json workload_to_json(const Workload& w);

TaskMapping mapping_from_json(const nlohmann::json& doc, const Workload& w);
TaskMapping load_mapping(const std::filesystem::path& path, const Workload& w);
nlohmann::json mapping_to_json(const TaskMapping& m, const Workload& w);

}  // namespace aimsim
