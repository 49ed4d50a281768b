#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "aimsim/booster.hpp"
#include "aimsim/mapping.hpp"
#include "aimsim/metrics.hpp"
#include "aimsim/tasks.hpp"
#include "aimsim/topology.hpp"
#include "aimsim/workload.hpp"

namespace aimsim {

struct EngineOptions {
    BoosterMode mode = BoosterMode::LowPower;
    bool booster_aggressive = true;  // false pins every group to its safe level
    std::uint64_t seed = 1;
    int threads = 1;  // cap on per-cycle metric parallelism (AIM_SIM_THREADS)
};

struct GroupCycleRecord {
    int level = 0;
    int a_level = 0;
    long safe_counter = 0;
    VfPair pair;
    double rtog = 0.0;  // max over the group's active macros
    double supply = 0.0;
    bool failure = false;
};

struct CycleRecord {
    long cycle = 0;
    std::vector<GroupCycleRecord> groups;
    std::vector<double> macro_rtog;  // zero for idle macros
    std::vector<int> stalled_sets;
    double energy = 0.0;  // joules spent in this cycle
};

struct ControllerLogEntry {
    long cycle = 0;
    int group = 0;
    std::string event;  // failure | freq_sync | freq_follow | back_to_a | a_level_up
    int level = 0;
    int a_level = 0;
    long safe_counter = 0;
    VfPair pair;
};

struct TraceSummary {
    long total_cycles = 0;
    double wall_time = 0.0;  // seconds, slowest clock domain
    double energy = 0.0;     // exactly the sum of per-cycle energy
    long failure_count = 0;
    long recompute_cycles = 0;
    double effective_tops = 0.0;
    double max_ir_drop = 0.0;  // max estimated drop over all monitored cycles
    double mean_rtog = 0.0;    // mean of group maxima over monitored cycles
    std::string workload_fingerprint;
    std::uint64_t seed = 0;
    std::string mode;
    std::string booster;
};

struct SimTrace {
    std::vector<CycleRecord> records;
    std::vector<ControllerLogEntry> controller_log;
    TraceSummary summary;
};

/// Runs the workload cycle by cycle: streams bit-serial inputs, derives
/// per-bank and per-macro toggle rates, drives the per-group monitors and
/// booster controllers, applies Set stalls on recompute, and accumulates
/// energy and timing. Deterministic for a fixed seed.
SimTrace simulate(const ChipTopology& topo, const Workload& w, const TaskMapping& m,
                  const EngineOptions& opts);

/// Toggle frames of a bit-serial input stream. The tensor is
/// [cells x vectors]; each vector contributes q frames (LSB-first), each the
/// XOR of the corresponding bit-planes of this vector and the previous one
/// (the first vector toggles against the quiescent all-zero state).
std::vector<BitToggleFrame> bit_serialize(const QuantizedTensor& input);

/// Ablation deltas between two runs of the same workload.
nlohmann::json compare_runs(const SimTrace& a, const SimTrace& b);

nlohmann::json summary_to_json(const TraceSummary& s);
TraceSummary summary_from_json(const nlohmann::json& doc);

/// JSON-lines stream: one line per cycle record, controller events inlined as
/// their own lines, terminated by the summary line.
void write_trace_jsonl(const SimTrace& trace, const std::filesystem::path& path);
SimTrace load_trace_jsonl(const std::filesystem::path& path);

/// Per-cycle plot data (cycle, group, level, voltage, frequency, rtog,
/// supply, failure, stalled, energy).
void write_trace_csv(const SimTrace& trace, const std::filesystem::path& path);

}  // namespace aimsim
