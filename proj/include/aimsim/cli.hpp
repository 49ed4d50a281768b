#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace aimsim::cli {

/// Everything one end-to-end run needs, read from a manifest document.
/// Seeds are mandatory so reruns reproduce byte-identical outputs.
struct RunManifest {
    std::filesystem::path topology;
    std::filesystem::path workload;
    std::optional<std::filesystem::path> mapping_path;
    std::string strategy = "anneal";  // anneal | sequential | zigzag
    std::string mode = "low-power";   // sprint | low-power
    std::uint64_t seed = 0;
    std::filesystem::path out;

    bool lhr_enabled = false;
    double lhr_lambda = 1.0;
    int lhr_steps = 50;
    double lhr_lr = 0.1;
    std::optional<int> wds_delta;      // unset = WDS off
    std::string booster = "aggressive";  // aggressive | safe-only
    std::optional<int> beta;

    static RunManifest from_json(const nlohmann::json& doc,
                                 const std::filesystem::path& base_dir);
    static RunManifest load(const std::filesystem::path& path);
    void validate() const;
};

/// Per-layer and per-tile hamming statistics for the given tensor files.
nlohmann::json cmd_analyze(const std::vector<std::filesystem::path>& tensor_paths,
                           std::size_t tile_rows, std::size_t tile_cols);

/// Finetunes the float layers in `layers_path` and writes updated layers plus
/// a report under `out`.
nlohmann::json cmd_lhr(const std::filesystem::path& layers_path, double lambda, int steps,
                       double lr, const std::filesystem::path& out);

/// Shifts a tensor by delta, writes the shifted tensor and a report.
nlohmann::json cmd_wds(const std::filesystem::path& tensor_path, int delta,
                       const std::filesystem::path& out);

/// Maps the workload onto the chip; returns the mapping document it wrote.
nlohmann::json cmd_map(const std::filesystem::path& topology, const std::filesystem::path& workload,
                       const std::string& strategy, const std::string& mode, std::uint64_t seed,
                       const std::filesystem::path& out);

/// Runs the engine with an existing or freshly derived mapping.
nlohmann::json cmd_simulate(const RunManifest& manifest);

/// Plot data for one trace, or ablation deltas for two.
nlohmann::json cmd_report(const std::vector<std::filesystem::path>& trace_paths,
                          const std::filesystem::path& out);

/// Full pipeline: optional LHR finetune, optional WDS, mapping, simulation,
/// reports. Everything lands under manifest.out.
nlohmann::json cmd_run(const RunManifest& manifest);

/// Parses argv, dispatches, converts exceptions to exit codes:
/// 0 success, 2 validation, 3 runtime.
int dispatch(int argc, const char* const* argv);

/// AIM_SIM_THREADS, clamped to [1, hardware_concurrency]; 1 when unset.
int thread_cap_from_env();

}  // namespace aimsim::cli
