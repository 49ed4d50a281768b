#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <json.hpp>

namespace aimsim {

/// Lumped coefficients of the affine supply-sag estimate:
/// drop(rtog) = static_drop + dynamic_slope * rtog.
struct IrCoefficients {
    double static_drop = 0.02;    // volts, leakage-driven
    double dynamic_slope = 0.12;  // volts per unit toggle rate

    void validate() const;
};

struct VfPair {
    double voltage = 0.0;    // volts
    double frequency = 0.0;  // Hz

    bool operator==(const VfPair&) const = default;
};

/// One operating level: the toggle-rate cap it was signed off for and the
/// (voltage, frequency) pairs usable under that cap.
struct VfLevel {
    int rtog_cap = 0;  // percent, one of {20,25,...,60,100}
    std::vector<VfPair> pairs;
};

struct VfTable {
    std::vector<VfLevel> levels;  // strictly increasing rtog_cap; 100 always present

    const VfLevel* find(int rtog_cap) const;
    bool has_level(int rtog_cap) const { return find(rtog_cap) != nullptr; }

    /// Pair at `level` with exactly this frequency, if the subset lists one.
    std::optional<VfPair> pair_at_frequency(int level, double frequency) const;
    /// Highest-frequency pair at `level` with frequency <= limit, if any.
    std::optional<VfPair> pair_at_or_below(int level, double frequency_limit) const;

    void validate() const;
};

/// Energy accounting knobs: dynamic energy per V^2 per toggled bit, plus
/// per-macro leakage power.
struct EnergyModel {
    double c_dyn = 3.0e-15;  // J / V^2 / toggled bit
    double p_leak = 8.0e-4;  // W per macro

    void validate() const;
};

/// Chip geometry plus the controller and power-model configuration shared by
/// the metrics, booster, mapping, and engine layers.
struct ChipTopology {
    int n_groups = 1;
    int macros_per_group = 1;
    int banks_per_macro = 32;
    int cells_per_bank = 32;
    int q = 8;
    VfTable vf_table;
    int beta = 100;                  // controller observation window
    double v_fail_threshold = 0.61;  // volts
    double vdd_nominal = 0.75;       // volts
    IrCoefficients ir_coeffs;
    int pair_switch_latency = 10;  // cycles to settle after a V-f change
    EnergyModel energy;

    int n_macros() const { return n_groups * macros_per_group; }
    int group_of(int macro) const { return macro / macros_per_group; }
    std::size_t cells_per_macro() const {
        return static_cast<std::size_t>(banks_per_macro) * cells_per_bank;
    }

    void validate() const;
};

/// Levels 20..60 in 5% steps plus the 100% fallback. Pair voltages are
/// calibrated against the drop estimate so the lowest-voltage pair of a level
/// sits exactly at the failure threshold when rtog equals the level's cap.
VfTable default_vf_table(double vdd_nominal, double v_fail_threshold, const IrCoefficients& coeffs);

ChipTopology load_topology(const std::filesystem::path& path);
ChipTopology topology_from_json(const nlohmann::json& doc);
nlohmann::json topology_to_json(const ChipTopology& t);

}  // namespace aimsim
