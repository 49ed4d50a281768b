#pragma once

#include <cstdint>
#include <optional>

#include "aimsim/topology.hpp"

namespace aimsim {

enum class BoosterMode { Sprint, LowPower };

inline constexpr int kDvfsLevel = 100;  // fallback cap: plain worst-case DVFS

/// Nearest higher 5% level covering the group's worst HR. Above 60% reverts
/// to DVFS; at or below 20% the lowest signed-off level applies.
int safe_level_for_hr(double hr_group);

/// Profiled starting aggressive level for each safe level.
int initial_a_level(int safe_level);

/// One 5% notch down, never below the 20% minimum level.
int level_down(int a_level);
/// One 5% notch up, never above the safe level nor the 60% aggressive cap.
int level_up(int a_level, int safe_level);

/// Per-group controller state for the failure-driven level adjustment.
struct BoosterState {
    int group = 0;
    int safe_level = kDvfsLevel;
    int a_level = 60;
    int level = 60;  // current operating level
    long safe_counter = 0;
    BoosterMode mode = BoosterMode::LowPower;
    VfPair current_pair;
};

struct ControllerEvent {
    enum class Kind { None, IrFailure, SetFreqSync };
    Kind kind = Kind::None;
    int set_level = 0;  // meaningful for SetFreqSync

    static ControllerEvent none() { return {Kind::None, 0}; }
    static ControllerEvent failure() { return {Kind::IrFailure, 0}; }
    static ControllerEvent freq_sync(int level) { return {Kind::SetFreqSync, level}; }
};

/// One cycle of the per-group level adjustment. Pure in (state, event);
/// does not touch current_pair — pair selection is the caller's job so the
/// set-frequency constraint can be honored.
BoosterState controller_step(const BoosterState& state, const ControllerEvent& event, int beta);

/// Fresh per-group state: the controller starts at the aggressive level.
BoosterState make_booster_state(int group, int safe_level, BoosterMode mode);

/// V-f pair of a level under the operating mode: sprint takes the highest
/// frequency, low-power the lowest voltage. Ties break toward lower voltage,
/// then lower frequency.
VfPair select_pair(const VfTable& table, int level, BoosterMode mode);

struct MonitorReading {
    double supply_voltage = 0.0;
    bool ir_failure = false;
};

/// Threshold comparator on the modeled supply: pair voltage minus the
/// estimated drop at this toggle rate.
MonitorReading monitor(double rtog_value, const VfPair& pair, const IrCoefficients& coeffs,
                       double v_fail_threshold);

struct RecomputeEvent {
    int set = 0;
    int failing_macro = 0;
    long stall_cycles = 0;
    VfPair new_pair;
    bool frequency_drop = false;  // peers need a set_freq_sync when true
};

/// Recovery plan after an IRFailure: raise voltage at the safe level keeping
/// the current frequency when the table allows it, otherwise drop frequency
/// (which forces a Set-wide sync). Throws SimError when neither exists.
RecomputeEvent plan_recompute(int set, int failing_macro, const BoosterState& state,
                              const VfTable& table, int q, int pair_switch_latency);

}  // namespace aimsim
