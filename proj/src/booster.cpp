#include "aimsim/booster.hpp"

#include <cmath>

#include "aimsim/errors.hpp"
#include "aimsim/metrics.hpp"

namespace aimsim {

int safe_level_for_hr(double hr_group) {
    if (hr_group < 0.0 || hr_group > 1.0)
        throw ValidationError("safe_level: hr " + std::to_string(hr_group) + " outside [0,1]");
    const double pct = hr_group * 100.0;
    if (pct > 60.0) return kDvfsLevel;
    if (pct <= 20.0) return 20;
    // Nearest higher multiple of 5; epsilon absorbs representation noise so an
    // exact multiple maps to itself.
    const int lvl = static_cast<int>(std::ceil((pct - 1e-9) / 5.0)) * 5;
    return lvl;
}

int initial_a_level(int safe_level) {
    switch (safe_level) {
        case 100: return 60;
        case 60: return 40;
        case 55: return 35;
        case 50: return 35;
        case 45: return 35;
        case 40: return 30;
        case 35: return 30;
        case 30: return 25;
        case 25: return 20;
        case 20: return 20;
        default:
            throw ValidationError("initial_a_level: unknown safe level " +
                                  std::to_string(safe_level));
    }
}

int level_down(int a_level) { return a_level > 20 ? a_level - 5 : 20; }

int level_up(int a_level, int safe_level) {
    const int cap = safe_level == kDvfsLevel ? 60 : std::min(safe_level, 60);
    return a_level + 5 <= cap ? a_level + 5 : a_level;
}

BoosterState make_booster_state(int group, int safe_level, BoosterMode mode) {
    BoosterState st;
    st.group = group;
    st.safe_level = safe_level;
    st.a_level = initial_a_level(safe_level);
    st.level = st.a_level;  // start aggressive
    st.safe_counter = 0;
    st.mode = mode;
    return st;
}

BoosterState controller_step(const BoosterState& state, const ControllerEvent& event, int beta) {
    BoosterState st = state;
    const long fail_window = static_cast<long>(0.2 * beta);  // floor
    switch (event.kind) {
        case ControllerEvent::Kind::IrFailure:
            st.level = st.safe_level;
            if (st.safe_counter < fail_window) {
                st.safe_counter = 0;
                st.a_level = level_down(st.a_level);
            }
            st.safe_counter = 0;
            break;
        case ControllerEvent::Kind::SetFreqSync:
            st.level = event.set_level;
            st.safe_counter = 0;
            break;
        case ControllerEvent::Kind::None:
            ++st.safe_counter;
            if (st.safe_counter == beta) st.level = st.a_level;
            if (st.safe_counter > 2L * beta) {
                st.a_level = level_up(st.a_level, st.safe_level);
                st.level = st.a_level;
                st.safe_counter = beta;
            }
            break;
    }
    return st;
}

VfPair select_pair(const VfTable& table, int level, BoosterMode mode) {
    const VfLevel* lvl = table.find(level);
    if (!lvl) throw ValidationError("select_pair: level " + std::to_string(level) + " not in table");
    const VfPair* best = &lvl->pairs.front();
    for (const auto& p : lvl->pairs) {
        if (mode == BoosterMode::Sprint) {
            // Frequencies are strictly ascending within a level, so the max
            // is unique; tie-breaking below only matters for LowPower.
            if (p.frequency > best->frequency) best = &p;
        } else {
            if (p.voltage < best->voltage ||
                (p.voltage == best->voltage && p.frequency < best->frequency))
                best = &p;
        }
    }
    return *best;
}

MonitorReading monitor(double rtog_value, const VfPair& pair, const IrCoefficients& coeffs,
                       double v_fail_threshold) {
    MonitorReading r;
    r.supply_voltage = pair.voltage - ir_drop_estimate(rtog_value, coeffs);
    r.ir_failure = r.supply_voltage < v_fail_threshold;
    return r;
}

RecomputeEvent plan_recompute(int set, int failing_macro, const BoosterState& state,
                              const VfTable& table, int q, int pair_switch_latency) {
    RecomputeEvent ev;
    ev.set = set;
    ev.failing_macro = failing_macro;
    ev.stall_cycles = static_cast<long>(q) + pair_switch_latency;

    const double f = state.current_pair.frequency;
    const auto keep_f = table.pair_at_frequency(state.safe_level, f);
    if (keep_f && keep_f->voltage > state.current_pair.voltage) {
        ev.new_pair = *keep_f;
        ev.frequency_drop = false;
        return ev;
    }
    // Already at the highest voltage this frequency allows: drop frequency.
    std::optional<VfPair> lower;
    const VfLevel* lvl = table.find(state.safe_level);
    if (lvl) {
        for (const auto& p : lvl->pairs)
            if (p.frequency < f && (!lower || p.frequency > lower->frequency)) lower = p;
    }
    if (!lower)
        throw SimError("recompute: no higher-voltage pair and no lower frequency at level " +
                       std::to_string(state.safe_level));
    ev.new_pair = *lower;
    ev.frequency_drop = true;
    return ev;
}

}  // namespace aimsim
