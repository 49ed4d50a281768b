#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "aimsim/booster.hpp"
#include "aimsim/rng.hpp"
#include "aimsim/tasks.hpp"
#include "aimsim/topology.hpp"
#include "aimsim/workload.hpp"

namespace aimsim {

struct AnnealConfig {
    double q_cool = 0.95;
    double t0 = 1.0;
    int max_steps = 500;
    int reject_limit = 10;  // consecutive rejections before early stop
    std::uint64_t seed = 1;

    void validate() const;
};

struct MappingScore {
    double delay_cycles = 0.0;  // slowest set's completion, in 1 GHz reference cycles
    double energy = 0.0;        // joules over the profiled window
    double scalar = 0.0;        // mode-selected objective, lower is better
};

/// Per-cycle input toggle probabilities for the lightweight scorer: `steps`
/// draws from N(mu, sigma) clipped to [0,1], shared across input lines.
struct FlipProfile {
    double mu = 0.5;
    double sigma = 0.15;
    int steps = 100;
    std::uint64_t seed = 1;
};

std::vector<double> flip_sequence(const FlipProfile& profile);

/// Lightweight analytic evaluation of a mapping: per-cycle R_tog is each
/// macro's HR times the profile's toggle probability; every group runs at the
/// safe-level pair implied by its worst macro; sets sharing groups share one
/// frequency. Groups holding an empty macro have their load redistributed
/// evenly before the safe level is derived.
MappingScore score_mapping(const TaskMapping& m, const ChipTopology& topo, const Workload& w,
                           const std::vector<TaskData>& tasks, const FlipProfile& profile,
                           BoosterMode mode);

/// Safe level of every group under a mapping: worst macro HR, the DVFS
/// fallback for groups holding input-determined work, and the even-spread
/// rule for groups with an empty macro. Groups without work report 0.
std::vector<int> derive_group_levels(const TaskMapping& m, const ChipTopology& topo,
                                     const std::vector<TaskData>& tasks);

/// Normalized exponential acceptor: exp(-delta / (0.5 * s0 * temp)); accepts
/// nothing when the denominator degenerates.
double acceptance_probability(double delta, double s0, double temp);

/// Swaps the assignments of two macros drawn from different groups; either
/// endpoint may be EMPTY.
TaskMapping switch_tasks(const TaskMapping& m, const ChipTopology& topo, Rng& rng);

struct AnnealResult {
    TaskMapping best;
    MappingScore best_score;
    MappingScore initial_score;
    int steps_taken = 0;
    int accepted = 0;
};

using MappingScorer = std::function<MappingScore(const TaskMapping&)>;

/// Simulated annealing over macro assignments with the normalized exponential
/// acceptor exp(-dS / (0.5 * S0 * T)). Never returns a mapping scoring worse
/// than the input.
AnnealResult anneal(const TaskMapping& initial, const AnnealConfig& cfg, const ChipTopology& topo,
                    const MappingScorer& scorer);

/// Deterministic baselines.
TaskMapping sequential_map(const Workload& w, const ChipTopology& topo);
TaskMapping zigzag_map(const Workload& w, const ChipTopology& topo);

}  // namespace aimsim
