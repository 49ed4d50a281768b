#include "aimsim/mapping.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aimsim/errors.hpp"

namespace aimsim {

void AnnealConfig::validate() const {
    if (!(q_cool > 0.0 && q_cool < 1.0)) throw ValidationError("anneal: q_cool must be in (0,1)");
    if (!(t0 > 0.0)) throw ValidationError("anneal: t0 must be positive");
    if (max_steps < 1) throw ValidationError("anneal: max_steps must be >= 1");
    if (reject_limit < 1) throw ValidationError("anneal: reject_limit must be >= 1");
}

std::vector<double> flip_sequence(const FlipProfile& profile) {
    Rng rng(split_seed(profile.seed, stream_id("flip-profile")));
    std::vector<double> seq(static_cast<std::size_t>(profile.steps));
    for (auto& v : seq) v = std::clamp(rng.normal(profile.mu, profile.sigma), 0.0, 1.0);
    return seq;
}

namespace {

struct GroupEval {
    bool active = false;
    int level = kDvfsLevel;
    VfPair pair;
};

int find_root(std::vector<int>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

std::vector<int> derive_group_levels(const TaskMapping& m, const ChipTopology& topo,
                                     const std::vector<TaskData>& tasks) {
    std::vector<int> levels(static_cast<std::size_t>(topo.n_groups), 0);
    for (int g = 0; g < topo.n_groups; ++g) {
        double hr_max = 0.0;
        double hr_sum = 0.0;
        int occupied = 0;
        bool input_det = false;
        for (int k = 0; k < topo.macros_per_group; ++k) {
            const int task = m.assignment[static_cast<std::size_t>(g * topo.macros_per_group + k)];
            if (task == kEmptyMacro) continue;
            const TaskData& t = tasks[static_cast<std::size_t>(task)];
            hr_max = std::max(hr_max, t.hr);
            hr_sum += t.hr;
            input_det |= t.input_determined;
            ++occupied;
        }
        if (occupied == 0) continue;
        if (input_det)
            levels[static_cast<std::size_t>(g)] = kDvfsLevel;
        else if (occupied < topo.macros_per_group)
            // A vacant macro lets the compiler spread the group's load evenly.
            levels[static_cast<std::size_t>(g)] = safe_level_for_hr(hr_sum / topo.macros_per_group);
        else
            levels[static_cast<std::size_t>(g)] = safe_level_for_hr(hr_max);
    }
    return levels;
}

double acceptance_probability(double delta, double s0, double temp) {
    const double denom = 0.5 * s0 * temp;
    if (!(denom > 0.0)) return 0.0;
    return std::exp(-delta / denom);
}

MappingScore score_mapping(const TaskMapping& m, const ChipTopology& topo, const Workload& w,
                           const std::vector<TaskData>& tasks, const FlipProfile& profile,
                           BoosterMode mode) {
    m.validate(w, topo);
    const int n_groups = topo.n_groups;

    const std::vector<int> levels = derive_group_levels(m, topo, tasks);
    std::vector<GroupEval> groups(static_cast<std::size_t>(n_groups));
    for (int g = 0; g < n_groups; ++g) {
        auto& ge = groups[static_cast<std::size_t>(g)];
        if (levels[static_cast<std::size_t>(g)] == 0) continue;
        ge.active = true;
        ge.level = levels[static_cast<std::size_t>(g)];
        ge.pair = select_pair(topo.vf_table, ge.level, mode);
    }

    // Sets sharing a group must share a frequency; union the groups they span.
    std::vector<int> parent(static_cast<std::size_t>(n_groups));
    std::iota(parent.begin(), parent.end(), 0);
    const auto sets = m.sets(w);
    for (const auto& macros : sets) {
        for (std::size_t i = 1; i < macros.size(); ++i) {
            const int a = find_root(parent, topo.group_of(macros[0]));
            const int b = find_root(parent, topo.group_of(macros[i]));
            if (a != b) parent[static_cast<std::size_t>(b)] = a;
        }
    }
    std::vector<double> comp_freq(static_cast<std::size_t>(n_groups), 0.0);
    for (int g = 0; g < n_groups; ++g) {
        if (!groups[static_cast<std::size_t>(g)].active) continue;
        const int root = find_root(parent, g);
        auto& f = comp_freq[static_cast<std::size_t>(root)];
        const double gf = groups[static_cast<std::size_t>(g)].pair.frequency;
        f = f == 0.0 ? gf : std::min(f, gf);
    }
    // Settle each group onto its component frequency (or the closest below).
    bool changed = true;
    while (changed) {
        changed = false;
        for (int g = 0; g < n_groups; ++g) {
            auto& ge = groups[static_cast<std::size_t>(g)];
            if (!ge.active) continue;
            auto& f = comp_freq[static_cast<std::size_t>(find_root(parent, g))];
            const auto p = topo.vf_table.pair_at_or_below(ge.level, f);
            if (!p)
                throw SimError("score: level " + std::to_string(ge.level) +
                               " has no pair at or below the set frequency");
            if (p->frequency < f) {
                f = p->frequency;
                changed = true;
            }
            ge.pair = *p;
        }
    }

    const auto flips = flip_sequence(profile);
    const double mean_flip =
        std::accumulate(flips.begin(), flips.end(), 0.0) / static_cast<double>(flips.size());

    const double bits_per_macro = static_cast<double>(topo.banks_per_macro) *
                                  topo.cells_per_bank * topo.q;
    MappingScore score;
    double max_time = 0.0;
    double dynamic_energy = 0.0;
    for (std::size_t op = 0; op < sets.size(); ++op) {
        if (sets[op].empty()) continue;
        const double cycles = static_cast<double>(w.operators[op].input_vectors) * topo.q;
        double f_set = 0.0;
        for (int macro : sets[op]) {
            const auto& ge = groups[static_cast<std::size_t>(topo.group_of(macro))];
            f_set = f_set == 0.0 ? ge.pair.frequency : std::min(f_set, ge.pair.frequency);
            const TaskData& t = tasks[static_cast<std::size_t>(m.assignment[macro])];
            // mean per-cycle toggled bits = HR * flip probability * macro bits
            dynamic_energy += topo.energy.c_dyn * ge.pair.voltage * ge.pair.voltage * t.hr *
                              mean_flip * bits_per_macro * cycles;
        }
        max_time = std::max(max_time, cycles / f_set);
    }
    const double leakage = topo.energy.p_leak * max_time * topo.n_macros();
    score.delay_cycles = max_time * 1.0e9;
    score.energy = dynamic_energy + leakage;
    score.scalar = mode == BoosterMode::Sprint ? score.delay_cycles : score.energy;
    return score;
}

TaskMapping switch_tasks(const TaskMapping& m, const ChipTopology& topo, Rng& rng) {
    if (topo.n_groups < 2) throw ValidationError("switch: need at least 2 groups");
    const int ga = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(topo.n_groups)));
    int gb = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(topo.n_groups - 1)));
    if (gb >= ga) ++gb;
    const int ma = ga * topo.macros_per_group +
                   static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(topo.macros_per_group)));
    const int mb = gb * topo.macros_per_group +
                   static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(topo.macros_per_group)));
    TaskMapping out = m;
    std::swap(out.assignment[static_cast<std::size_t>(ma)],
              out.assignment[static_cast<std::size_t>(mb)]);
    return out;
}

AnnealResult anneal(const TaskMapping& initial, const AnnealConfig& cfg, const ChipTopology& topo,
                    const MappingScorer& scorer) {
    cfg.validate();
    Rng rng(split_seed(cfg.seed, stream_id("anneal")));

    AnnealResult res;
    res.initial_score = scorer(initial);
    TaskMapping current = initial;
    double s_current = res.initial_score.scalar;
    const double s0 = s_current;
    res.best = initial;
    res.best_score = res.initial_score;
    double temp = cfg.t0;
    int rejects = 0;

    for (int step = 0; step < cfg.max_steps; ++step) {
        temp *= cfg.q_cool;
        TaskMapping candidate = switch_tasks(current, topo, rng);
        const MappingScore s_new = scorer(candidate);
        const double delta = s_new.scalar - s_current;
        const bool accept = delta < 0.0 || rng.uniform() < acceptance_probability(delta, s0, temp);
        ++res.steps_taken;
        if (accept) {
            if (s_new.scalar < res.best_score.scalar) {
                res.best = candidate;
                res.best_score = s_new;
            }
            current = std::move(candidate);
            s_current = s_new.scalar;
            rejects = 0;
            ++res.accepted;
        } else if (++rejects >= cfg.reject_limit) {
            break;
        }
    }
    return res;
}

namespace {

TaskMapping fill_in_order(const Workload& w, const ChipTopology& topo,
                          const std::vector<int>& macro_order) {
    const std::size_t n_tasks = w.task_count();
    if (n_tasks > macro_order.size())
        throw ValidationError("mapping: " + std::to_string(n_tasks) + " tasks exceed " +
                              std::to_string(macro_order.size()) + " macros");
    TaskMapping m;
    m.assignment.assign(static_cast<std::size_t>(topo.n_macros()), kEmptyMacro);
    for (std::size_t t = 0; t < n_tasks; ++t)
        m.assignment[static_cast<std::size_t>(macro_order[t])] = static_cast<int>(t);
    return m;
}

}  // namespace

TaskMapping sequential_map(const Workload& w, const ChipTopology& topo) {
    std::vector<int> order(static_cast<std::size_t>(topo.n_macros()));
    std::iota(order.begin(), order.end(), 0);
    return fill_in_order(w, topo, order);
}

TaskMapping zigzag_map(const Workload& w, const ChipTopology& topo) {
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(topo.n_macros()));
    for (int g = 0; g < topo.n_groups; ++g) {
        if (g % 2 == 0)
            for (int k = 0; k < topo.macros_per_group; ++k) order.push_back(g * topo.macros_per_group + k);
        else
            for (int k = topo.macros_per_group - 1; k >= 0; --k)
                order.push_back(g * topo.macros_per_group + k);
    }
    return fill_in_order(w, topo, order);
}

}  // namespace aimsim
