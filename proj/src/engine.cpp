#include "aimsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

#include "aimsim/errors.hpp"
#include "aimsim/rng.hpp"

namespace aimsim {

std::vector<BitToggleFrame> bit_serialize(const QuantizedTensor& input) {
    input.validate();
    const std::size_t cells = input.rows();
    const std::size_t vectors = input.cols();
    const int q = input.q;
    const std::uint32_t mask = q >= 32 ? ~0u : ((1u << q) - 1u);
    std::vector<BitToggleFrame> frames;
    frames.reserve(vectors * static_cast<std::size_t>(q));
    std::vector<std::uint32_t> prev(cells, 0);
    for (std::size_t v = 0; v < vectors; ++v) {
        std::vector<std::uint32_t> toggled(cells);
        for (std::size_t k = 0; k < cells; ++k)
            toggled[k] = (static_cast<std::uint32_t>(input.at(k, v)) & mask) ^ prev[k];
        for (int i = 0; i < q; ++i) {
            BitToggleFrame f(cells);
            for (std::size_t k = 0; k < cells; ++k)
                f[k] = static_cast<std::uint8_t>((toggled[k] >> i) & 1u);
            frames.push_back(std::move(f));
        }
        for (std::size_t k = 0; k < cells; ++k) prev[k] ^= toggled[k];
    }
    return frames;
}

namespace {

std::string fingerprint(const ChipTopology& topo, const Workload& w) {
    std::ostringstream s;
    s << topo.n_groups << "x" << topo.macros_per_group << "x" << topo.banks_per_macro << "x"
      << topo.cells_per_bank << "q" << topo.q;
    for (const auto& op : w.operators)
        s << "|" << op.name << ":" << (op.kind == OperatorKind::InputDetermined ? "id" : "ws")
          << ":" << op.tiles.size() << ":" << op.input_vectors;
    return s.str();
}

struct SetState {
    int op = 0;
    std::vector<int> macros;  // ascending
    std::vector<int> groups;  // ascending, unique
    int vectors = 0;
    int v = 0;  // current input vector
    int p = 0;  // current bit plane
    bool done = false;
    bool stalled = false;
    long stall_until = 0;  // first cycle that runs normally again
    int replay_macro = -1;
};

struct GroupState {
    BoosterState booster;
    bool has_work = false;  // hosts at least one mapped macro
    int component = 0;
};

}  // namespace

SimTrace simulate(const ChipTopology& topo, const Workload& w, const TaskMapping& m,
                  const EngineOptions& opts) {
    topo.validate();
    w.validate();
    m.validate(w, topo);
    if (!m.complete(w))
        throw ValidationError("simulate: mapping does not place every task of the workload");

    const int q = topo.q;
    const int n_groups = topo.n_groups;
    const int n_macros = topo.n_macros();
    const std::size_t banks = static_cast<std::size_t>(topo.banks_per_macro);
    const std::size_t cells = static_cast<std::size_t>(topo.cells_per_bank);

    const auto tasks = materialize_tasks(w, topo, opts.seed);

    // Per-macro task handles and bit-serialized input frames.
    std::vector<const TaskData*> macro_task(static_cast<std::size_t>(n_macros), nullptr);
    for (int mac = 0; mac < n_macros; ++mac) {
        const int t = m.assignment[static_cast<std::size_t>(mac)];
        if (t != kEmptyMacro) macro_task[static_cast<std::size_t>(mac)] = &tasks[static_cast<std::size_t>(t)];
    }
    std::vector<std::vector<BitToggleFrame>> macro_frames(static_cast<std::size_t>(n_macros));
    {
        // One input matrix per operator; each macro streams its tile's row slice.
        const std::vector<QuantizedTensor> op_inputs = synth_operator_inputs(w, topo, opts.seed);
        for (int mac = 0; mac < n_macros; ++mac) {
            const TaskData* t = macro_task[static_cast<std::size_t>(mac)];
            if (!t) continue;
            const Operator& op = w.operators[t->op_index];
            const Tile& tile = op.tiles[t->tile_index];
            const QuantizedTensor& full = op_inputs[t->op_index];
            QuantizedTensor slice;
            slice.shape = {cells, static_cast<std::size_t>(op.input_vectors)};
            slice.q = q;
            slice.values.reserve(cells * static_cast<std::size_t>(op.input_vectors));
            for (std::size_t r = tile.col0; r < tile.col1; ++r)
                for (int v = 0; v < op.input_vectors; ++v)
                    slice.values.push_back(full.at(r, static_cast<std::size_t>(v)));
            macro_frames[static_cast<std::size_t>(mac)] = bit_serialize(slice);
        }
    }

    // Sets: the macros jointly computing one operator.
    std::vector<SetState> sets;
    {
        const auto derived = m.sets(w);
        for (std::size_t op = 0; op < derived.size(); ++op) {
            if (derived[op].empty()) continue;
            SetState s;
            s.op = static_cast<int>(op);
            s.macros = derived[op];
            s.vectors = w.operators[op].input_vectors;
            for (int mac : s.macros) {
                const int g = topo.group_of(mac);
                if (s.groups.empty() || s.groups.back() != g) s.groups.push_back(g);
            }
            std::sort(s.groups.begin(), s.groups.end());
            s.groups.erase(std::unique(s.groups.begin(), s.groups.end()), s.groups.end());
            sets.push_back(std::move(s));
        }
    }
    std::vector<int> set_of_task(tasks.size(), -1);
    for (std::size_t si = 0; si < sets.size(); ++si)
        for (int mac : sets[si].macros)
            set_of_task[static_cast<std::size_t>(m.assignment[static_cast<std::size_t>(mac)])] =
                static_cast<int>(si);

    // Group booster states: safe level from the worst HR, input-determined
    // operators pin the group to the DVFS fallback.
    std::vector<GroupState> groups(static_cast<std::size_t>(n_groups));
    for (int g = 0; g < n_groups; ++g) {
        double hr_max = 0.0;
        bool any = false;
        bool input_det = false;
        for (int k = 0; k < topo.macros_per_group; ++k) {
            const TaskData* t = macro_task[static_cast<std::size_t>(g * topo.macros_per_group + k)];
            if (!t) continue;
            any = true;
            hr_max = std::max(hr_max, t->hr);
            input_det |= t->input_determined;
        }
        const int safe = input_det ? kDvfsLevel : safe_level_for_hr(any ? hr_max : 0.0);
        auto& gs = groups[static_cast<std::size_t>(g)];
        gs.has_work = any;
        gs.booster = make_booster_state(g, safe, opts.mode);
        if (!opts.booster_aggressive) {
            gs.booster.level = safe;  // pinned: no aggressive probing
        }
    }

    // Components: groups coupled through shared sets run at one frequency.
    std::vector<int> parent(static_cast<std::size_t>(n_groups));
    std::iota(parent.begin(), parent.end(), 0);
    const auto find_root = [&parent](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (const auto& s : sets)
        for (std::size_t i = 1; i < s.groups.size(); ++i) {
            const int a = find_root(s.groups[0]);
            const int b = find_root(s.groups[i]);
            if (a != b) parent[static_cast<std::size_t>(b)] = a;
        }
    std::vector<double> comp_freq(static_cast<std::size_t>(n_groups), 0.0);
    for (int g = 0; g < n_groups; ++g) {
        auto& gs = groups[static_cast<std::size_t>(g)];
        gs.component = find_root(g);
        if (!gs.has_work) continue;
        const VfPair pref = select_pair(topo.vf_table, gs.booster.level, opts.mode);
        auto& f = comp_freq[static_cast<std::size_t>(gs.component)];
        f = f == 0.0 ? pref.frequency : std::min(f, pref.frequency);
    }
    {
        bool changed = true;
        while (changed) {
            changed = false;
            for (int g = 0; g < n_groups; ++g) {
                auto& gs = groups[static_cast<std::size_t>(g)];
                if (!gs.has_work) continue;
                auto& f = comp_freq[static_cast<std::size_t>(gs.component)];
                const auto p = topo.vf_table.pair_at_or_below(gs.booster.level, f);
                if (!p)
                    throw SimError("simulate: level " + std::to_string(gs.booster.level) +
                                   " has no pair at or below the set frequency");
                if (p->frequency < f) {
                    f = p->frequency;
                    changed = true;
                }
                gs.booster.current_pair = *p;
            }
        }
        for (int g = 0; g < n_groups; ++g) {
            auto& gs = groups[static_cast<std::size_t>(g)];
            if (!gs.has_work)  // dark silicon: charge leakage at the low-power floor
                gs.booster.current_pair = select_pair(topo.vf_table, 20, BoosterMode::LowPower);
        }
    }

    // Re-picks the group's pair after a level change, keeping its frequency.
    const auto retune_pair = [&](GroupState& gs) {
        const double f = gs.booster.current_pair.frequency;
        const auto p = topo.vf_table.pair_at_frequency(gs.booster.level, f);
        if (!p)
            throw SimError("simulate: level " + std::to_string(gs.booster.level) +
                           " cannot hold frequency " + std::to_string(f));
        gs.booster.current_pair = *p;
    };

    SimTrace trace;
    trace.summary.workload_fingerprint = fingerprint(topo, w);
    trace.summary.seed = opts.seed;
    trace.summary.mode = opts.mode == BoosterMode::Sprint ? "sprint" : "low-power";
    trace.summary.booster = opts.booster_aggressive ? "aggressive" : "safe-only";

    const auto log_event = [&](long cycle, const GroupState& gs, const char* event) {
        trace.controller_log.push_back({cycle, gs.booster.group, event, gs.booster.level,
                                        gs.booster.a_level, gs.booster.safe_counter,
                                        gs.booster.current_pair});
    };

    std::vector<double> comp_time(static_cast<std::size_t>(n_groups), 0.0);
    const double bits_per_macro = static_cast<double>(banks) * cells * q;
    double total_macs = 0.0;
    for (const auto& s : sets)
        total_macs += static_cast<double>(s.vectors) * s.macros.size() * banks * cells;

    long failure_count = 0;
    long recompute_cycles = 0;
    double energy_total = 0.0;
    double max_drop = 0.0;
    double rtog_sum = 0.0;
    long rtog_samples = 0;

    const long cycle_guard = [&] {
        long worst = 0;
        for (const auto& s : sets)
            worst = std::max(worst, static_cast<long>(s.vectors) * q);
        return worst * 16 + 65536;
    }();

    std::vector<int> frame_of_macro(static_cast<std::size_t>(n_macros), -1);
    std::vector<double> macro_rate(static_cast<std::size_t>(n_macros), 0.0);

    long t = 0;
    for (;; ++t) {
        bool all_done = true;
        for (const auto& s : sets) all_done &= s.done;
        if (all_done) break;
        if (t > cycle_guard) throw SimError("simulate: cycle guard exceeded, configuration livelocked");

        CycleRecord rec;
        rec.cycle = t;
        rec.macro_rtog.assign(static_cast<std::size_t>(n_macros), 0.0);

        // Activity: which macro streams which frame this cycle.
        std::fill(frame_of_macro.begin(), frame_of_macro.end(), -1);
        std::vector<int> active;
        for (auto& s : sets) {
            if (s.done) continue;
            if (s.stalled) {
                rec.stalled_sets.push_back(s.op);
                const long replay_start = s.stall_until - q;
                if (t >= replay_start) {
                    const int plane = static_cast<int>(q - (s.stall_until - t));
                    frame_of_macro[static_cast<std::size_t>(s.replay_macro)] = s.v * q + plane;
                    active.push_back(s.replay_macro);
                }
            } else {
                const int idx = s.v * q + s.p;
                for (int mac : s.macros) {
                    frame_of_macro[static_cast<std::size_t>(mac)] = idx;
                    active.push_back(mac);
                }
            }
        }
        std::sort(active.begin(), active.end());

        // Per-bank toggle rates, averaged per macro.
        const auto eval_macro = [&](int mac) {
            const TaskData* task = macro_task[static_cast<std::size_t>(mac)];
            const auto& frame = macro_frames[static_cast<std::size_t>(mac)]
                                            [static_cast<std::size_t>(frame_of_macro[static_cast<std::size_t>(mac)])];
            double sum = 0.0;
            for (std::size_t b = 0; b < banks; ++b) {
                const std::span<const std::int32_t> bank(task->weights.data() + b * cells, cells);
                sum += rtog(bank, q, frame);
            }
            macro_rate[static_cast<std::size_t>(mac)] = sum / static_cast<double>(banks);
        };
        if (opts.threads > 1 && active.size() >= 32) {
            const std::size_t n_chunks = std::min<std::size_t>(static_cast<std::size_t>(opts.threads), 8);
            std::vector<std::future<void>> futs;
            const std::size_t chunk = (active.size() + n_chunks - 1) / n_chunks;
            for (std::size_t c = 0; c < n_chunks; ++c) {
                const std::size_t lo = c * chunk;
                const std::size_t hi = std::min(active.size(), lo + chunk);
                if (lo >= hi) break;
                futs.push_back(std::async(std::launch::async, [&, lo, hi] {
                    for (std::size_t i = lo; i < hi; ++i) eval_macro(active[i]);
                }));
            }
            for (auto& f : futs) f.get();
        } else {
            for (int mac : active) eval_macro(mac);
        }
        for (int mac : active)
            rec.macro_rtog[static_cast<std::size_t>(mac)] = macro_rate[static_cast<std::size_t>(mac)];

        // Monitors: per-group supply from the worst active macro.
        rec.groups.resize(static_cast<std::size_t>(n_groups));
        for (int g = 0; g < n_groups; ++g) {
            auto& gr = rec.groups[static_cast<std::size_t>(g)];
            const auto& gs = groups[static_cast<std::size_t>(g)];
            double worst = 0.0;
            bool any = false;
            for (int k = 0; k < topo.macros_per_group; ++k) {
                const int mac = g * topo.macros_per_group + k;
                if (frame_of_macro[static_cast<std::size_t>(mac)] >= 0) {
                    any = true;
                    worst = std::max(worst, macro_rate[static_cast<std::size_t>(mac)]);
                }
            }
            gr.rtog = any ? worst : 0.0;
            const MonitorReading reading =
                monitor(gr.rtog, gs.booster.current_pair, topo.ir_coeffs, topo.v_fail_threshold);
            gr.supply = reading.supply_voltage;
            gr.failure = any && reading.ir_failure;
            if (any) {
                max_drop = std::max(max_drop, ir_drop_estimate(gr.rtog, topo.ir_coeffs));
                rtog_sum += gr.rtog;
                ++rtog_samples;
            }
        }

        // Failure handling, deterministic in group-id order. A group whose
        // pair was already adjusted this cycle (set sync from an earlier
        // failure) keeps its monitor flag in the record but is not handled
        // again: the reading predates the adjustment and its set is stalling.
        std::vector<char> stepped(static_cast<std::size_t>(n_groups), 0);
        for (int g = 0; g < n_groups; ++g) {
            if (!rec.groups[static_cast<std::size_t>(g)].failure) continue;
            if (stepped[static_cast<std::size_t>(g)]) continue;
            auto& gs = groups[static_cast<std::size_t>(g)];
            int failing = -1;
            double worst = -1.0;
            for (int k = 0; k < topo.macros_per_group; ++k) {
                const int mac = g * topo.macros_per_group + k;
                if (frame_of_macro[static_cast<std::size_t>(mac)] >= 0 &&
                    macro_rate[static_cast<std::size_t>(mac)] > worst) {
                    worst = macro_rate[static_cast<std::size_t>(mac)];
                    failing = mac;
                }
            }
            const int task = m.assignment[static_cast<std::size_t>(failing)];
            const int si = set_of_task[static_cast<std::size_t>(task)];
            auto& s = sets[static_cast<std::size_t>(si)];

            const RecomputeEvent ev = plan_recompute(si, failing, gs.booster, topo.vf_table, q,
                                                     topo.pair_switch_latency);
            gs.booster = controller_step(gs.booster, ControllerEvent::failure(), topo.beta);
            gs.booster.current_pair = ev.new_pair;
            stepped[static_cast<std::size_t>(g)] = 1;
            log_event(t, gs, "failure");

            if (ev.frequency_drop) {
                comp_freq[static_cast<std::size_t>(gs.component)] = ev.new_pair.frequency;
                for (int g2 : s.groups) {
                    if (g2 == g) continue;
                    auto& peer = groups[static_cast<std::size_t>(g2)];
                    peer.booster = controller_step(
                        peer.booster, ControllerEvent::freq_sync(gs.booster.level), topo.beta);
                    const auto p = topo.vf_table.pair_at_or_below(peer.booster.level,
                                                                  ev.new_pair.frequency);
                    if (!p)
                        throw SimError("simulate: set sync found no pair for level " +
                                       std::to_string(peer.booster.level));
                    peer.booster.current_pair = *p;
                    stepped[static_cast<std::size_t>(g2)] = 1;
                    log_event(t, peer, "freq_sync");
                }
                for (int g3 = 0; g3 < n_groups; ++g3) {
                    auto& other = groups[static_cast<std::size_t>(g3)];
                    if (g3 == g || other.component != gs.component || !other.has_work) continue;
                    if (std::find(s.groups.begin(), s.groups.end(), g3) != s.groups.end()) continue;
                    const auto p = topo.vf_table.pair_at_or_below(other.booster.level,
                                                                  ev.new_pair.frequency);
                    if (!p)
                        throw SimError("simulate: frequency follow found no pair for level " +
                                       std::to_string(other.booster.level));
                    other.booster.current_pair = *p;
                    log_event(t, other, "freq_follow");
                }
            }

            if (!s.stalled) {
                s.stalled = true;
                s.replay_macro = failing;
                s.p = 0;  // the whole pass reruns
                s.stall_until = t + 1 + ev.stall_cycles;
                recompute_cycles += ev.stall_cycles;
            } else {
                s.stall_until = std::max(s.stall_until, t + 1 + ev.stall_cycles);
            }
            ++failure_count;
        }

        // Plain controller cycles for every group that still has pending work.
        if (opts.booster_aggressive) {
            for (int g = 0; g < n_groups; ++g) {
                auto& gs = groups[static_cast<std::size_t>(g)];
                if (stepped[static_cast<std::size_t>(g)] || !gs.has_work) continue;
                bool pending = false;
                for (const auto& s : sets) {
                    if (s.done) continue;
                    if (std::find(s.groups.begin(), s.groups.end(), g) != s.groups.end()) {
                        pending = true;
                        break;
                    }
                }
                if (!pending) continue;
                const int old_level = gs.booster.level;
                const int old_a = gs.booster.a_level;
                gs.booster = controller_step(gs.booster, ControllerEvent::none(), topo.beta);
                if (gs.booster.level != old_level) {
                    retune_pair(gs);
                    log_event(t, gs, gs.booster.a_level != old_a ? "a_level_up" : "back_to_a");
                }
            }
        }

        // Energy: dynamic per active macro, leakage for every macro.
        double cycle_energy = 0.0;
        for (int mac : active) {
            const auto& gs = groups[static_cast<std::size_t>(topo.group_of(mac))];
            const double v = gs.booster.current_pair.voltage;
            cycle_energy += topo.energy.c_dyn * v * v *
                            macro_rate[static_cast<std::size_t>(mac)] * bits_per_macro;
        }
        for (int g = 0; g < n_groups; ++g) {
            const auto& gs = groups[static_cast<std::size_t>(g)];
            cycle_energy += topo.macros_per_group * topo.energy.p_leak /
                            gs.booster.current_pair.frequency;
        }
        rec.energy = cycle_energy;
        energy_total += cycle_energy;

        // Wall time advances for components that still have pending work.
        {
            std::vector<char> comp_pending(static_cast<std::size_t>(n_groups), 0);
            for (const auto& s : sets) {
                if (s.done) continue;
                for (int g : s.groups)
                    comp_pending[static_cast<std::size_t>(groups[static_cast<std::size_t>(g)].component)] = 1;
            }
            for (int c = 0; c < n_groups; ++c)
                if (comp_pending[static_cast<std::size_t>(c)])
                    comp_time[static_cast<std::size_t>(c)] += 1.0 / comp_freq[static_cast<std::size_t>(c)];
        }

        for (int g = 0; g < n_groups; ++g) {
            const auto& gs = groups[static_cast<std::size_t>(g)];
            auto& gr = rec.groups[static_cast<std::size_t>(g)];
            gr.level = gs.booster.level;
            gr.a_level = gs.booster.a_level;
            gr.safe_counter = gs.booster.safe_counter;
            gr.pair = gs.booster.current_pair;
        }
        trace.records.push_back(std::move(rec));

        // Advance set positions.
        for (auto& s : sets) {
            if (s.done) continue;
            if (s.stalled) {
                if (t + 1 == s.stall_until) {
                    s.stalled = false;
                    s.replay_macro = -1;
                    s.p = 0;
                    if (++s.v == s.vectors) s.done = true;
                }
            } else {
                if (++s.p == q) {
                    s.p = 0;
                    if (++s.v == s.vectors) s.done = true;
                }
            }
        }
    }

    auto& sum = trace.summary;
    sum.total_cycles = t;
    sum.energy = energy_total;
    sum.failure_count = failure_count;
    sum.recompute_cycles = recompute_cycles;
    sum.max_ir_drop = max_drop;
    sum.mean_rtog = rtog_samples > 0 ? rtog_sum / static_cast<double>(rtog_samples) : 0.0;
    for (double ct : comp_time) sum.wall_time = std::max(sum.wall_time, ct);
    sum.effective_tops =
        sum.wall_time > 0.0 ? 2.0 * total_macs / sum.wall_time / 1.0e12 : 0.0;
    return trace;
}

nlohmann::json summary_to_json(const TraceSummary& s) {
    return nlohmann::json{{"total_cycles", s.total_cycles},
                          {"wall_time", s.wall_time},
                          {"energy", s.energy},
                          {"failure_count", s.failure_count},
                          {"recompute_cycles", s.recompute_cycles},
                          {"effective_tops", s.effective_tops},
                          {"max_ir_drop", s.max_ir_drop},
                          {"mean_rtog", s.mean_rtog},
                          {"workload_fingerprint", s.workload_fingerprint},
                          {"seed", s.seed},
                          {"mode", s.mode},
                          {"booster", s.booster}};
}

TraceSummary summary_from_json(const nlohmann::json& doc) {
    TraceSummary s;
    s.total_cycles = doc.at("total_cycles").get<long>();
    s.wall_time = doc.at("wall_time").get<double>();
    s.energy = doc.at("energy").get<double>();
    s.failure_count = doc.at("failure_count").get<long>();
    s.recompute_cycles = doc.at("recompute_cycles").get<long>();
    s.effective_tops = doc.at("effective_tops").get<double>();
    s.max_ir_drop = doc.at("max_ir_drop").get<double>();
    s.mean_rtog = doc.at("mean_rtog").get<double>();
    s.workload_fingerprint = doc.at("workload_fingerprint").get<std::string>();
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.mode = doc.value("mode", "");
    s.booster = doc.value("booster", "");
    return s;
}

namespace {

nlohmann::json pair_to_json(const VfPair& p) {
    return nlohmann::json{{"voltage", p.voltage}, {"frequency", p.frequency}};
}

VfPair pair_from_json(const nlohmann::json& doc) {
    return {doc.at("voltage").get<double>(), doc.at("frequency").get<double>()};
}

}  // namespace

void write_trace_jsonl(const SimTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw SimError("trace: cannot write " + path.string());
    std::size_t next_event = 0;
    for (const auto& rec : trace.records) {
        while (next_event < trace.controller_log.size() &&
               trace.controller_log[next_event].cycle <= rec.cycle) {
            const auto& e = trace.controller_log[next_event++];
            nlohmann::json line{{"type", "event"},       {"cycle", e.cycle},
                                {"group", e.group},       {"event", e.event},
                                {"level", e.level},       {"a_level", e.a_level},
                                {"safe_counter", e.safe_counter}, {"pair", pair_to_json(e.pair)}};
            out << line.dump() << "\n";
        }
        nlohmann::json groups = nlohmann::json::array();
        for (const auto& g : rec.groups)
            groups.push_back({{"level", g.level},
                              {"a_level", g.a_level},
                              {"safe_counter", g.safe_counter},
                              {"pair", pair_to_json(g.pair)},
                              {"rtog", g.rtog},
                              {"supply", g.supply},
                              {"failure", g.failure}});
        nlohmann::json line{{"type", "cycle"},
                            {"cycle", rec.cycle},
                            {"energy", rec.energy},
                            {"stalled_sets", rec.stalled_sets},
                            {"groups", groups},
                            {"macro_rtog", rec.macro_rtog}};
        out << line.dump() << "\n";
    }
    nlohmann::json sum = summary_to_json(trace.summary);
    sum["type"] = "summary";
    out << sum.dump() << "\n";
}

SimTrace load_trace_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("trace: cannot open " + path.string());
    SimTrace trace;
    bool have_summary = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("trace: " + path.string() + ":" + std::to_string(lineno) + ": " +
                             e.what());
        }
        const std::string type = doc.value("type", "");
        if (type == "cycle") {
            CycleRecord rec;
            rec.cycle = doc.at("cycle").get<long>();
            rec.energy = doc.at("energy").get<double>();
            rec.stalled_sets = doc.at("stalled_sets").get<std::vector<int>>();
            rec.macro_rtog = doc.at("macro_rtog").get<std::vector<double>>();
            for (const auto& g : doc.at("groups")) {
                GroupCycleRecord gr;
                gr.level = g.at("level").get<int>();
                gr.a_level = g.at("a_level").get<int>();
                gr.safe_counter = g.at("safe_counter").get<long>();
                gr.pair = pair_from_json(g.at("pair"));
                gr.rtog = g.at("rtog").get<double>();
                gr.supply = g.at("supply").get<double>();
                gr.failure = g.at("failure").get<bool>();
                rec.groups.push_back(gr);
            }
            trace.records.push_back(std::move(rec));
        } else if (type == "event") {
            ControllerLogEntry e;
            e.cycle = doc.at("cycle").get<long>();
            e.group = doc.at("group").get<int>();
            e.event = doc.at("event").get<std::string>();
            e.level = doc.at("level").get<int>();
            e.a_level = doc.at("a_level").get<int>();
            e.safe_counter = doc.at("safe_counter").get<long>();
            e.pair = pair_from_json(doc.at("pair"));
            trace.controller_log.push_back(std::move(e));
        } else if (type == "summary") {
            trace.summary = summary_from_json(doc);
            have_summary = true;
        } else {
            throw ParseError("trace: " + path.string() + ":" + std::to_string(lineno) +
                             ": unknown record type '" + type + "'");
        }
    }
    if (!have_summary) throw ParseError("trace: " + path.string() + " has no summary record");
    return trace;
}

namespace {

double percentile(std::vector<double> xs, double p) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const double idx = p * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(idx);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = idx - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

std::vector<double> monitored_drops(const SimTrace& t) {
    std::vector<double> drops;
    for (const auto& rec : t.records)
        for (const auto& g : rec.groups)
            if (g.rtog > 0.0 || g.failure) drops.push_back(g.pair.voltage - g.supply);
    return drops;
}

nlohmann::json delta(double a, double b) {
    return nlohmann::json{{"a", a}, {"b", b}, {"delta", b - a}};
}

}  // namespace

nlohmann::json compare_runs(const SimTrace& a, const SimTrace& b) {
    if (a.summary.workload_fingerprint != b.summary.workload_fingerprint)
        throw ValidationError("compare_runs: traces come from different workloads");
    nlohmann::json out;
    out["max_ir_drop"] = delta(a.summary.max_ir_drop, b.summary.max_ir_drop);
    out["mean_rtog"] = delta(a.summary.mean_rtog, b.summary.mean_rtog);
    out["energy"] = delta(a.summary.energy, b.summary.energy);
    out["wall_time"] = delta(a.summary.wall_time, b.summary.wall_time);
    out["effective_tops"] = delta(a.summary.effective_tops, b.summary.effective_tops);
    out["failure_count"] = delta(static_cast<double>(a.summary.failure_count),
                                 static_cast<double>(b.summary.failure_count));
    out["total_cycles"] = delta(static_cast<double>(a.summary.total_cycles),
                                static_cast<double>(b.summary.total_cycles));
    const auto da = monitored_drops(a);
    const auto db = monitored_drops(b);
    out["ir_drop_p50"] = delta(percentile(da, 0.5), percentile(db, 0.5));
    out["ir_drop_p95"] = delta(percentile(da, 0.95), percentile(db, 0.95));
    return out;
}

void write_trace_csv(const SimTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw SimError("trace: cannot write " + path.string());
    out << "cycle,group,level,a_level,safe_counter,voltage,frequency,rtog,supply,failure,"
           "stalled_sets,energy_cycle\n";
    for (const auto& rec : trace.records) {
        std::string stalled;
        for (std::size_t i = 0; i < rec.stalled_sets.size(); ++i) {
            if (i) stalled += ';';
            stalled += std::to_string(rec.stalled_sets[i]);
        }
        for (std::size_t g = 0; g < rec.groups.size(); ++g) {
            const auto& gr = rec.groups[g];
            out << rec.cycle << ',' << g << ',' << gr.level << ',' << gr.a_level << ','
                << gr.safe_counter << ',' << gr.pair.voltage << ',' << gr.pair.frequency << ','
                << gr.rtog << ',' << gr.supply << ',' << (gr.failure ? 1 : 0) << ',' << stalled
                << ',' << rec.energy << "\n";
        }
    }
}

}  // namespace aimsim
