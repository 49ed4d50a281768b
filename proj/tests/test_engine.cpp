#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "aimsim/engine.hpp"
#include "aimsim/errors.hpp"
#include "aimsim/tasks.hpp"

using namespace aimsim;
namespace fs = std::filesystem;

namespace {

ChipTopology engine_topo(int groups, int per_group, int banks, int cells) {
    ChipTopology t;
    t.n_groups = groups;
    t.macros_per_group = per_group;
    t.banks_per_macro = banks;
    t.cells_per_bank = cells;
    t.q = 8;
    t.beta = 100;
    t.vf_table = default_vf_table(t.vdd_nominal, t.v_fail_threshold, t.ir_coeffs);
    return t;
}

Operator ws_operator(const std::string& name, const ChipTopology& topo,
                     const std::vector<std::int32_t>& tile_values, int vectors) {
    Operator op;
    op.name = name;
    op.kind = OperatorKind::WeightStationary;
    QuantizedTensor t;
    t.shape = {static_cast<std::size_t>(topo.banks_per_macro),
               static_cast<std::size_t>(topo.cells_per_bank)};
    t.q = topo.q;
    t.values = tile_values;
    op.weight = std::move(t);
    op.tiles = {{0, static_cast<std::size_t>(topo.banks_per_macro), 0,
                 static_cast<std::size_t>(topo.cells_per_bank)}};
    op.input_vectors = vectors;
    return op;
}

Operator id_operator(const std::string& name, const ChipTopology& topo, int vectors) {
    Operator op;
    op.name = name;
    op.kind = OperatorKind::InputDetermined;
    op.runtime_rows = static_cast<std::size_t>(topo.banks_per_macro);
    op.runtime_cols = static_cast<std::size_t>(topo.cells_per_bank);
    op.tiles = {{0, op.runtime_rows, 0, op.runtime_cols}};
    op.input_vectors = vectors;
    return op;
}

std::vector<std::int32_t> fill_values(const ChipTopology& topo, std::int32_t ones_value,
                                      double fraction) {
    const std::size_t n = topo.cells_per_macro();
    const auto k = static_cast<std::size_t>(fraction * static_cast<double>(n));
    std::vector<std::int32_t> v(n, 0);
    for (std::size_t i = 0; i < k; ++i) v[i] = ones_value;
    return v;
}

fs::path temp_file(const std::string& name) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("aimsim_engine_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("bit_serialize worked examples") {
    SUBCASE("constant stream toggles only while leaving the quiescent state") {
        QuantizedTensor in;
        in.shape = {1, 3};
        in.q = 4;
        in.values = {7, 7, 7};
        const auto frames = bit_serialize(in);
        REQUIRE(frames.size() == 12);
        // First vector against the all-zero state: planes of 7 = 1,1,1,0.
        CHECK(frames[0][0] == 1);
        CHECK(frames[1][0] == 1);
        CHECK(frames[2][0] == 1);
        CHECK(frames[3][0] == 0);
        for (std::size_t i = 4; i < 12; ++i) CHECK(frames[i][0] == 0);
    }
    SUBCASE("alternating 0 and -1 toggles every line every cycle") {
        QuantizedTensor in;
        in.shape = {2, 4};
        in.q = 4;
        in.values = {-1, 0, -1, 0,   // cell 0 over 4 vectors
                     -1, 0, -1, 0};  // cell 1
        const auto frames = bit_serialize(in);
        REQUIRE(frames.size() == 16);
        for (const auto& f : frames)
            for (auto b : f) CHECK(b == 1);
    }
    SUBCASE("5 then 3 toggles exactly the bits of 5 xor 3") {
        QuantizedTensor in;
        in.shape = {1, 2};
        in.q = 4;
        in.values = {5, 3};
        const auto frames = bit_serialize(in);
        REQUIRE(frames.size() == 8);
        // First pass: planes of 5 (101): bits 0 and 2 toggle in from zero.
        CHECK(frames[0][0] == 1);
        CHECK(frames[1][0] == 0);
        CHECK(frames[2][0] == 1);
        CHECK(frames[3][0] == 0);
        // Second pass: 5 xor 3 = 6 (0110): bits 1 and 2.
        CHECK(frames[4][0] == 0);
        CHECK(frames[5][0] == 1);
        CHECK(frames[6][0] == 1);
        CHECK(frames[7][0] == 0);
    }
}

TEST_CASE("simulate: all-zero weights cost leakage only") {
    const ChipTopology topo = engine_topo(1, 1, 2, 4);
    Workload w;
    w.operators = {ws_operator("zero", topo, std::vector<std::int32_t>(8, 0), 3)};
    TaskMapping m;
    m.assignment = {0};
    EngineOptions opts;
    opts.seed = 5;
    const SimTrace trace = simulate(topo, w, m, opts);

    CHECK(trace.summary.total_cycles == 24);  // 3 vectors * q
    CHECK(trace.summary.failure_count == 0);
    for (const auto& rec : trace.records) {
        CHECK(rec.macro_rtog[0] == 0.0);
        CHECK(rec.groups[0].rtog == 0.0);
    }
    // HR 0 -> safe 20 -> low-power pair at 1 GHz; leakage only.
    const double leak_per_cycle = topo.energy.p_leak / 1.0e9;
    CHECK(trace.summary.energy == doctest::Approx(24 * leak_per_cycle).epsilon(1e-12));
    double acc = 0.0;
    for (const auto& rec : trace.records) acc += rec.energy;
    CHECK(acc == trace.summary.energy);  // exact accounting
}

TEST_CASE("simulate: saturated weights with bursty input fail fast and snap to safe") {
    const ChipTopology topo = engine_topo(1, 1, 4, 32);
    Workload w;
    w.operators = {id_operator("attn", topo, 8)};
    TaskMapping m;
    m.assignment = {0};
    EngineOptions opts;
    opts.seed = 11;
    opts.mode = BoosterMode::LowPower;
    const SimTrace trace = simulate(topo, w, m, opts);

    // Runtime data is hot; the first all-toggle frame of the burst exceeds
    // the aggressive level's cap.
    const auto tasks = materialize_tasks(w, topo, opts.seed);
    REQUIRE(tasks[0].hr > 0.6);
    CHECK(trace.summary.failure_count >= 1);
    CHECK(trace.summary.recompute_cycles >= topo.q + topo.pair_switch_latency);

    // Find the first failure cycle: level snaps to the DVFS fallback with the
    // nominal pair, and the set stalls afterwards.
    long fail_cycle = -1;
    for (const auto& rec : trace.records) {
        if (rec.groups[0].failure) {
            fail_cycle = rec.cycle;
            CHECK(rec.groups[0].level == 100);
            CHECK(rec.groups[0].pair.voltage == doctest::Approx(0.75));
            break;
        }
    }
    REQUIRE(fail_cycle >= 0);
    // The burst vector puts the same pattern on every line, so its even bit
    // planes toggle every cell at once: the very first plane already trips.
    CHECK(fail_cycle == 0);
    CHECK(trace.records[static_cast<std::size_t>(fail_cycle) + 1].stalled_sets ==
          std::vector<int>{0});
    // A controller log entry recorded the event.
    bool logged = false;
    for (const auto& e : trace.controller_log)
        if (e.event == "failure" && e.cycle == fail_cycle) logged = true;
    CHECK(logged);
}

TEST_CASE("simulate: aggressive low-power run never spends more than safe-only") {
    const ChipTopology topo = engine_topo(2, 2, 2, 32);
    const double hr = 0.34;
    Workload w;
    w.operators = {ws_operator("a", topo, fill_values(topo, -1, hr), 16),
                   ws_operator("b", topo, fill_values(topo, -1, hr), 16)};
    TaskMapping m;
    m.assignment = {0, kEmptyMacro, 1, kEmptyMacro};

    EngineOptions aggressive;
    aggressive.seed = 21;
    aggressive.booster_aggressive = true;
    const SimTrace t_aggr = simulate(topo, w, m, aggressive);

    EngineOptions safe = aggressive;
    safe.booster_aggressive = false;
    const SimTrace t_safe = simulate(topo, w, m, safe);

    CHECK(t_aggr.summary.failure_count == 0);
    CHECK(t_safe.summary.failure_count == 0);
    CHECK(t_aggr.summary.total_cycles == t_safe.summary.total_cycles);
    CHECK(t_aggr.summary.energy <= t_safe.summary.energy);
    CHECK(t_aggr.summary.energy < t_safe.summary.energy);  // strictly: lower voltage all run
}

TEST_CASE("simulate: per-cycle macro rtog never exceeds the task HR") {
    const ChipTopology topo = engine_topo(2, 1, 2, 16);
    Workload w;
    w.operators = {ws_operator("a", topo, fill_values(topo, -1, 0.4), 6),
                   id_operator("attn", topo, 6)};
    TaskMapping m;
    m.assignment = {0, 1};
    EngineOptions opts;
    opts.seed = 9;
    const SimTrace trace = simulate(topo, w, m, opts);
    const auto tasks = materialize_tasks(w, topo, opts.seed);
    for (const auto& rec : trace.records)
        for (std::size_t mac = 0; mac < rec.macro_rtog.size(); ++mac) {
            const int task = m.assignment[mac];
            if (task == kEmptyMacro) continue;
            CHECK(rec.macro_rtog[mac] <= tasks[static_cast<std::size_t>(task)].hr + 1e-12);
        }
}

TEST_CASE("simulate: failures in one set leave disjoint sets bit-identical") {
    const ChipTopology topo = engine_topo(2, 1, 4, 32);
    const int vectors = 8;
    Workload hot;
    hot.operators = {id_operator("attn", topo, vectors),
                     ws_operator("b", topo, fill_values(topo, -1, 0.3), vectors)};
    Workload cold;
    cold.operators = {ws_operator("attn", topo, std::vector<std::int32_t>(topo.cells_per_macro(), 0),
                                  vectors),
                      ws_operator("b", topo, fill_values(topo, -1, 0.3), vectors)};
    TaskMapping m;
    m.assignment = {0, 1};
    EngineOptions opts;
    opts.seed = 11;

    const SimTrace t_hot = simulate(topo, hot, m, opts);
    const SimTrace t_cold = simulate(topo, cold, m, opts);
    REQUIRE(t_hot.summary.failure_count >= 1);
    REQUIRE(t_cold.summary.failure_count == 0);
    CHECK(t_hot.summary.total_cycles > t_cold.summary.total_cycles);

    const long n = std::min(t_hot.summary.total_cycles, t_cold.summary.total_cycles);
    for (long t = 0; t < n; ++t) {
        const auto& a = t_hot.records[static_cast<std::size_t>(t)];
        const auto& b = t_cold.records[static_cast<std::size_t>(t)];
        CHECK(a.macro_rtog[1] == b.macro_rtog[1]);
        CHECK(a.groups[1].level == b.groups[1].level);
        CHECK(a.groups[1].pair == b.groups[1].pair);
        CHECK(a.groups[1].supply == b.groups[1].supply);
        CHECK(a.groups[1].failure == b.groups[1].failure);
        // Only the hot set ever stalls.
        for (int s : a.stalled_sets) CHECK(s == 0);
    }
}

TEST_CASE("simulate: deterministic and byte-identical for a fixed seed") {
    const ChipTopology topo = engine_topo(2, 2, 2, 16);
    Workload w;
    w.operators = {ws_operator("a", topo, fill_values(topo, -1, 0.35), 8),
                   id_operator("attn", topo, 8)};
    TaskMapping m;
    m.assignment = {0, kEmptyMacro, 1, kEmptyMacro};
    EngineOptions opts;
    opts.seed = 31;

    const SimTrace t1 = simulate(topo, w, m, opts);
    const SimTrace t2 = simulate(topo, w, m, opts);
    const fs::path f1 = temp_file("a.jsonl");
    const fs::path f2 = temp_file("b.jsonl");
    write_trace_jsonl(t1, f1);
    write_trace_jsonl(t2, f2);
    std::ifstream s1(f1), s2(f2);
    std::stringstream b1, b2;
    b1 << s1.rdbuf();
    b2 << s2.rdbuf();
    CHECK(b1.str() == b2.str());
    CHECK(!b1.str().empty());
}

TEST_CASE("simulate: raising weight bits never lowers the peak estimated drop") {
    const ChipTopology topo = engine_topo(1, 1, 2, 16);
    Workload zeros;
    zeros.operators = {
        ws_operator("a", topo, std::vector<std::int32_t>(topo.cells_per_macro(), 0), 6)};
    Workload ones;
    ones.operators = {
        ws_operator("a", topo, std::vector<std::int32_t>(topo.cells_per_macro(), 1), 6)};
    TaskMapping m;
    m.assignment = {0};
    EngineOptions opts;
    opts.seed = 17;
    const SimTrace t0 = simulate(topo, zeros, m, opts);
    const SimTrace t1 = simulate(topo, ones, m, opts);
    CHECK(t0.summary.max_ir_drop == doctest::Approx(topo.ir_coeffs.static_drop));
    CHECK(t1.summary.max_ir_drop > t0.summary.max_ir_drop);
}

TEST_CASE("simulate: trace round trip and ablation report") {
    const ChipTopology topo = engine_topo(1, 2, 2, 8);
    Workload w;
    w.operators = {ws_operator("a", topo, fill_values(topo, -1, 0.3), 4)};
    TaskMapping m;
    m.assignment = {0, kEmptyMacro};
    EngineOptions opts;
    opts.seed = 3;
    const SimTrace t = simulate(topo, w, m, opts);
    const fs::path f = temp_file("t.jsonl");
    write_trace_jsonl(t, f);
    const SimTrace back = load_trace_jsonl(f);
    CHECK(back.records.size() == t.records.size());
    CHECK(summary_to_json(back.summary) == summary_to_json(t.summary));

    SUBCASE("identical traces compare to all-zero deltas") {
        const nlohmann::json cmp = compare_runs(t, back);
        for (const auto& [key, val] : cmp.items()) {
            INFO(key);
            CHECK(val["delta"].get<double>() == 0.0);
        }
    }
    SUBCASE("different workloads refuse to compare") {
        SimTrace other = t;
        other.summary.workload_fingerprint = "something-else";
        CHECK_THROWS_AS(compare_runs(t, other), ValidationError);
    }
}

TEST_CASE("simulate: sprint failure at the DVFS fallback drops frequency and syncs the set") {
    // One input-determined operator spanning two groups: sprint starts the
    // whole set at 1.4 GHz, but the safe level only offers the nominal pair,
    // so the first failure forces a set-wide frequency drop. The table keeps
    // a slim timing margin so burst toggles overrun the aggressive cap.
    ChipTopology topo = engine_topo(2, 1, 4, 32);
    topo.vf_table.levels.clear();
    for (int cap = 20; cap <= 60; cap += 5) {
        const double v_min = topo.v_fail_threshold + topo.ir_coeffs.static_drop +
                             topo.ir_coeffs.dynamic_slope * cap / 100.0;
        topo.vf_table.levels.push_back(
            {cap, {{v_min, 1.0e9}, {v_min + 0.002, 1.2e9}, {v_min + 0.004, 1.4e9}}});
    }
    topo.vf_table.levels.push_back({100, {{topo.vdd_nominal, 1.0e9}}});
    topo.validate();
    Workload w;
    Operator op = id_operator("attn", topo, 8);
    op.runtime_rows = static_cast<std::size_t>(topo.banks_per_macro) * 2;
    op.tiles = {{0, static_cast<std::size_t>(topo.banks_per_macro), 0,
                 static_cast<std::size_t>(topo.cells_per_bank)},
                {static_cast<std::size_t>(topo.banks_per_macro),
                 static_cast<std::size_t>(topo.banks_per_macro) * 2, 0,
                 static_cast<std::size_t>(topo.cells_per_bank)}};
    w.operators = {op};
    TaskMapping m;
    m.assignment = {0, 1};
    EngineOptions opts;
    opts.seed = 11;
    opts.mode = BoosterMode::Sprint;
    const SimTrace trace = simulate(topo, w, m, opts);

    REQUIRE(trace.summary.failure_count >= 1);
    // Cycle records reflect end-of-cycle state, so the very first burst plane
    // already shows the dropped pair; the event log carries the transition.
    bool failed = false;
    bool synced = false;
    for (const auto& e : trace.controller_log) {
        if (e.event == "failure") {
            failed = true;
            CHECK(e.level == 100);
            CHECK(e.pair.frequency == 1.0e9);  // kept frequency was impossible at 100
        }
        if (e.event == "freq_sync") {
            synced = true;
            CHECK(e.level == 100);
            CHECK(e.safe_counter == 0);
            CHECK(e.pair.frequency == 1.0e9);
        }
    }
    CHECK(failed);
    CHECK(synced);
    // From the failure on, both groups run the nominal pair.
    CHECK(trace.records.back().groups[0].pair.frequency == 1.0e9);
    CHECK(trace.records.back().groups[1].pair.frequency == 1.0e9);
    CHECK(trace.records.back().groups[0].pair.voltage == doctest::Approx(0.75));
}

TEST_CASE("input-determined operands derive from the preceding operator's outputs") {
    const ChipTopology topo = engine_topo(2, 1, 2, 8);
    const int vectors = 8;
    Workload w1;
    w1.operators = {ws_operator("a", topo, fill_values(topo, -1, 0.5), vectors),
                    id_operator("qk", topo, vectors)};
    Workload w2 = w1;
    w2.operators[0].weight->values = fill_values(topo, 3, 0.5);  // different upstream weights

    const auto t1 = materialize_tasks(w1, topo, 42);
    const auto t1_again = materialize_tasks(w1, topo, 42);
    const auto t2 = materialize_tasks(w2, topo, 42);
    CHECK(t1[1].weights == t1_again[1].weights);  // deterministic
    CHECK(t1[1].weights != t2[1].weights);        // responds to the upstream operator

    // A leading input-determined operator has no predecessor: synthetic
    // runtime data, still deterministic.
    Workload w3;
    w3.operators = {id_operator("qk", topo, vectors)};
    const auto t3 = materialize_tasks(w3, topo, 42);
    CHECK(t3[0].weights == materialize_tasks(w3, topo, 42)[0].weights);
    CHECK(t3[0].hr > 0.0);
}

TEST_CASE("simulate: parallel metric evaluation matches the sequential path") {
    const ChipTopology topo = engine_topo(8, 8, 2, 16);  // enough macros to engage the pool
    Workload w;
    Operator op = ws_operator("a", topo, fill_values(topo, -1, 0.4), 6);
    // Spread the operator over all 64 macros.
    QuantizedTensor big;
    big.shape = {static_cast<std::size_t>(topo.banks_per_macro) * 64,
                 static_cast<std::size_t>(topo.cells_per_bank)};
    big.q = 8;
    for (int i = 0; i < 64; ++i) {
        const auto tile = fill_values(topo, -1, 0.4);
        big.values.insert(big.values.end(), tile.begin(), tile.end());
    }
    op.weight = std::move(big);
    op.tiles.clear();
    for (std::size_t r = 0; r < 64; ++r)
        op.tiles.push_back({r * topo.banks_per_macro, (r + 1) * topo.banks_per_macro, 0,
                            static_cast<std::size_t>(topo.cells_per_bank)});
    w.operators = {op};
    TaskMapping m = sequential_map(w, topo);

    EngineOptions seq;
    seq.seed = 13;
    seq.threads = 1;
    EngineOptions par = seq;
    par.threads = 4;
    const SimTrace a = simulate(topo, w, m, seq);
    const SimTrace b = simulate(topo, w, m, par);
    CHECK(summary_to_json(a.summary) == summary_to_json(b.summary));
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i)
        CHECK(a.records[i].macro_rtog == b.records[i].macro_rtog);
}

TEST_CASE("simulate: randomized configurations keep the cross-module invariants") {
    Rng meta(20250401);
    for (int trial = 0; trial < 25; ++trial) {
        ChipTopology topo;
        topo.n_groups = 2 + static_cast<int>(meta.uniform_below(4));
        topo.macros_per_group = 1 + static_cast<int>(meta.uniform_below(3));
        topo.banks_per_macro = 1 + static_cast<int>(meta.uniform_below(4));
        topo.cells_per_bank = 4 + static_cast<int>(meta.uniform_below(29));
        topo.q = meta.uniform() < 0.3 ? 4 : 8;
        topo.beta = 10 + static_cast<int>(meta.uniform_below(100));
        topo.pair_switch_latency = static_cast<int>(meta.uniform_below(12));
        topo.vf_table = default_vf_table(topo.vdd_nominal, topo.v_fail_threshold, topo.ir_coeffs);
        topo.validate();

        Workload w;
        const int n_ops = 1 + static_cast<int>(meta.uniform_below(3));
        const std::size_t n = topo.cells_per_macro();
        int tiles_left = topo.n_macros();
        for (int oi = 0; oi < n_ops && tiles_left > 0; ++oi) {
            const int tiles = 1 + static_cast<int>(meta.uniform_below(
                                      static_cast<std::uint64_t>(std::min(3, tiles_left))));
            tiles_left -= tiles;
            Operator op;
            op.name = "op" + std::to_string(oi);
            op.input_vectors = 2 + static_cast<int>(meta.uniform_below(6));
            if (meta.uniform() < 0.3) {
                op.kind = OperatorKind::InputDetermined;
                op.runtime_rows = static_cast<std::size_t>(topo.banks_per_macro) * tiles;
                op.runtime_cols = static_cast<std::size_t>(topo.cells_per_bank);
            } else {
                QuantizedTensor t;
                t.shape = {static_cast<std::size_t>(topo.banks_per_macro) * tiles,
                           static_cast<std::size_t>(topo.cells_per_bank)};
                t.q = topo.q;
                const std::int32_t lo = int_min_for(topo.q);
                const std::int32_t span = 1 << topo.q;
                for (std::size_t k = 0; k < n * tiles; ++k)
                    t.values.push_back(lo + static_cast<std::int32_t>(meta.uniform_below(span)));
                op.weight = std::move(t);
            }
            for (int ti = 0; ti < tiles; ++ti)
                op.tiles.push_back({static_cast<std::size_t>(ti) * topo.banks_per_macro,
                                    static_cast<std::size_t>(ti + 1) * topo.banks_per_macro, 0,
                                    static_cast<std::size_t>(topo.cells_per_bank)});
            w.operators.push_back(std::move(op));
        }
        w.validate();

        EngineOptions opts;
        opts.seed = meta.next_u64();
        opts.mode = meta.uniform() < 0.5 ? BoosterMode::Sprint : BoosterMode::LowPower;
        opts.booster_aggressive = meta.uniform() < 0.8;
        const TaskMapping m = sequential_map(w, topo);
        const SimTrace trace = simulate(topo, w, m, opts);

        INFO("trial ", trial);
        // Energy accounting is exact, per-bank rates respect the HR bound,
        // cycles are contiguous, and a stall implies a prior failure.
        double acc = 0.0;
        const auto tasks = materialize_tasks(w, topo, opts.seed);
        long stall_records = 0;
        for (std::size_t t = 0; t < trace.records.size(); ++t) {
            const auto& rec = trace.records[t];
            CHECK(rec.cycle == static_cast<long>(t));
            acc += rec.energy;
            stall_records += static_cast<long>(rec.stalled_sets.size());
            for (std::size_t mac = 0; mac < rec.macro_rtog.size(); ++mac) {
                const int task = m.assignment[mac];
                if (task != kEmptyMacro)
                    CHECK(rec.macro_rtog[mac] <=
                          tasks[static_cast<std::size_t>(task)].hr + 1e-12);
            }
        }
        CHECK(acc == trace.summary.energy);
        if (trace.summary.failure_count == 0) CHECK(stall_records == 0);
        if (stall_records > 0) CHECK(trace.summary.failure_count > 0);
        CHECK(trace.summary.total_cycles == static_cast<long>(trace.records.size()));
        CHECK(trace.summary.wall_time > 0.0);
    }
}

TEST_CASE("simulate: input validation") {
    const ChipTopology topo = engine_topo(1, 2, 2, 8);
    Workload w;
    w.operators = {ws_operator("a", topo, fill_values(topo, -1, 0.3), 4)};
    SUBCASE("incomplete mapping") {
        TaskMapping m;
        m.assignment = {kEmptyMacro, kEmptyMacro};
        CHECK_THROWS_AS(simulate(topo, w, m, {}), ValidationError);
    }
    SUBCASE("tile geometry must match the macro") {
        ChipTopology narrow = topo;
        narrow.cells_per_bank = 4;
        TaskMapping m;
        m.assignment = {0, kEmptyMacro};
        CHECK_THROWS_AS(simulate(narrow, w, m, {}), ValidationError);
    }
}
