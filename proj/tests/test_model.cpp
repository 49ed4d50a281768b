#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "aimsim/errors.hpp"
#include "aimsim/rng.hpp"
#include "aimsim/tensor.hpp"
#include "aimsim/topology.hpp"
#include "aimsim/workload.hpp"

using namespace aimsim;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / ("aimsim_model_" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("tensor invariants") {
    QuantizedTensor t;
    t.shape = {2, 2};
    t.q = 8;
    t.scale = 0.05;
    t.values = {1, -1, 0, 127};
    CHECK_NOTHROW(t.validate());

    SUBCASE("out-of-range value for q") {
        t.values = {1, -1, 0, 200};
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
    SUBCASE("length mismatch") {
        t.values = {1, -1, 0};
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
    SUBCASE("non-positive scale") {
        t.scale = 0.0;
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
    SUBCASE("q=4 range") {
        t.q = 4;
        t.values = {7, -8, 0, 1};
        CHECK_NOTHROW(t.validate());
        t.values = {8, 0, 0, 0};
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
}

TEST_CASE("tensor json and binary round trips") {
    QuantizedTensor t;
    t.shape = {2, 2};
    t.q = 8;
    t.scale = 0.5;
    t.values = {1, -1, 0, 127};

    SUBCASE("inline json") {
        const QuantizedTensor back = tensor_from_json(tensor_to_json(t), ".");
        CHECK(back.values == t.values);
        CHECK(back.shape == t.shape);
        CHECK(back.scale == doctest::Approx(t.scale));
    }
    SUBCASE("binary sidecar, q=8") {
        const fs::path dir = temp_dir();
        save_tensor_binary(t, dir / "t.json");
        const QuantizedTensor back = load_tensor(dir / "t.json");
        CHECK(back.values == t.values);
    }
    SUBCASE("binary sidecar, q=16 uses int16") {
        QuantizedTensor wide = t;
        wide.q = 16;
        wide.values = {300, -300, 0, 32767};
        const fs::path dir = temp_dir();
        save_tensor_binary(wide, dir / "w.json");
        const QuantizedTensor back = load_tensor(dir / "w.json");
        CHECK(back.values == wide.values);
    }
    SUBCASE("payload length mismatch") {
        const fs::path dir = temp_dir();
        save_tensor_binary(t, dir / "t.json");
        // Truncate the binary payload to 3 values.
        std::ofstream bin(dir / "t.bin", std::ios::binary | std::ios::trunc);
        const char bytes[3] = {1, 2, 3};
        bin.write(bytes, 3);
        bin.close();
        CHECK_THROWS_AS(load_tensor(dir / "t.json"), ValidationError);
    }
    SUBCASE("inline value out of range") {
        nlohmann::json doc = tensor_to_json(t);
        doc["values"][0] = 200;
        CHECK_THROWS_AS(tensor_from_json(doc, "."), ValidationError);
    }
}

TEST_CASE("topology: minimal document uses the default vf table") {
    nlohmann::json doc{{"n_groups", 1}, {"macros_per_group", 1}, {"banks_per_macro", 1},
                       {"cells_per_bank", 8}, {"q", 8}};
    const ChipTopology t = topology_from_json(doc);
    CHECK(t.cells_per_bank == 8);
    CHECK(t.n_macros() == 1);
    CHECK(t.vf_table.has_level(100));
    CHECK(t.vf_table.has_level(20));
    CHECK(t.vf_table.has_level(60));
    // 20..60 in 5% steps plus the fallback.
    CHECK(t.vf_table.levels.size() == 10);
}

TEST_CASE("topology: threshold must sit below nominal vdd") {
    nlohmann::json doc{{"n_groups", 1}, {"macros_per_group", 1}, {"cells_per_bank", 8},
                       {"v_fail_threshold", 0.8}, {"vdd_nominal", 0.75}};
    CHECK_THROWS_AS(topology_from_json(doc), ValidationError);
}

TEST_CASE("topology: 16 groups x 4 macros gives 64 macros") {
    nlohmann::json doc{{"n_groups", 16}, {"macros_per_group", 4}, {"cells_per_bank", 32}};
    const ChipTopology t = topology_from_json(doc);
    CHECK(t.n_macros() == 64);
    CHECK(t.banks_per_macro == 32);  // default bank count
}

TEST_CASE("topology: schema violations name the field") {
    CHECK_THROWS_WITH_AS(topology_from_json(nlohmann::json{{"macros_per_group", 1}}),
                         doctest::Contains("n_groups"), ParseError);
    nlohmann::json bad{{"n_groups", 1}, {"macros_per_group", 1}, {"cells_per_bank", "many"}};
    CHECK_THROWS_AS(topology_from_json(bad), ParseError);
}

TEST_CASE("topology round trip is semantically identity (property)") {
    Rng rng(2024);
    for (int i = 0; i < 50; ++i) {
        nlohmann::json doc;
        doc["n_groups"] = 1 + static_cast<int>(rng.uniform_below(16));
        doc["macros_per_group"] = 1 + static_cast<int>(rng.uniform_below(8));
        doc["banks_per_macro"] = 1 + static_cast<int>(rng.uniform_below(32));
        doc["cells_per_bank"] = 1 + static_cast<int>(rng.uniform_below(64));
        doc["q"] = rng.uniform() < 0.5 ? 4 : 8;
        doc["beta"] = 1 + static_cast<int>(rng.uniform_below(300));
        doc["pair_switch_latency"] = static_cast<int>(rng.uniform_below(20));
        const ChipTopology t = topology_from_json(doc);
        const nlohmann::json full = topology_to_json(t);
        const ChipTopology t2 = topology_from_json(full);
        CHECK(topology_to_json(t2) == full);
    }
}

TEST_CASE("vf table invariants") {
    VfTable t;
    SUBCASE("caps strictly increasing") {
        t.levels = {{30, {{0.7, 1e9}}}, {30, {{0.7, 1e9}}}, {100, {{0.75, 1e9}}}};
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
    SUBCASE("100 must be present") {
        t.levels = {{20, {{0.65, 1e9}}}, {60, {{0.70, 1e9}}}};
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
    SUBCASE("pairs sorted by ascending frequency") {
        t.levels = {{20, {{0.65, 1.2e9}, {0.66, 1.0e9}}}, {100, {{0.75, 1e9}}}};
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
    SUBCASE("monotonic safety across levels") {
        t.levels = {{20, {{0.70, 1e9}}}, {60, {{0.65, 1e9}}}, {100, {{0.75, 1e9}}}};
        CHECK_THROWS_AS(t.validate(), ValidationError);
    }
    SUBCASE("default table is valid and calibrated at the threshold") {
        const IrCoefficients coeffs;
        const VfTable table = default_vf_table(0.75, 0.61, coeffs);
        CHECK_NOTHROW(table.validate());
        // Lowest-voltage pair of each level sits exactly at the failure
        // threshold when rtog equals the cap (modulo rounding).
        for (const auto& lvl : table.levels) {
            if (lvl.rtog_cap == 100) continue;
            const double supply = lvl.pairs.front().voltage -
                                  (coeffs.static_drop + coeffs.dynamic_slope * lvl.rtog_cap / 100.0);
            CHECK(supply == doctest::Approx(0.61).epsilon(1e-12));
        }
    }
}

namespace {

Workload two_op_workload() {
    Workload w;
    Operator a;
    a.name = "conv";
    a.kind = OperatorKind::WeightStationary;
    QuantizedTensor t;
    t.shape = {2, 4};
    t.q = 8;
    t.values = {1, 2, 3, 4, 5, 6, 7, 8};
    a.weight = t;
    a.tiles = {{0, 1, 0, 4}, {1, 2, 0, 4}};
    a.input_vectors = 4;
    Operator b;
    b.name = "attn";
    b.kind = OperatorKind::InputDetermined;
    b.runtime_rows = 1;
    b.runtime_cols = 4;
    b.tiles = {{0, 1, 0, 4}};
    b.input_vectors = 4;
    w.operators = {a, b};
    return w;
}

}  // namespace

TEST_CASE("workload validation") {
    Workload w = two_op_workload();
    CHECK_NOTHROW(w.validate());
    CHECK(w.task_count() == 3);
    CHECK(w.task_name(2) == "attn/0");
    CHECK(w.task_by_name("conv/1") == 1);

    SUBCASE("weight-stationary operator must reference a tensor") {
        w.operators[0].weight.reset();
        CHECK_THROWS_AS(w.validate(), ValidationError);
    }
    SUBCASE("input-determined operator must not") {
        w.operators[1].weight = w.operators[0].weight;
        CHECK_THROWS_AS(w.validate(), ValidationError);
    }
    SUBCASE("tiles must not overlap") {
        w.operators[0].tiles = {{0, 2, 0, 4}, {1, 2, 0, 4}};
        CHECK_THROWS_AS(w.validate(), ValidationError);
    }
    SUBCASE("tiles must cover the matrix") {
        w.operators[0].tiles = {{0, 1, 0, 4}};
        CHECK_THROWS_AS(w.validate(), ValidationError);
    }
    SUBCASE("tiles must stay in bounds") {
        w.operators[0].tiles = {{0, 1, 0, 4}, {1, 3, 0, 4}};
        CHECK_THROWS_AS(w.validate(), ValidationError);
    }
}

TEST_CASE("workload json round trip") {
    const Workload w = two_op_workload();
    const Workload back = workload_from_json(workload_to_json(w), ".");
    CHECK(workload_to_json(back) == workload_to_json(w));
}

TEST_CASE("task mapping validity is O(#macros) and rejects duplicates") {
    const Workload w = two_op_workload();
    ChipTopology topo;
    topo.n_groups = 2;
    topo.macros_per_group = 2;
    topo.banks_per_macro = 1;
    topo.cells_per_bank = 4;
    topo.vf_table = default_vf_table(0.75, 0.61, {});

    TaskMapping m;
    m.assignment = {0, 1, 2, kEmptyMacro};
    CHECK_NOTHROW(m.validate(w, topo));
    CHECK(m.complete(w));

    SUBCASE("duplicate task") {
        m.assignment = {0, 0, 2, kEmptyMacro};
        CHECK_THROWS_AS(m.validate(w, topo), ValidationError);
    }
    SUBCASE("unknown task") {
        m.assignment = {0, 1, 2, 9};
        CHECK_THROWS_AS(m.validate(w, topo), ValidationError);
    }
    SUBCASE("size mismatch with topology") {
        m.assignment = {0, 1, 2};
        CHECK_THROWS_AS(m.validate(w, topo), ValidationError);
    }
    SUBCASE("sets derive per operator") {
        const auto sets = m.sets(w);
        CHECK(sets[0] == std::vector<int>{0, 1});
        CHECK(sets[1] == std::vector<int>{2});
    }
    SUBCASE("mapping json round trip with EMPTY") {
        const nlohmann::json doc = mapping_to_json(m, w);
        CHECK(doc["assignment"][3].is_null());
        const TaskMapping back = mapping_from_json(doc, w);
        CHECK(back.assignment == m.assignment);
    }
}
