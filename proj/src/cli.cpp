#include "aimsim/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "aimsim/engine.hpp"
#include "aimsim/errors.hpp"
#include "aimsim/lhr.hpp"
#include "aimsim/mapping.hpp"
#include "aimsim/metrics.hpp"
#include "aimsim/tasks.hpp"
#include "aimsim/wds.hpp"
#include "aimsim/workload.hpp"

namespace aimsim::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw ParseError(std::string(what) + ": cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": " + path.string() + ": " + e.what());
    }
    return doc;
}

void write_json_file(const fs::path& path, const json& doc) {
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw SimError("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

int thread_cap_from_env() {
    const char* env = std::getenv("AIM_SIM_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    const int hw = std::max(1u, std::thread::hardware_concurrency());
    if (v < 1) v = 1;
    if (v > hw) v = hw;
    return v;
}

RunManifest RunManifest::from_json(const json& doc, const fs::path& base_dir) {
    RunManifest m;
    if (!doc.contains("topology")) throw ParseError("manifest: missing field 'topology'");
    if (!doc.contains("workload")) throw ParseError("manifest: missing field 'workload'");
    if (!doc.contains("seed")) throw ParseError("manifest: missing field 'seed' (seeds are mandatory)");
    m.topology = base_dir / doc["topology"].get<std::string>();
    m.workload = base_dir / doc["workload"].get<std::string>();
    m.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("mapping")) m.mapping_path = base_dir / doc["mapping"].get<std::string>();
    m.strategy = doc.value("strategy", "anneal");
    m.mode = doc.value("mode", "low-power");
    m.out = base_dir / doc.value("out", "out");
    if (doc.contains("beta")) m.beta = doc["beta"].get<int>();
    if (doc.contains("toggles")) {
        const auto& t = doc["toggles"];
        if (t.contains("lhr")) {
            const auto& l = t["lhr"];
            if (l.is_boolean()) {
                m.lhr_enabled = l.get<bool>();
            } else if (l.is_object()) {
                m.lhr_enabled = true;
                m.lhr_lambda = l.value("lambda", m.lhr_lambda);
                m.lhr_steps = l.value("steps", m.lhr_steps);
                m.lhr_lr = l.value("lr", m.lhr_lr);
            } else {
                throw ParseError("manifest: toggles.lhr must be a boolean or an object");
            }
        }
        if (t.contains("wds")) {
            const auto& wd = t["wds"];
            if (wd.is_number_integer())
                m.wds_delta = wd.get<int>();
            else if (wd.is_boolean() && wd.get<bool>())
                m.wds_delta = 8;
            else if (!(wd.is_boolean() || (wd.is_string() && wd.get<std::string>() == "off")))
                throw ParseError("manifest: toggles.wds must be a delta, a boolean, or \"off\"");
        }
        if (t.contains("booster")) m.booster = t["booster"].get<std::string>();
    }
    m.validate();
    return m;
}

RunManifest RunManifest::load(const fs::path& path) {
    return from_json(read_json_file(path, "manifest"), path.parent_path());
}

void RunManifest::validate() const {
    if (!fs::exists(topology)) throw ValidationError("manifest: topology path does not exist: " + topology.string());
    if (!fs::exists(workload)) throw ValidationError("manifest: workload path does not exist: " + workload.string());
    if (mapping_path && !fs::exists(*mapping_path))
        throw ValidationError("manifest: mapping path does not exist: " + mapping_path->string());
    if (strategy != "anneal" && strategy != "sequential" && strategy != "zigzag")
        throw ValidationError("manifest: unknown strategy '" + strategy + "'");
    if (mode != "sprint" && mode != "low-power")
        throw ValidationError("manifest: mode must be 'sprint' or 'low-power'");
    if (booster != "aggressive" && booster != "safe-only")
        throw ValidationError("manifest: booster must be 'aggressive' or 'safe-only'");
    if (wds_delta && !is_power_of_two(*wds_delta))
        throw ValidationError("manifest: wds delta " + std::to_string(*wds_delta) +
                              " is not a power of two");
    if (beta && *beta < 1) throw ValidationError("manifest: beta must be >= 1");
}

namespace {

BoosterMode mode_of(const std::string& s) {
    return s == "sprint" ? BoosterMode::Sprint : BoosterMode::LowPower;
}

json tile_stats(const QuantizedTensor& t, std::size_t tile_rows, std::size_t tile_cols,
                double& hr_max) {
    const std::size_t R = t.rows();
    const std::size_t C = t.cols();
    if (tile_rows == 0 || tile_rows > R) tile_rows = R;
    if (tile_cols == 0 || tile_cols > C) tile_cols = C;
    json tiles = json::array();
    for (std::size_t r0 = 0; r0 < R; r0 += tile_rows) {
        const std::size_t r1 = std::min(R, r0 + tile_rows);
        for (std::size_t c0 = 0; c0 < C; c0 += tile_cols) {
            const std::size_t c1 = std::min(C, c0 + tile_cols);
            std::vector<std::int32_t> slice;
            slice.reserve((r1 - r0) * (c1 - c0));
            for (std::size_t r = r0; r < r1; ++r)
                for (std::size_t c = c0; c < c1; ++c) slice.push_back(t.at(r, c));
            const HammingResult h = hamming(slice, t.q);
            hr_max = std::max(hr_max, h.hr);
            tiles.push_back({{"rows", {r0, r1}}, {"cols", {c0, c1}}, {"hm", h.hm}, {"hr", h.hr}});
        }
    }
    return tiles;
}

}  // namespace

json cmd_analyze(const std::vector<fs::path>& tensor_paths, std::size_t tile_rows,
                 std::size_t tile_cols) {
    json layers = json::array();
    std::uint64_t total_hm = 0;
    std::uint64_t total_bits = 0;
    double hr_max_overall = 0.0;
    for (const auto& path : tensor_paths) {
        const QuantizedTensor t = load_tensor(path);
        const HammingResult h = hamming(t.values, t.q);
        double hr_max = 0.0;
        json tiles = tile_stats(t, tile_rows, tile_cols, hr_max);
        layers.push_back({{"path", path.string()},
                          {"shape", t.shape},
                          {"q", t.q},
                          {"hm", h.hm},
                          {"hr", h.hr},
                          {"hr_max", hr_max},
                          {"hr_average", h.hr},
                          {"tiles", tiles}});
        total_hm += h.hm;
        total_bits += t.values.size() * static_cast<std::uint64_t>(t.q);
        hr_max_overall = std::max(hr_max_overall, hr_max);
    }
    return json{{"layers", layers},
                {"hr_max", hr_max_overall},
                {"hr_average", total_bits ? static_cast<double>(total_hm) / total_bits : 0.0}};
}

json cmd_lhr(const fs::path& layers_path, double lambda, int steps, double lr,
             const fs::path& out) {
    const json doc = read_json_file(layers_path, "layers");
    int q = doc.value("q", 8);
    std::vector<FloatWeightLayer> layers;
    const auto parse_layer = [](const json& l, std::size_t idx) {
        FloatWeightLayer layer;
        if (!l.contains("weights")) throw ParseError("layers: layer missing field 'weights'");
        layer.weights = l["weights"].get<std::vector<double>>();
        layer.scale = l.value("scale", 1.0);
        layer.id = l.value("id", "layer" + std::to_string(idx));
        return layer;
    };
    if (doc.contains("layers")) {
        std::size_t idx = 0;
        for (const auto& l : doc["layers"]) layers.push_back(parse_layer(l, idx++));
    } else {
        layers.push_back(parse_layer(doc, 0));
    }

    const HrLookup lut(q);
    FinetuneReport report = finetune(std::move(layers), lut, lambda, steps, lr);

    json out_layers = json::array();
    for (const auto& l : report.layers)
        out_layers.push_back({{"id", l.id}, {"weights", l.weights}, {"scale", l.scale}});
    write_json_file(out / "layers.json", json{{"q", q}, {"layers", out_layers}});
    json rep{{"lambda", lambda},
             {"steps", steps},
             {"lr", lr},
             {"steps_run", report.steps_run},
             {"aborted", report.aborted},
             {"interp_hr_before", report.interp_hr_before},
             {"interp_hr_after", report.interp_hr_after},
             {"quant_hr_before", report.quant_hr_before},
             {"quant_hr_after", report.quant_hr_after}};
    write_json_file(out / "lhr_report.json", rep);
    return rep;
}

json cmd_wds(const fs::path& tensor_path, int delta, const fs::path& out) {
    const QuantizedTensor t = load_tensor(tensor_path);
    const ShiftedLayer layer = shift_weights(t, delta);
    const double hr_before = hamming(layer.base.values, t.q).hr;
    const double hr_after = hamming(layer.shifted.values, t.q).hr;
    write_json_file(out / (tensor_path.stem().string() + "_shifted.json"),
                    tensor_to_json(layer.shifted));
    json rep{{"delta", delta},
             {"clamped_count", layer.clamped_count},
             {"overflow_warning", layer.overflow_warning()},
             {"hr_before", hr_before},
             {"hr_after", hr_after}};
    write_json_file(out / (tensor_path.stem().string() + "_wds_report.json"), rep);
    return rep;
}

namespace {

json score_to_json(const MappingScore& s) {
    return json{{"delay_cycles", s.delay_cycles}, {"energy", s.energy}, {"scalar", s.scalar}};
}

struct MapResult {
    TaskMapping mapping;
    json doc;
};

MapResult derive_mapping(const ChipTopology& topo, const Workload& w, const std::string& strategy,
                         const std::string& mode, std::uint64_t seed) {
    const auto tasks = materialize_tasks(w, topo, seed);
    const FlipProfile profile{0.5, 0.15, 100, seed};
    const BoosterMode bmode = mode_of(mode);
    const auto scorer = [&](const TaskMapping& m) {
        return score_mapping(m, topo, w, tasks, profile, bmode);
    };

    const TaskMapping seq = sequential_map(w, topo);
    const MappingScore seq_score = scorer(seq);
    const TaskMapping zig = zigzag_map(w, topo);
    const MappingScore zig_score = scorer(zig);

    MapResult res;
    json extra;
    if (strategy == "sequential") {
        res.mapping = seq;
        extra["score"] = score_to_json(seq_score);
    } else if (strategy == "zigzag") {
        res.mapping = zig;
        extra["score"] = score_to_json(zig_score);
    } else {
        AnnealConfig cfg;
        cfg.seed = seed;
        const AnnealResult ar = anneal(seq, cfg, topo, scorer);
        res.mapping = ar.best;
        extra["score"] = score_to_json(ar.best_score);
        extra["anneal"] = {{"steps_taken", ar.steps_taken},
                           {"accepted", ar.accepted},
                           {"initial_score", score_to_json(ar.initial_score)}};
    }
    res.doc = mapping_to_json(res.mapping, w);
    res.doc.update(extra);
    res.doc["baseline_scores"] = {{"sequential", score_to_json(seq_score)},
                                  {"zigzag", score_to_json(zig_score)}};
    res.doc["seed"] = seed;
    res.doc["strategy"] = strategy;
    res.doc["mode"] = mode;
    return res;
}

}  // namespace

json cmd_map(const fs::path& topology, const fs::path& workload, const std::string& strategy,
             const std::string& mode, std::uint64_t seed, const fs::path& out) {
    const ChipTopology topo = load_topology(topology);
    const Workload w = load_workload(workload);
    MapResult res = derive_mapping(topo, w, strategy, mode, seed);
    write_json_file(out / "mapping.json", res.doc);
    return res.doc;
}

namespace {

json run_engine_and_write(const ChipTopology& topo, const Workload& w, const TaskMapping& m,
                          const RunManifest& manifest) {
    EngineOptions opts;
    opts.mode = mode_of(manifest.mode);
    opts.booster_aggressive = manifest.booster == "aggressive";
    opts.seed = manifest.seed;
    opts.threads = thread_cap_from_env();
    const SimTrace trace = simulate(topo, w, m, opts);
    fs::create_directories(manifest.out);
    write_trace_jsonl(trace, manifest.out / "trace.jsonl");
    write_trace_csv(trace, manifest.out / "trace.csv");
    const json summary = summary_to_json(trace.summary);
    write_json_file(manifest.out / "summary.json", summary);
    return summary;
}

}  // namespace

json cmd_simulate(const RunManifest& manifest) {
    ChipTopology topo = load_topology(manifest.topology);
    if (manifest.beta) {
        topo.beta = *manifest.beta;
        topo.validate();
    }
    const Workload w = load_workload(manifest.workload);
    TaskMapping m;
    if (manifest.mapping_path) {
        m = load_mapping(*manifest.mapping_path, w);
        m.validate(w, topo);
    } else {
        m = derive_mapping(topo, w, manifest.strategy, manifest.mode, manifest.seed).mapping;
    }
    return run_engine_and_write(topo, w, m, manifest);
}

json cmd_report(const std::vector<fs::path>& trace_paths, const fs::path& out) {
    if (trace_paths.empty() || trace_paths.size() > 2)
        throw ValidationError("report: give one trace for series data or two for an ablation");
    fs::create_directories(out);
    if (trace_paths.size() == 1) {
        const SimTrace t = load_trace_jsonl(trace_paths[0]);
        write_trace_csv(t, out / "series.csv");
        const json doc = summary_to_json(t.summary);
        write_json_file(out / "report.json", doc);
        return doc;
    }
    const SimTrace a = load_trace_jsonl(trace_paths[0]);
    const SimTrace b = load_trace_jsonl(trace_paths[1]);
    write_trace_csv(a, out / "series_a.csv");
    write_trace_csv(b, out / "series_b.csv");
    const json cmp = compare_runs(a, b);
    write_json_file(out / "ablation.json", cmp);
    {
        std::ofstream csv(out / "ablation.csv");
        if (!csv) throw SimError("cannot write " + (out / "ablation.csv").string());
        csv << "metric,a,b,delta\n";
        for (const auto& [key, val] : cmp.items())
            csv << key << ',' << val["a"].dump() << ',' << val["b"].dump() << ','
                << val["delta"].dump() << "\n";
    }
    return cmp;
}

json cmd_run(const RunManifest& manifest) {
    ChipTopology topo = load_topology(manifest.topology);
    if (manifest.beta) {
        topo.beta = *manifest.beta;
        topo.validate();
    }
    Workload w = load_workload(manifest.workload);

    json hr_stages;
    const auto snapshot_hr = [&](const char* stage) {
        json per_op = json::object();
        for (const auto& op : w.operators)
            if (op.weight) per_op[op.name] = hamming(op.weight->values, op.weight->q).hr;
        hr_stages[stage] = per_op;
    };
    snapshot_hr("initial");

    json lhr_reports = json::object();
    if (manifest.lhr_enabled) {
        const HrLookup lut(topo.q);
        std::size_t op_idx = 0;
        for (auto& op : w.operators) {
            ++op_idx;
            if (!op.weight) continue;
            // Synthetic anchors: rebuild the pre-quantization float state by
            // adding back a seeded rounding residual. Quantizing it untouched
            // reproduces the stored integers exactly; finetuning gets an
            // off-lattice landscape to descend.
            Rng jitter(split_seed(manifest.seed, stream_id("lhr-anchor") ^ op_idx));
            FloatWeightLayer layer;
            layer.id = op.name;
            layer.scale = op.weight->scale;
            layer.weights.reserve(op.weight->values.size());
            for (std::int32_t v : op.weight->values)
                layer.weights.push_back((static_cast<double>(v) + (jitter.uniform() - 0.5) * 0.98) *
                                        op.weight->scale);
            FinetuneReport rep = finetune({std::move(layer)}, lut, manifest.lhr_lambda,
                                          manifest.lhr_steps, manifest.lhr_lr);
            lhr_reports[op.name] = {{"steps_run", rep.steps_run},
                                    {"aborted", rep.aborted},
                                    {"quant_hr_before", rep.quant_hr_before},
                                    {"quant_hr_after", rep.quant_hr_after}};
            op.weight->values = quantize_layer(rep.layers[0], topo.q);
        }
        snapshot_hr("after_lhr");
    }

    json wds_reports = json::object();
    if (manifest.wds_delta) {
        for (auto& op : w.operators) {
            if (!op.weight) continue;
            const int delta = op.wds_delta.value_or(*manifest.wds_delta);
            const ShiftedLayer layer = shift_weights(*op.weight, delta);
            wds_reports[op.name] = {{"delta", delta},
                                    {"clamped_count", layer.clamped_count},
                                    {"overflow_warning", layer.overflow_warning()},
                                    {"hr_before", hamming(layer.base.values, topo.q).hr},
                                    {"hr_after", hamming(layer.shifted.values, topo.q).hr}};
            op.weight->values = layer.shifted.values;
        }
        snapshot_hr("after_wds");
    }

    TaskMapping m;
    json mapping_doc;
    if (manifest.mapping_path) {
        m = load_mapping(*manifest.mapping_path, w);
        m.validate(w, topo);
        mapping_doc = mapping_to_json(m, w);
    } else {
        MapResult res = derive_mapping(topo, w, manifest.strategy, manifest.mode, manifest.seed);
        m = std::move(res.mapping);
        mapping_doc = std::move(res.doc);
    }

    fs::create_directories(manifest.out);
    write_json_file(manifest.out / "hr_report.json",
                    json{{"stages", hr_stages}, {"lhr", lhr_reports}, {"wds", wds_reports}});
    write_json_file(manifest.out / "mapping.json", mapping_doc);
    return run_engine_and_write(topo, w, m, manifest);
}

namespace {

RunManifest manifest_from_flags(const std::string& topology, const std::string& workload,
                                const std::string& mapping, const std::string& strategy,
                                const std::string& mode, std::uint64_t seed,
                                const std::string& out, const std::string& booster, int beta) {
    RunManifest m;
    m.topology = topology;
    m.workload = workload;
    if (!mapping.empty()) m.mapping_path = mapping;
    m.strategy = strategy;
    m.mode = mode;
    m.seed = seed;
    m.out = out;
    m.booster = booster;
    if (beta > 0) m.beta = beta;
    m.validate();
    return m;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Cycle-level simulator of a bit-serial SRAM PIM chip with toggle-rate-aware "
                 "V-f control, weight optimization, and HR-aware task mapping"};
    app.require_subcommand(1);

    // analyze
    std::vector<std::string> analyze_tensors;
    std::size_t tile_rows = 0, tile_cols = 0;
    std::string analyze_out;
    auto* analyze = app.add_subcommand("analyze", "Hamming statistics of weight tensors");
    analyze->add_option("tensors", analyze_tensors, "Tensor JSON files")->required();
    analyze->add_option("--tile-rows", tile_rows, "Tile height for per-tile stats");
    analyze->add_option("--tile-cols", tile_cols, "Tile width for per-tile stats");
    analyze->add_option("--out", analyze_out, "Output directory (stdout when omitted)");

    // lhr
    std::string lhr_layers, lhr_out;
    double lhr_lambda = 1.0, lhr_lr = 0.1;
    int lhr_steps = 50;
    auto* lhr = app.add_subcommand("lhr", "Finetune float layers toward lower hamming rate");
    lhr->add_option("layers", lhr_layers, "Float layer JSON file")->required();
    lhr->add_option("--lambda", lhr_lambda, "Regularization weight");
    lhr->add_option("--steps", lhr_steps, "Descent steps");
    lhr->add_option("--lr", lhr_lr, "Learning rate");
    lhr->add_option("--out", lhr_out, "Output directory")->required();

    // wds
    std::string wds_tensor, wds_out;
    int wds_delta = 8;
    auto* wds = app.add_subcommand("wds", "Shift a weight tensor and report HR change");
    wds->add_option("tensor", wds_tensor, "Tensor JSON file")->required();
    wds->add_option("--delta", wds_delta, "Power-of-two shift");
    wds->add_option("--out", wds_out, "Output directory")->required();

    // map
    std::string map_topology, map_workload, map_strategy = "anneal", map_mode = "low-power",
                map_out;
    std::uint64_t map_seed = 0;
    auto* mapc = app.add_subcommand("map", "Derive a task mapping");
    mapc->add_option("--topology", map_topology)->required();
    mapc->add_option("--workload", map_workload)->required();
    mapc->add_option("--strategy", map_strategy)->check(CLI::IsMember({"anneal", "sequential", "zigzag"}));
    mapc->add_option("--mode", map_mode)->check(CLI::IsMember({"sprint", "low-power"}));
    mapc->add_option("--seed", map_seed)->required();
    mapc->add_option("--out", map_out)->required();

    // simulate
    std::string sim_topology, sim_workload, sim_mapping, sim_strategy = "anneal",
                sim_mode = "low-power", sim_out, sim_booster = "aggressive";
    std::uint64_t sim_seed = 0;
    int sim_beta = 0;
    auto* sim = app.add_subcommand("simulate", "Run the cycle-level engine");
    sim->add_option("--topology", sim_topology)->required();
    sim->add_option("--workload", sim_workload)->required();
    sim->add_option("--mapping", sim_mapping, "Existing mapping JSON");
    sim->add_option("--strategy", sim_strategy)->check(CLI::IsMember({"anneal", "sequential", "zigzag"}));
    sim->add_option("--mode", sim_mode)->check(CLI::IsMember({"sprint", "low-power"}));
    sim->add_option("--booster", sim_booster)->check(CLI::IsMember({"aggressive", "safe-only"}));
    sim->add_option("--beta", sim_beta, "Controller window override");
    sim->add_option("--seed", sim_seed)->required();
    sim->add_option("--out", sim_out)->required();

    // report
    std::vector<std::string> report_traces;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Plot data for one trace or deltas for two");
    report->add_option("traces", report_traces, "trace.jsonl files")->required()->expected(1, 2);
    report->add_option("--out", report_out)->required();

    // run
    std::string run_manifest, run_out;
    auto* run = app.add_subcommand("run", "Full pipeline from a manifest");
    run->add_option("manifest", run_manifest, "Manifest JSON")->required();
    run->add_option("--out", run_out, "Override the manifest's output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        json result;
        if (*analyze) {
            std::vector<fs::path> paths(analyze_tensors.begin(), analyze_tensors.end());
            result = cmd_analyze(paths, tile_rows, tile_cols);
            if (!analyze_out.empty()) {
                write_json_file(fs::path(analyze_out) / "hr_report.json", result);
                std::ofstream csv(fs::path(analyze_out) / "hr_report.csv");
                csv << "layer,rows,cols,hm,hr\n";
                for (const auto& layer : result["layers"])
                    for (const auto& tile : layer["tiles"])
                        csv << layer["path"].get<std::string>() << ','
                            << tile["rows"][0] << '-' << tile["rows"][1] << ','
                            << tile["cols"][0] << '-' << tile["cols"][1] << ','
                            << tile["hm"] << ',' << tile["hr"] << "\n";
            }
        } else if (*lhr) {
            result = cmd_lhr(lhr_layers, lhr_lambda, lhr_steps, lhr_lr, lhr_out);
        } else if (*wds) {
            result = cmd_wds(wds_tensor, wds_delta, wds_out);
        } else if (*mapc) {
            result = cmd_map(map_topology, map_workload, map_strategy, map_mode, map_seed, map_out);
        } else if (*sim) {
            RunManifest m = manifest_from_flags(sim_topology, sim_workload, sim_mapping,
                                                sim_strategy, sim_mode, sim_seed, sim_out,
                                                sim_booster, sim_beta);
            result = cmd_simulate(m);
        } else if (*report) {
            std::vector<fs::path> paths(report_traces.begin(), report_traces.end());
            result = cmd_report(paths, report_out);
        } else if (*run) {
            RunManifest m = RunManifest::load(run_manifest);
            if (!run_out.empty()) m.out = run_out;
            result = cmd_run(m);
        }
        std::cout << result.dump(2) << "\n";
        return 0;
    } catch (const ValidationError& e) {
        std::cerr << json{{"error", e.what()}, {"kind", "validation"}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}, {"kind", "runtime"}}.dump() << "\n";
        return 3;
    }
}

}  // namespace aimsim::cli
