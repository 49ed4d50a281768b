#include "aimsim/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "aimsim/errors.hpp"

namespace aimsim {

void IrCoefficients::validate() const {
    if (static_drop < 0.0) throw ValidationError("ir_coeffs: static_drop must be >= 0");
    if (dynamic_slope < 0.0) throw ValidationError("ir_coeffs: dynamic_slope must be >= 0");
}

void EnergyModel::validate() const {
    if (c_dyn < 0.0) throw ValidationError("energy: c_dyn must be >= 0");
    if (p_leak < 0.0) throw ValidationError("energy: p_leak must be >= 0");
}

const VfLevel* VfTable::find(int rtog_cap) const {
    for (const auto& lvl : levels)
        if (lvl.rtog_cap == rtog_cap) return &lvl;
    return nullptr;
}

std::optional<VfPair> VfTable::pair_at_frequency(int level, double frequency) const {
    const VfLevel* lvl = find(level);
    if (!lvl) return std::nullopt;
    for (const auto& p : lvl->pairs)
        if (p.frequency == frequency) return p;
    return std::nullopt;
}

std::optional<VfPair> VfTable::pair_at_or_below(int level, double frequency_limit) const {
    const VfLevel* lvl = find(level);
    if (!lvl) return std::nullopt;
    std::optional<VfPair> best;
    for (const auto& p : lvl->pairs) {
        if (p.frequency <= frequency_limit && (!best || p.frequency > best->frequency)) best = p;
    }
    return best;
}

void VfTable::validate() const {
    if (levels.empty()) throw ValidationError("vf_table: no levels");
    int prev_cap = 0;
    for (const auto& lvl : levels) {
        if (lvl.rtog_cap <= prev_cap)
            throw ValidationError("vf_table: rtog_cap values must be strictly increasing");
        prev_cap = lvl.rtog_cap;
        const bool known = lvl.rtog_cap == 100 ||
                           (lvl.rtog_cap >= 20 && lvl.rtog_cap <= 60 && lvl.rtog_cap % 5 == 0);
        if (!known)
            throw ValidationError("vf_table: rtog_cap " + std::to_string(lvl.rtog_cap) +
                                  " not in {20,25,...,60,100}");
        if (lvl.pairs.empty())
            throw ValidationError("vf_table: level " + std::to_string(lvl.rtog_cap) + " has no pairs");
        double prev_f = 0.0;
        for (const auto& p : lvl.pairs) {
            if (!(p.voltage > 0.0) || !(p.frequency > 0.0))
                throw ValidationError("vf_table: voltage and frequency must be positive");
            if (p.frequency <= prev_f)
                throw ValidationError("vf_table: pairs within a level must be sorted by ascending frequency");
            prev_f = p.frequency;
        }
    }
    if (!has_level(100)) throw ValidationError("vf_table: the 100% fallback level is required");
    // Monotonic safety: at equal frequency a higher cap must not promise less voltage.
    for (std::size_t a = 0; a < levels.size(); ++a) {
        for (std::size_t b = a + 1; b < levels.size(); ++b) {
            for (const auto& pa : levels[a].pairs) {
                for (const auto& pb : levels[b].pairs) {
                    if (pa.frequency == pb.frequency && pb.voltage < pa.voltage)
                        throw ValidationError(
                            "vf_table: level " + std::to_string(levels[b].rtog_cap) +
                            " lists a lower voltage than level " + std::to_string(levels[a].rtog_cap) +
                            " at the same frequency");
                }
            }
        }
    }
}

void ChipTopology::validate() const {
    if (n_groups < 1) throw ValidationError("topology: n_groups must be >= 1");
    if (macros_per_group < 1) throw ValidationError("topology: macros_per_group must be >= 1");
    if (banks_per_macro < 1) throw ValidationError("topology: banks_per_macro must be >= 1");
    if (cells_per_bank < 1) throw ValidationError("topology: cells_per_bank must be >= 1");
    if (q < 2 || q > 16) throw ValidationError("topology: q must be in [2,16]");
    if (beta < 1) throw ValidationError("topology: beta must be >= 1");
    if (!(v_fail_threshold < vdd_nominal))
        throw ValidationError("topology: v_fail_threshold must be below vdd_nominal");
    if (pair_switch_latency < 0) throw ValidationError("topology: pair_switch_latency must be >= 0");
    ir_coeffs.validate();
    energy.validate();
    vf_table.validate();
}

VfTable default_vf_table(double vdd_nominal, double v_fail_threshold, const IrCoefficients& coeffs) {
    // Shared frequency ladder; each step asks a little more voltage for timing.
    const double freqs[3] = {1.0e9, 1.2e9, 1.4e9};
    const double timing_step = 0.01;
    VfTable table;
    for (int cap = 20; cap <= 60; cap += 5) {
        VfLevel lvl;
        lvl.rtog_cap = cap;
        const double v_min = v_fail_threshold + coeffs.static_drop + coeffs.dynamic_slope * cap / 100.0;
        for (int j = 0; j < 3; ++j) lvl.pairs.push_back({v_min + timing_step * j, freqs[j]});
        table.levels.push_back(std::move(lvl));
    }
    table.levels.push_back({100, {{vdd_nominal, freqs[0]}}});
    return table;
}

namespace {

VfTable vf_table_from_json(const nlohmann::json& doc) {
    VfTable table;
    if (!doc.contains("levels") || !doc["levels"].is_array())
        throw ParseError("vf_table: missing or non-array field 'levels'");
    for (const auto& l : doc["levels"]) {
        VfLevel lvl;
        if (!l.contains("rtog_cap")) throw ParseError("vf_table: level missing field 'rtog_cap'");
        lvl.rtog_cap = l["rtog_cap"].get<int>();
        if (!l.contains("pairs") || !l["pairs"].is_array())
            throw ParseError("vf_table: level missing array field 'pairs'");
        for (const auto& p : l["pairs"]) {
            if (!p.contains("voltage") || !p.contains("frequency"))
                throw ParseError("vf_table: pair needs 'voltage' and 'frequency'");
            lvl.pairs.push_back({p["voltage"].get<double>(), p["frequency"].get<double>()});
        }
        table.levels.push_back(std::move(lvl));
    }
    return table;
}

template <typename T>
T require_field(const nlohmann::json& doc, const char* name) {
    if (!doc.contains(name)) throw ParseError(std::string("topology: missing field '") + name + "'");
    try {
        return doc[name].get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(std::string("topology: field '") + name + "' has the wrong type");
    }
}

}  // namespace

ChipTopology topology_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("topology: document is not an object");
    ChipTopology t;
    t.n_groups = require_field<int>(doc, "n_groups");
    t.macros_per_group = require_field<int>(doc, "macros_per_group");
    t.banks_per_macro = doc.value("banks_per_macro", 32);
    t.cells_per_bank = require_field<int>(doc, "cells_per_bank");
    t.q = doc.value("q", 8);
    t.beta = doc.value("beta", 100);
    t.v_fail_threshold = doc.value("v_fail_threshold", 0.61);
    t.vdd_nominal = doc.value("vdd_nominal", 0.75);
    t.pair_switch_latency = doc.value("pair_switch_latency", 10);
    if (doc.contains("ir_coeffs")) {
        const auto& c = doc["ir_coeffs"];
        t.ir_coeffs.static_drop = c.value("static_drop", 0.02);
        t.ir_coeffs.dynamic_slope = c.value("dynamic_slope", 0.12);
    }
    if (doc.contains("energy")) {
        const auto& e = doc["energy"];
        t.energy.c_dyn = e.value("c_dyn", t.energy.c_dyn);
        t.energy.p_leak = e.value("p_leak", t.energy.p_leak);
    }
    if (doc.contains("vf_table"))
        t.vf_table = vf_table_from_json(doc["vf_table"]);
    else
        t.vf_table = default_vf_table(t.vdd_nominal, t.v_fail_threshold, t.ir_coeffs);
    t.validate();
    return t;
}

ChipTopology load_topology(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("topology: cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("topology: " + path.string() + ": " + e.what());
    }
    return topology_from_json(doc);
}

nlohmann::json topology_to_json(const ChipTopology& t) {
    nlohmann::json doc;
    doc["n_groups"] = t.n_groups;
    doc["macros_per_group"] = t.macros_per_group;
    doc["banks_per_macro"] = t.banks_per_macro;
    doc["cells_per_bank"] = t.cells_per_bank;
    doc["q"] = t.q;
    doc["beta"] = t.beta;
    doc["v_fail_threshold"] = t.v_fail_threshold;
    doc["vdd_nominal"] = t.vdd_nominal;
    doc["pair_switch_latency"] = t.pair_switch_latency;
    doc["ir_coeffs"] = {{"static_drop", t.ir_coeffs.static_drop},
                        {"dynamic_slope", t.ir_coeffs.dynamic_slope}};
    doc["energy"] = {{"c_dyn", t.energy.c_dyn}, {"p_leak", t.energy.p_leak}};
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lvl : t.vf_table.levels) {
        nlohmann::json pairs = nlohmann::json::array();
        for (const auto& p : lvl.pairs)
            pairs.push_back({{"voltage", p.voltage}, {"frequency", p.frequency}});
        levels.push_back({{"rtog_cap", lvl.rtog_cap}, {"pairs", pairs}});
    }
    doc["vf_table"] = {{"levels", levels}};
    return doc;
}

}  // namespace aimsim
