#include "aimsim/workload.hpp"

#include <algorithm>
#include <fstream>

#include "aimsim/errors.hpp"

namespace aimsim {

std::size_t Workload::task_count() const {
    std::size_t n = 0;
    for (const auto& op : operators) n += op.tiles.size();
    return n;
}

int Workload::task_ordinal(std::size_t op_idx, std::size_t tile_idx) const {
    std::size_t base = 0;
    for (std::size_t i = 0; i < op_idx; ++i) base += operators[i].tiles.size();
    return static_cast<int>(base + tile_idx);
}

std::pair<std::size_t, std::size_t> Workload::task_location(int ordinal) const {
    std::size_t rest = static_cast<std::size_t>(ordinal);
    for (std::size_t i = 0; i < operators.size(); ++i) {
        if (rest < operators[i].tiles.size()) return {i, rest};
        rest -= operators[i].tiles.size();
    }
    throw ValidationError("workload: task ordinal " + std::to_string(ordinal) + " out of range");
}

std::string Workload::task_name(int ordinal) const {
    auto [op, tile] = task_location(ordinal);
    return operators[op].name + "/" + std::to_string(tile);
}

int Workload::task_by_name(const std::string& name) const {
    const auto slash = name.rfind('/');
    if (slash == std::string::npos) throw ValidationError("mapping: bad task name '" + name + "'");
    const std::string op_name = name.substr(0, slash);
    const std::size_t tile = std::stoul(name.substr(slash + 1));
    for (std::size_t i = 0; i < operators.size(); ++i) {
        if (operators[i].name == op_name) {
            if (tile >= operators[i].tiles.size())
                throw ValidationError("mapping: tile index out of range in '" + name + "'");
            return task_ordinal(i, tile);
        }
    }
    throw ValidationError("mapping: unknown operator in task name '" + name + "'");
}

void Workload::validate() const {
    if (operators.empty()) throw ValidationError("workload: no operators");
    for (const auto& op : operators) {
        if (op.name.empty()) throw ValidationError("workload: operator without a name");
        if (op.kind == OperatorKind::WeightStationary && !op.weight)
            throw ValidationError("workload: weight-stationary operator '" + op.name +
                                  "' must reference a weight tensor");
        if (op.kind == OperatorKind::InputDetermined && op.weight)
            throw ValidationError("workload: input-determined operator '" + op.name +
                                  "' must not reference a weight tensor");
        if (op.weight) op.weight->validate();
        if (op.input_vectors < 1)
            throw ValidationError("workload: operator '" + op.name + "' needs input_vectors >= 1");
        const std::size_t R = op.matrix_rows();
        const std::size_t C = op.matrix_cols();
        if (R == 0 || C == 0)
            throw ValidationError("workload: operator '" + op.name + "' has an empty matrix shape");
        if (op.tiles.empty())
            throw ValidationError("workload: operator '" + op.name + "' has no tiles");
        // Tiles must partition the matrix exactly: in bounds, disjoint, covering.
        std::vector<char> covered(R * C, 0);
        std::size_t area = 0;
        for (const auto& t : op.tiles) {
            if (t.row1 <= t.row0 || t.col1 <= t.col0 || t.row1 > R || t.col1 > C)
                throw ValidationError("workload: operator '" + op.name + "' has a tile outside its matrix");
            for (std::size_t r = t.row0; r < t.row1; ++r)
                for (std::size_t c = t.col0; c < t.col1; ++c) {
                    if (covered[r * C + c])
                        throw ValidationError("workload: operator '" + op.name + "' has overlapping tiles");
                    covered[r * C + c] = 1;
                }
            area += t.rows() * t.cols();
        }
        if (area != R * C)
            throw ValidationError("workload: tiles of operator '" + op.name +
                                  "' do not cover its weight matrix");
    }
}

std::vector<std::vector<int>> TaskMapping::sets(const Workload& w) const {
    std::vector<std::vector<int>> out(w.operators.size());
    for (std::size_t m = 0; m < assignment.size(); ++m) {
        if (assignment[m] == kEmptyMacro) continue;
        out[w.task_location(assignment[m]).first].push_back(static_cast<int>(m));
    }
    return out;
}

void TaskMapping::validate(const Workload& w, const ChipTopology& t) const {
    if (assignment.size() != static_cast<std::size_t>(t.n_macros()))
        throw ValidationError("mapping: assignment covers " + std::to_string(assignment.size()) +
                              " macros, topology has " + std::to_string(t.n_macros()));
    const std::size_t n_tasks = w.task_count();
    std::vector<char> seen(n_tasks, 0);
    for (int task : assignment) {
        if (task == kEmptyMacro) continue;
        if (task < 0 || static_cast<std::size_t>(task) >= n_tasks)
            throw ValidationError("mapping: task ordinal " + std::to_string(task) +
                                  " does not exist in the workload");
        if (seen[task])
            throw ValidationError("mapping: task " + w.task_name(task) +
                                  " assigned to more than one macro");
        seen[task] = 1;
    }
}

bool TaskMapping::complete(const Workload& w) const {
    std::size_t placed = 0;
    for (int task : assignment)
        if (task != kEmptyMacro) ++placed;
    return placed == w.task_count();
}

namespace {

Operator operator_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    Operator op;
    if (!doc.contains("name")) throw ParseError("workload: operator missing field 'name'");
    op.name = doc["name"].get<std::string>();
    const std::string kind = doc.value("kind", "weight_stationary");
    if (kind == "weight_stationary")
        op.kind = OperatorKind::WeightStationary;
    else if (kind == "input_determined")
        op.kind = OperatorKind::InputDetermined;
    else
        throw ParseError("workload: operator '" + op.name + "' has unknown kind '" + kind + "'");
    if (doc.contains("weight")) {
        const auto& wref = doc["weight"];
        if (wref.is_object() && wref.contains("path"))
            op.weight = load_tensor(base_dir / wref["path"].get<std::string>());
        else
            op.weight = tensor_from_json(wref, base_dir);
    }
    if (doc.contains("runtime_shape")) {
        const auto& rs = doc["runtime_shape"];
        if (!rs.is_array() || rs.size() != 2)
            throw ParseError("workload: 'runtime_shape' must be [rows, cols]");
        op.runtime_rows = rs[0].get<std::size_t>();
        op.runtime_cols = rs[1].get<std::size_t>();
    }
    op.input_vectors = doc.value("input_vectors", 16);
    if (doc.contains("wds_delta")) op.wds_delta = doc["wds_delta"].get<int>();
    if (!doc.contains("tiles") || !doc["tiles"].is_array())
        throw ParseError("workload: operator '" + op.name + "' missing array field 'tiles'");
    for (const auto& td : doc["tiles"]) {
        if (!td.contains("rows") || !td.contains("cols"))
            throw ParseError("workload: tile needs 'rows' and 'cols' ranges");
        Tile t;
        t.row0 = td["rows"][0].get<std::size_t>();
        t.row1 = td["rows"][1].get<std::size_t>();
        t.col0 = td["cols"][0].get<std::size_t>();
        t.col1 = td["cols"][1].get<std::size_t>();
        op.tiles.push_back(t);
    }
    return op;
}

}  // namespace

Workload workload_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object() || !doc.contains("operators") || !doc["operators"].is_array())
        throw ParseError("workload: missing array field 'operators'");
    Workload w;
    for (const auto& opdoc : doc["operators"]) w.operators.push_back(operator_from_json(opdoc, base_dir));
    w.validate();
    return w;
}

Workload load_workload(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("workload: cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("workload: " + path.string() + ": " + e.what());
    }
    return workload_from_json(doc, path.parent_path());
}

nlohmann::json workload_to_json(const Workload& w) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : w.operators) {
        nlohmann::json o;
        o["name"] = op.name;
        o["kind"] = op.kind == OperatorKind::WeightStationary ? "weight_stationary" : "input_determined";
        if (op.weight) o["weight"] = tensor_to_json(*op.weight);
        if (op.kind == OperatorKind::InputDetermined)
            o["runtime_shape"] = {op.runtime_rows, op.runtime_cols};
        o["input_vectors"] = op.input_vectors;
        if (op.wds_delta) o["wds_delta"] = *op.wds_delta;
        nlohmann::json tiles = nlohmann::json::array();
        for (const auto& t : op.tiles)
            tiles.push_back({{"rows", {t.row0, t.row1}}, {"cols", {t.col0, t.col1}}});
        o["tiles"] = tiles;
        ops.push_back(o);
    }
    return nlohmann::json{{"operators", ops}};
}

TaskMapping mapping_from_json(const nlohmann::json& doc, const Workload& w) {
    if (!doc.is_object() || !doc.contains("assignment") || !doc["assignment"].is_array())
        throw ParseError("mapping: missing array field 'assignment'");
    TaskMapping m;
    for (const auto& slot : doc["assignment"]) {
        if (slot.is_null())
            m.assignment.push_back(kEmptyMacro);
        else
            m.assignment.push_back(w.task_by_name(slot.get<std::string>()));
    }
    return m;
}

TaskMapping load_mapping(const std::filesystem::path& path, const Workload& w) {
    std::ifstream in(path);
    if (!in) throw ParseError("mapping: cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("mapping: " + path.string() + ": " + e.what());
    }
    return mapping_from_json(doc, w);
}

nlohmann::json mapping_to_json(const TaskMapping& m, const Workload& w) {
    nlohmann::json assignment = nlohmann::json::array();
    for (int task : m.assignment) {
        if (task == kEmptyMacro)
            assignment.push_back(nullptr);
        else
            assignment.push_back(w.task_name(task));
    }
    nlohmann::json sets = nlohmann::json::object();
    const auto derived = m.sets(w);
    for (std::size_t op = 0; op < derived.size(); ++op)
        if (!derived[op].empty()) sets[w.operators[op].name] = derived[op];
    return nlohmann::json{{"assignment", assignment}, {"sets", sets}};
}

}  // namespace aimsim
