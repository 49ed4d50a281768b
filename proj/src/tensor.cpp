#include "aimsim/tensor.hpp"

#include <fstream>

#include "aimsim/errors.hpp"

namespace aimsim {

void QuantizedTensor::validate() const {
    if (q < 2 || q > 16) throw ValidationError("tensor: q must be in [2,16], got " + std::to_string(q));
    if (!(scale > 0.0)) throw ValidationError("tensor: scale must be > 0");
    if (shape.empty()) throw ValidationError("tensor: shape must not be empty");
    for (std::size_t d : shape)
        if (d == 0) throw ValidationError("tensor: shape dimensions must be positive");
    if (size() != values.size())
        throw ValidationError("tensor: shape product " + std::to_string(size()) +
                              " does not match value count " + std::to_string(values.size()));
    const std::int32_t lo = int_min_for(q);
    const std::int32_t hi = int_max_for(q);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < lo || values[i] > hi)
            throw ValidationError("tensor: value " + std::to_string(values[i]) + " at index " +
                                  std::to_string(i) + " out of range for q=" + std::to_string(q));
    }
}

namespace {

std::vector<std::int32_t> read_binary_values(const std::filesystem::path& file, int q,
                                             std::size_t expected) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ParseError("tensor: cannot open binary payload " + file.string());
    std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::size_t elem = q > 8 ? 2 : 1;
    if (raw.size() != expected * elem)
        throw ValidationError("tensor: binary payload " + file.string() + " holds " +
                              std::to_string(raw.size() / elem) + " values, shape needs " +
                              std::to_string(expected));
    std::vector<std::int32_t> out(expected);
    if (elem == 1) {
        for (std::size_t i = 0; i < expected; ++i) out[i] = static_cast<std::int8_t>(raw[i]);
    } else {
        for (std::size_t i = 0; i < expected; ++i) {
            const auto lo = static_cast<std::uint8_t>(raw[2 * i]);
            const auto hi = static_cast<std::uint8_t>(raw[2 * i + 1]);
            out[i] = static_cast<std::int16_t>(static_cast<std::uint16_t>(lo) |
                                               (static_cast<std::uint16_t>(hi) << 8));
        }
    }
    return out;
}

}  // namespace

QuantizedTensor tensor_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ParseError("tensor: document is not an object");
    QuantizedTensor t;
    if (!doc.contains("shape") || !doc["shape"].is_array())
        throw ParseError("tensor: missing or non-array field 'shape'");
    for (const auto& d : doc["shape"]) t.shape.push_back(d.get<std::size_t>());
    t.q = doc.value("q", 8);
    t.scale = doc.value("scale", 1.0);
    if (doc.contains("values")) {
        if (!doc["values"].is_array()) throw ParseError("tensor: field 'values' must be an array");
        for (const auto& v : doc["values"]) t.values.push_back(v.get<std::int32_t>());
    } else if (doc.contains("data")) {
        const std::string order = doc.value("byte_order", "little");
        if (order != "little") throw ParseError("tensor: unsupported byte_order '" + order + "'");
        t.values = read_binary_values(base_dir / doc["data"].get<std::string>(), t.q, t.size());
    } else {
        throw ParseError("tensor: need either 'values' or 'data'");
    }
    t.validate();
    return t;
}

QuantizedTensor load_tensor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("tensor: cannot open " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("tensor: " + path.string() + ": " + e.what());
    }
    return tensor_from_json(doc, path.parent_path());
}

nlohmann::json tensor_to_json(const QuantizedTensor& t) {
    nlohmann::json doc;
    doc["shape"] = t.shape;
    doc["q"] = t.q;
    doc["scale"] = t.scale;
    doc["values"] = t.values;
    return doc;
}

void save_tensor_binary(const QuantizedTensor& t, const std::filesystem::path& path) {
    t.validate();
    std::filesystem::path bin = path;
    bin.replace_extension(".bin");
    {
        std::ofstream out(bin, std::ios::binary);
        if (!out) throw SimError("tensor: cannot write " + bin.string());
        if (t.q > 8) {
            for (std::int32_t v : t.values) {
                const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
                const char bytes[2] = {static_cast<char>(u & 0xff), static_cast<char>(u >> 8)};
                out.write(bytes, 2);
            }
        } else {
            for (std::int32_t v : t.values) {
                const char b = static_cast<char>(static_cast<std::int8_t>(v));
                out.write(&b, 1);
            }
        }
    }
    nlohmann::json doc;
    doc["shape"] = t.shape;
    doc["q"] = t.q;
    doc["scale"] = t.scale;
    doc["byte_order"] = "little";
    doc["data"] = bin.filename().string();
    std::ofstream out(path);
    if (!out) throw SimError("tensor: cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

}  // namespace aimsim
