#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace aimsim {

/// Signed fixed-width integer weight tensor: the in-memory data of a PIM bank.
/// Values are stored row-major and must fit the declared bit-width q.
struct QuantizedTensor {
    std::vector<std::size_t> shape;
    int q = 8;
    double scale = 1.0;
    std::vector<std::int32_t> values;

    std::size_t size() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
    std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
    std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    /// Row-major element access for 2-D use.
    std::int32_t at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

    /// Checks all type invariants; throws ValidationError on the first violation.
    void validate() const;
};

inline std::int32_t int_max_for(int q) { return (std::int32_t{1} << (q - 1)) - 1; }
inline std::int32_t int_min_for(int q) { return -(std::int32_t{1} << (q - 1)); }

/// Parses a tensor document. Inline form carries "values"; sidecar form
/// carries "byte_order" and "data" naming a flat binary file (int8, or
/// int16 little-endian when q > 8) relative to the document's directory.
QuantizedTensor load_tensor(const std::filesystem::path& path);
QuantizedTensor tensor_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Inline JSON form (shape, q, scale, values).
nlohmann::json tensor_to_json(const QuantizedTensor& t);

/// Writes sidecar JSON at `path` plus the binary payload next to it.
void save_tensor_binary(const QuantizedTensor& t, const std::filesystem::path& path);

}  // namespace aimsim
