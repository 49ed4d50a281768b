#include "aimsim/metrics.hpp"

#include "aimsim/errors.hpp"

namespace aimsim {

double rtog(std::span<const std::int32_t> bank_weights, int q, const BitToggleFrame& frame) {
    if (bank_weights.size() != frame.size())
        throw ValidationError("rtog: " + std::to_string(bank_weights.size()) + " weights vs " +
                              std::to_string(frame.size()) + " toggle entries");
    if (bank_weights.empty()) throw ValidationError("rtog: empty bank");
    std::uint64_t toggled_bits = 0;
    for (std::size_t k = 0; k < bank_weights.size(); ++k)
        if (frame[k]) toggled_bits += static_cast<std::uint64_t>(popcount_q(bank_weights[k], q));
    return static_cast<double>(toggled_bits) /
           (static_cast<double>(bank_weights.size()) * static_cast<double>(q));
}

HammingResult hamming(std::span<const std::int32_t> values, int q) {
    if (values.empty()) throw ValidationError("hamming: empty slice");
    HammingResult r;
    for (std::int32_t v : values) r.hm += static_cast<std::uint64_t>(popcount_q(v, q));
    r.hr = static_cast<double>(r.hm) /
           (static_cast<double>(values.size()) * static_cast<double>(q));
    return r;
}

double ir_drop_estimate(double rtog_value, const IrCoefficients& coeffs) {
    if (rtog_value < 0.0 || rtog_value > 1.0)
        throw ValidationError("ir_drop_estimate: rtog " + std::to_string(rtog_value) +
                              " outside [0,1]");
    return coeffs.static_drop + coeffs.dynamic_slope * rtog_value;
}

double macro_rtog(std::span<const double> bank_rates) {
    if (bank_rates.empty()) return 0.0;
    double sum = 0.0;
    for (double r : bank_rates) sum += r;
    return sum / static_cast<double>(bank_rates.size());
}

}  // namespace aimsim
