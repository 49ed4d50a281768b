#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aimsim/metrics.hpp"
#include "aimsim/tensor.hpp"

namespace aimsim {

/// HR value of every representable q-bit integer, indexed by value.
class HrLookup {
public:
    explicit HrLookup(int q);

    int q() const { return q_; }
    std::int32_t min_value() const { return int_min_for(q_); }
    std::int32_t max_value() const { return int_max_for(q_); }
    double at(std::int32_t value) const { return table_[static_cast<std::size_t>(value - min_value())]; }

private:
    int q_;
    std::vector<double> table_;
};

/// Real-valued weights of one layer prior to quantization.
struct FloatWeightLayer {
    std::vector<double> weights;
    double scale = 1.0;  // quantization scale s_w
    std::string id;
};

struct InterpHr {
    double hr = 0.0;
    double grad = 0.0;   // dHR/dw = (HR[high] - HR[low]) / scale; 0 at lattice points
    bool clamped = false;
};

/// Piecewise-linear HR of a float weight: linear interpolation between the HR
/// of the two nearest representable integers. Out-of-range w/scale clamps to
/// the boundary with zero gradient.
InterpHr interp_hr(double w, double scale, const HrLookup& lut);

struct LhrResult {
    double loss = 0.0;                             // sum of squared per-layer mean HR
    std::vector<std::vector<double>> grads;        // per layer, per weight
    std::vector<double> layer_mean_hr;
    std::size_t clamped_count = 0;
};

LhrResult lhr_loss(const std::vector<FloatWeightLayer>& layers, const HrLookup& lut);

struct FinetuneReport {
    std::vector<FloatWeightLayer> layers;
    double interp_hr_before = 0.0;  // mean interpolated HR across all weights
    double interp_hr_after = 0.0;
    double quant_hr_before = 0.0;   // hamming HR of round-to-nearest quantization
    double quant_hr_after = 0.0;
    int steps_run = 0;
    bool aborted = false;           // divergence guard tripped
};

/// Gradient descent on lambda * L_HR plus a quadratic anchor ||w - w0||^2
/// standing in for the task loss. Aborts if the total loss rises for ten
/// consecutive steps.
FinetuneReport finetune(std::vector<FloatWeightLayer> layers, const HrLookup& lut, double lambda,
                        int steps, double lr, bool anchor_enabled = true);

/// Round-to-nearest quantization of a float layer, clamped to the q-bit range.
std::vector<std::int32_t> quantize_layer(const FloatWeightLayer& layer, int q);

}  // namespace aimsim
