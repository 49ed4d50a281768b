#include "aimsim/lhr.hpp"

#include <cmath>
#include <limits>

#include "aimsim/errors.hpp"

namespace aimsim {

HrLookup::HrLookup(int q) : q_(q) {
    if (q < 2 || q > 16) throw ValidationError("hr_lookup: q must be in [2,16]");
    const std::int32_t lo = int_min_for(q);
    const std::int32_t hi = int_max_for(q);
    table_.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int32_t v = lo; v <= hi; ++v)
        table_.push_back(static_cast<double>(popcount_q(v, q)) / q);
}

InterpHr interp_hr(double w, double scale, const HrLookup& lut) {
    if (!(scale > 0.0)) throw ValidationError("interp_hr: scale must be positive");
    const double x = w / scale;
    const double lo = static_cast<double>(lut.min_value());
    const double hi = static_cast<double>(lut.max_value());
    if (x <= lo) return {lut.at(lut.min_value()), 0.0, x < lo};
    if (x >= hi) return {lut.at(lut.max_value()), 0.0, x > hi};
    const double fl = std::floor(x);
    const std::int32_t low = static_cast<std::int32_t>(fl);
    if (x == fl) return {lut.at(low), 0.0, false};
    const std::int32_t high = low + 1;
    const double p = x - fl;
    const double hr = (1.0 - p) * lut.at(low) + p * lut.at(high);
    const double grad = (lut.at(high) - lut.at(low)) / scale;
    return {hr, grad, false};
}

LhrResult lhr_loss(const std::vector<FloatWeightLayer>& layers, const HrLookup& lut) {
    if (layers.empty()) throw ValidationError("lhr_loss: no layers");
    LhrResult out;
    out.grads.resize(layers.size());
    out.layer_mean_hr.resize(layers.size());
    for (std::size_t li = 0; li < layers.size(); ++li) {
        const auto& layer = layers[li];
        if (layer.weights.empty())
            throw ValidationError("lhr_loss: layer '" + layer.id + "' is empty");
        const std::size_t n = layer.weights.size();
        std::vector<double> point_grads(n);
        double mean_hr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const InterpHr ih = interp_hr(layer.weights[i], layer.scale, lut);
            mean_hr += ih.hr;
            point_grads[i] = ih.grad;
            if (ih.clamped) ++out.clamped_count;
        }
        mean_hr /= static_cast<double>(n);
        out.layer_mean_hr[li] = mean_hr;
        out.loss += mean_hr * mean_hr;
        // d(mean_hr^2)/dw = 2 * mean_hr * (1/n) * dhr/dw
        const double outer = 2.0 * mean_hr / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) point_grads[i] *= outer;
        out.grads[li] = std::move(point_grads);
    }
    return out;
}

std::vector<std::int32_t> quantize_layer(const FloatWeightLayer& layer, int q) {
    const double lo = static_cast<double>(int_min_for(q));
    const double hi = static_cast<double>(int_max_for(q));
    std::vector<std::int32_t> out;
    out.reserve(layer.weights.size());
    for (double w : layer.weights) {
        double x = std::nearbyint(w / layer.scale);
        if (x < lo) x = lo;
        if (x > hi) x = hi;
        out.push_back(static_cast<std::int32_t>(x));
    }
    return out;
}

namespace {

double quantized_hr(const std::vector<FloatWeightLayer>& layers, int q) {
    std::uint64_t hm = 0;
    std::uint64_t bits = 0;
    for (const auto& layer : layers) {
        const auto qvals = quantize_layer(layer, q);
        hm += hamming(qvals, q).hm;
        bits += qvals.size() * static_cast<std::uint64_t>(q);
    }
    return static_cast<double>(hm) / static_cast<double>(bits);
}

double mean_interp_hr(const std::vector<FloatWeightLayer>& layers, const HrLookup& lut) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& layer : layers) {
        for (double w : layer.weights) sum += interp_hr(w, layer.scale, lut).hr;
        n += layer.weights.size();
    }
    return sum / static_cast<double>(n);
}

}  // namespace

FinetuneReport finetune(std::vector<FloatWeightLayer> layers, const HrLookup& lut, double lambda,
                        int steps, double lr, bool anchor_enabled) {
    if (lambda < 0.0) throw ValidationError("finetune: lambda must be >= 0");
    if (!(lr > 0.0)) throw ValidationError("finetune: lr must be > 0");
    if (layers.empty()) throw ValidationError("finetune: no layers");

    const std::vector<FloatWeightLayer> anchors = layers;
    FinetuneReport report;
    report.interp_hr_before = mean_interp_hr(layers, lut);
    report.quant_hr_before = quantized_hr(layers, lut.q());

    double prev_loss = std::numeric_limits<double>::infinity();
    int rising = 0;
    for (int step = 0; step < steps; ++step) {
        const LhrResult hr = lhr_loss(layers, lut);
        double loss = lambda * hr.loss;
        for (std::size_t li = 0; li < layers.size(); ++li) {
            auto& w = layers[li].weights;
            const auto& w0 = anchors[li].weights;
            for (std::size_t i = 0; i < w.size(); ++i) {
                double g = lambda * hr.grads[li][i];
                if (anchor_enabled) {
                    const double d = w[i] - w0[i];
                    loss += d * d;
                    g += 2.0 * d;
                }
                w[i] -= lr * g;
            }
        }
        ++report.steps_run;
        if (loss > prev_loss) {
            if (++rising >= 10) {
                report.aborted = true;
                break;
            }
        } else {
            rising = 0;
        }
        prev_loss = loss;
    }

    report.interp_hr_after = mean_interp_hr(layers, lut);
    report.quant_hr_after = quantized_hr(layers, lut.q());
    report.layers = std::move(layers);
    return report;
}

}  // namespace aimsim
