#pragma once

#include "brs/tensor.hpp"

namespace brs {

// Per-parameter Adam accumulator.
struct AdamState {
    Tensor m;
    Tensor v;
    std::int64_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double lr = 1e-3;
    double epsilon = 1e-8;

    static AdamState make(const Tensor& param, double lr = 1e-3, double beta1 = 0.9,
                          double beta2 = 0.999);
};

// Bias-corrected Adam update, applied in place. state.lr is the step size
// for this call, so schedules just overwrite it between steps.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state);

}  // namespace brs
