#include "brs/adam.hpp"

#include <cmath>

namespace brs {

AdamState AdamState::make(const Tensor& param, double lr, double beta1, double beta2) {
    AdamState s;
    s.m = Tensor::zeros_like(param);
    s.v = Tensor::zeros_like(param);
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    return s;
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state) {
    require_same_shape(param, grad, "adam_step");
    require_same_shape(param, state.m, "adam_step state");
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::int64_t i = 0; i < param.numel(); ++i) {
        const double g = grad[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        param[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
}

}  // namespace brs
