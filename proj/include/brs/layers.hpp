#pragma once

#include "brs/rng.hpp"
#include "brs/tensor.hpp"

namespace brs {

enum class Mode { train, eval };

// 2D convolution with square kernels. Weights laid out (out_ch, in_ch, kh, kw).
struct ConvLayerParams {
    Tensor weights;
    Tensor bias;
    int stride = 1;
    int padding = 0;

    int out_channels() const { return weights.dim(0); }
    int in_channels() const { return weights.dim(1); }
    int kernel_h() const { return weights.dim(2); }
    int kernel_w() const { return weights.dim(3); }

    static ConvLayerParams make(int out_ch, int in_ch, int kh, int kw, int stride, int padding);
    // Uniform init in +-scale * sqrt(6 / fan_in), zero bias.
    void init_weights(Rng& rng, double scale = 1.0);
};

struct ConvGrads {
    Tensor input;
    Tensor weights;
    Tensor bias;
};

// Input (N, C, H, W) -> output (N, OC, OH, OW) with
// OH = (H + 2*pad - kh) / stride + 1.
Tensor conv2d_forward(const Tensor& input, const ConvLayerParams& params);
ConvGrads conv2d_backward(const Tensor& input, const ConvLayerParams& params,
                          const Tensor& grad_output);

struct BatchNormParams {
    Tensor gamma;
    Tensor beta;
    Tensor running_mean;
    Tensor running_var;
    double momentum = 0.1;
    double epsilon = 1e-5;

    int channels() const { return gamma.dim(0); }
    static BatchNormParams make(int channels);
};

// Saved by the forward pass for the matching backward.
struct BatchNormCache {
    Mode mode = Mode::train;
    Tensor xhat;                   // normalized input, same shape as input
    std::vector<double> inv_std;   // per channel
};

// Train mode normalizes with batch statistics over (N, H, W) per channel and,
// when update_running is set, folds them into the running estimates. Eval
// mode uses the running estimates only.
Tensor batchnorm_forward(const Tensor& input, BatchNormParams& params, Mode mode,
                         BatchNormCache* cache = nullptr, bool update_running = true);

struct BatchNormGrads {
    Tensor input;
    Tensor gamma;
    Tensor beta;
};

BatchNormGrads batchnorm_backward(const Tensor& grad_output, const BatchNormParams& params,
                                  const BatchNormCache& cache);

Tensor relu_forward(const Tensor& input);
// Gradient is passed where input > 0; the subgradient at exactly 0 is 0.
Tensor relu_backward(const Tensor& grad_output, const Tensor& input);

// (N, 4C, h, w) -> (N, C, 2h, 2w). Output pixel (2y+dy, 2x+dx) of channel c
// reads input channel c*4 + dy*2 + dx. Bijective.
Tensor subpixel_forward(const Tensor& input);
// Exact inverse rearrangement: (N, C, 2h, 2w) -> (N, 4C, h, w).
Tensor subpixel_inverse(const Tensor& input);
inline Tensor subpixel_backward(const Tensor& grad_output) { return subpixel_inverse(grad_output); }

}  // namespace brs
