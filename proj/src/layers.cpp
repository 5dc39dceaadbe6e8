#include "brs/layers.hpp"

#include <cmath>
#include <string>

namespace brs {

namespace {

// Layers accept (C,H,W) or (N,C,H,W); internally everything is 4D.
Tensor as_4d(const Tensor& t, bool& was_3d) {
    if (t.rank() == 4) {
        was_3d = false;
        return t;
    }
    if (t.rank() == 3) {
        was_3d = true;
        return t.reshaped({1, t.dim(0), t.dim(1), t.dim(2)});
    }
    throw ShapeError("expected rank 3 or 4 tensor, got " + t.shape_str());
}

Tensor restore_rank(Tensor t, bool was_3d) {
    if (was_3d) return t.reshaped({t.dim(1), t.dim(2), t.dim(3)});
    return t;
}

}  // namespace

ConvLayerParams ConvLayerParams::make(int out_ch, int in_ch, int kh, int kw, int stride,
                                      int padding) {
    ConvLayerParams p;
    p.weights = Tensor({out_ch, in_ch, kh, kw});
    p.bias = Tensor({out_ch});
    p.stride = stride;
    p.padding = padding;
    return p;
}

void ConvLayerParams::init_weights(Rng& rng, double scale) {
    const double fan_in = static_cast<double>(in_channels()) * kernel_h() * kernel_w();
    const double bound = scale * std::sqrt(6.0 / fan_in);
    for (std::int64_t i = 0; i < weights.numel(); ++i) weights[i] = rng.uniform(-bound, bound);
    for (std::int64_t i = 0; i < bias.numel(); ++i) bias[i] = 0.0;
}

Tensor conv2d_forward(const Tensor& input, const ConvLayerParams& params) {
    bool was_3d = false;
    Tensor x = as_4d(input, was_3d);
    const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int oc = params.out_channels(), kh = params.kernel_h(), kw = params.kernel_w();
    const int s = params.stride, p = params.padding;
    if (ic != params.in_channels()) {
        throw ShapeError("conv2d: input " + x.shape_str() + " has " + std::to_string(ic) +
                         " channels but weights " + params.weights.shape_str() + " expect " +
                         std::to_string(params.in_channels()));
    }
    if (h + 2 * p < kh || w + 2 * p < kw) {
        throw ShapeError("conv2d: padded input " + x.shape_str() + " smaller than kernel " +
                         params.weights.shape_str());
    }
    const int oh = (h + 2 * p - kh) / s + 1;
    const int ow = (w + 2 * p - kw) / s + 1;

    Tensor y({n, oc, oh, ow});
    for (int in = 0; in < n; ++in) {
        for (int co = 0; co < oc; ++co) {
            const double b = params.bias[co];
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    double acc = b;
                    for (int ci = 0; ci < ic; ++ci) {
                        for (int ky = 0; ky < kh; ++ky) {
                            const int iy = oy * s - p + ky;
                            if (iy < 0 || iy >= h) continue;
                            for (int kx = 0; kx < kw; ++kx) {
                                const int ix = ox * s - p + kx;
                                if (ix < 0 || ix >= w) continue;
                                acc += x.at4(in, ci, iy, ix) *
                                       params.weights.at4(co, ci, ky, kx);
                            }
                        }
                    }
                    y.at4(in, co, oy, ox) = acc;
                }
            }
        }
    }
    return restore_rank(std::move(y), was_3d);
}

ConvGrads conv2d_backward(const Tensor& input, const ConvLayerParams& params,
                          const Tensor& grad_output) {
    bool was_3d = false;
    Tensor x = as_4d(input, was_3d);
    bool go_3d = false;
    Tensor gy = as_4d(grad_output, go_3d);
    const int n = x.dim(0), ic = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int oc = params.out_channels(), kh = params.kernel_h(), kw = params.kernel_w();
    const int s = params.stride, p = params.padding;
    const int oh = gy.dim(2), ow = gy.dim(3);

    ConvGrads g;
    g.input = Tensor({n, ic, h, w});
    g.weights = Tensor::zeros_like(params.weights);
    g.bias = Tensor::zeros_like(params.bias);

    for (int in = 0; in < n; ++in) {
        for (int co = 0; co < oc; ++co) {
            for (int oy = 0; oy < oh; ++oy) {
                for (int ox = 0; ox < ow; ++ox) {
                    const double gout = gy.at4(in, co, oy, ox);
                    g.bias[co] += gout;
                    for (int ci = 0; ci < ic; ++ci) {
                        for (int ky = 0; ky < kh; ++ky) {
                            const int iy = oy * s - p + ky;
                            if (iy < 0 || iy >= h) continue;
                            for (int kx = 0; kx < kw; ++kx) {
                                const int ix = ox * s - p + kx;
                                if (ix < 0 || ix >= w) continue;
                                g.weights.at4(co, ci, ky, kx) += gout * x.at4(in, ci, iy, ix);
                                g.input.at4(in, ci, iy, ix) +=
                                    gout * params.weights.at4(co, ci, ky, kx);
                            }
                        }
                    }
                }
            }
        }
    }
    g.input = restore_rank(std::move(g.input), was_3d);
    return g;
}

BatchNormParams BatchNormParams::make(int channels) {
    BatchNormParams p;
    p.gamma = Tensor::full({channels}, 1.0);
    p.beta = Tensor({channels});
    p.running_mean = Tensor({channels});
    p.running_var = Tensor::full({channels}, 1.0);
    return p;
}

Tensor batchnorm_forward(const Tensor& input, BatchNormParams& params, Mode mode,
                         BatchNormCache* cache, bool update_running) {
    bool was_3d = false;
    Tensor x = as_4d(input, was_3d);
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (c != params.channels()) {
        throw ShapeError("batchnorm: input " + x.shape_str() + " vs params with " +
                         std::to_string(params.channels()) + " channels");
    }
    const std::int64_t count = static_cast<std::int64_t>(n) * h * w;
    if (mode == Mode::train && count < 2) {
        throw ShapeError("batchnorm: train mode needs at least 2 values per channel, got " +
                         std::to_string(count));
    }

    Tensor xhat({n, c, h, w});
    std::vector<double> inv_std(static_cast<std::size_t>(c));
    Tensor y({n, c, h, w});

    for (int ci = 0; ci < c; ++ci) {
        double mean, var;
        if (mode == Mode::train) {
            double sum = 0.0;
            for (int in = 0; in < n; ++in)
                for (int iy = 0; iy < h; ++iy)
                    for (int ix = 0; ix < w; ++ix) sum += x.at4(in, ci, iy, ix);
            mean = sum / static_cast<double>(count);
            double sq = 0.0;
            for (int in = 0; in < n; ++in)
                for (int iy = 0; iy < h; ++iy)
                    for (int ix = 0; ix < w; ++ix) {
                        const double d = x.at4(in, ci, iy, ix) - mean;
                        sq += d * d;
                    }
            var = sq / static_cast<double>(count);
            if (update_running) {
                params.running_mean[ci] =
                    (1.0 - params.momentum) * params.running_mean[ci] + params.momentum * mean;
                params.running_var[ci] =
                    (1.0 - params.momentum) * params.running_var[ci] + params.momentum * var;
            }
        } else {
            mean = params.running_mean[ci];
            var = params.running_var[ci];
        }
        const double istd = 1.0 / std::sqrt(var + params.epsilon);
        inv_std[static_cast<std::size_t>(ci)] = istd;
        const double g = params.gamma[ci], b = params.beta[ci];
        for (int in = 0; in < n; ++in)
            for (int iy = 0; iy < h; ++iy)
                for (int ix = 0; ix < w; ++ix) {
                    const double xh = (x.at4(in, ci, iy, ix) - mean) * istd;
                    xhat.at4(in, ci, iy, ix) = xh;
                    y.at4(in, ci, iy, ix) = g * xh + b;
                }
    }
    if (cache) {
        cache->mode = mode;
        cache->xhat = xhat;
        cache->inv_std = std::move(inv_std);
    }
    return restore_rank(std::move(y), was_3d);
}

BatchNormGrads batchnorm_backward(const Tensor& grad_output, const BatchNormParams& params,
                                  const BatchNormCache& cache) {
    bool go_3d = false;
    Tensor gy = as_4d(grad_output, go_3d);
    const Tensor& xhat = cache.xhat;
    const int n = xhat.dim(0), c = xhat.dim(1), h = xhat.dim(2), w = xhat.dim(3);
    const double count = static_cast<double>(static_cast<std::int64_t>(n) * h * w);

    BatchNormGrads g;
    g.input = Tensor({n, c, h, w});
    g.gamma = Tensor::zeros_like(params.gamma);
    g.beta = Tensor::zeros_like(params.beta);

    for (int ci = 0; ci < c; ++ci) {
        double sum_gy = 0.0, sum_gy_xhat = 0.0;
        for (int in = 0; in < n; ++in)
            for (int iy = 0; iy < h; ++iy)
                for (int ix = 0; ix < w; ++ix) {
                    const double go = gy.at4(in, ci, iy, ix);
                    sum_gy += go;
                    sum_gy_xhat += go * xhat.at4(in, ci, iy, ix);
                }
        g.beta[ci] = sum_gy;
        g.gamma[ci] = sum_gy_xhat;

        const double gamma = params.gamma[ci];
        const double istd = cache.inv_std[static_cast<std::size_t>(ci)];
        for (int in = 0; in < n; ++in)
            for (int iy = 0; iy < h; ++iy)
                for (int ix = 0; ix < w; ++ix) {
                    const double go = gy.at4(in, ci, iy, ix);
                    double gx;
                    if (cache.mode == Mode::train) {
                        // Batch statistics depend on the input, so the
                        // mean/variance terms appear in the gradient.
                        gx = gamma * istd / count *
                             (count * go - sum_gy - xhat.at4(in, ci, iy, ix) * sum_gy_xhat);
                    } else {
                        gx = gamma * istd * go;
                    }
                    g.input.at4(in, ci, iy, ix) = gx;
                }
    }
    g.input = restore_rank(std::move(g.input), go_3d);
    return g;
}

Tensor relu_forward(const Tensor& input) {
    Tensor y = input;
    for (std::int64_t i = 0; i < y.numel(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
    return y;
}

Tensor relu_backward(const Tensor& grad_output, const Tensor& input) {
    require_same_shape(grad_output, input, "relu_backward");
    Tensor gx = grad_output;
    for (std::int64_t i = 0; i < gx.numel(); ++i) {
        if (!(input[i] > 0.0)) gx[i] = 0.0;
    }
    return gx;
}

Tensor subpixel_forward(const Tensor& input) {
    bool was_3d = false;
    Tensor x = as_4d(input, was_3d);
    const int n = x.dim(0), c4 = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (c4 % 4 != 0) {
        throw ShapeError("subpixel: channel count " + std::to_string(c4) +
                         " not divisible by 4");
    }
    const int c = c4 / 4;
    Tensor y({n, c, 2 * h, 2 * w});
    for (int in = 0; in < n; ++in)
        for (int co = 0; co < c; ++co)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const int ci = co * 4 + dy * 2 + dx;
                    for (int iy = 0; iy < h; ++iy)
                        for (int ix = 0; ix < w; ++ix)
                            y.at4(in, co, 2 * iy + dy, 2 * ix + dx) = x.at4(in, ci, iy, ix);
                }
    return restore_rank(std::move(y), was_3d);
}

Tensor subpixel_inverse(const Tensor& input) {
    bool was_3d = false;
    Tensor y = as_4d(input, was_3d);
    const int n = y.dim(0), c = y.dim(1), h2 = y.dim(2), w2 = y.dim(3);
    if (h2 % 2 != 0 || w2 % 2 != 0) {
        throw ShapeError("subpixel_inverse: spatial dims of " + y.shape_str() + " must be even");
    }
    Tensor x({n, c * 4, h2 / 2, w2 / 2});
    for (int in = 0; in < n; ++in)
        for (int co = 0; co < c; ++co)
            for (int dy = 0; dy < 2; ++dy)
                for (int dx = 0; dx < 2; ++dx) {
                    const int ci = co * 4 + dy * 2 + dx;
                    for (int iy = 0; iy < h2 / 2; ++iy)
                        for (int ix = 0; ix < w2 / 2; ++ix)
                            x.at4(in, ci, iy, ix) = y.at4(in, co, 2 * iy + dy, 2 * ix + dx);
                }
    return restore_rank(std::move(x), was_3d);
}

}  // namespace brs
