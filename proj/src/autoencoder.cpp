#include "brs/autoencoder.hpp"

#include <algorithm>
#include <cmath>

namespace brs {

void AutoencoderConfig::validate() const {
    if (layers < 1) throw ConfigError("autoencoder needs at least one layer per side");
    if (channels < 1) throw ConfigError("channel count must be positive");
    if (input_channels < 1) throw ConfigError("input channel count must be positive");
    if (gumbel.tau_floor <= 0 || gumbel.tau_initial <= 0 || gumbel.tau <= 0) {
        throw ConfigError("gumbel temperatures must be positive");
    }
    if (gumbel.anneal_factor <= 0 || gumbel.anneal_factor >= 1) {
        throw ConfigError("gumbel anneal factor must lie in (0, 1)");
    }
}

std::int64_t latent_bits_per_frame(const AutoencoderConfig& cfg, int height, int width) {
    const int f = cfg.downsample_factor();
    if (height % f != 0 || width % f != 0) {
        throw ShapeError("latent size undefined: " + std::to_string(height) + "x" +
                         std::to_string(width) + " not divisible by " + std::to_string(f));
    }
    return static_cast<std::int64_t>(cfg.channels) * (height / f) * (width / f);
}

ModelParams ModelParams::init(const AutoencoderConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelParams p;
    p.config = cfg;
    Rng rng(seed);
    for (int l = 0; l < cfg.layers; ++l) {
        EncDecLayer layer;
        const int in_ch = l == 0 ? cfg.input_channels : cfg.channels;
        layer.conv = ConvLayerParams::make(cfg.channels, in_ch, 3, 3, /*stride=*/2, /*padding=*/1);
        layer.conv.init_weights(rng);
        layer.bn = BatchNormParams::make(cfg.channels);
        p.encoder.push_back(std::move(layer));
    }
    for (int l = 0; l < cfg.layers; ++l) {
        EncDecLayer layer;
        layer.conv = ConvLayerParams::make(4 * cfg.channels, cfg.channels, 3, 3, /*stride=*/1,
                                           /*padding=*/1);
        layer.conv.init_weights(rng);
        layer.bn = BatchNormParams::make(4 * cfg.channels);
        p.decoder.push_back(std::move(layer));
    }
    p.output_proj =
        ConvLayerParams::make(cfg.input_channels, cfg.channels, 3, 3, /*stride=*/1, /*padding=*/1);
    // Residuals are small relative to the unit-variance decoder activations;
    // starting the projection near zero puts the initial output at the
    // zero-predictor instead of saturating the tanh.
    p.output_proj.init_weights(rng, 0.05);
    return p;
}

std::vector<Tensor*> ModelParams::trainable() {
    std::vector<Tensor*> out;
    for (auto& l : encoder) {
        out.push_back(&l.conv.weights);
        out.push_back(&l.conv.bias);
        out.push_back(&l.bn.gamma);
        out.push_back(&l.bn.beta);
    }
    for (auto& l : decoder) {
        out.push_back(&l.conv.weights);
        out.push_back(&l.conv.bias);
        out.push_back(&l.bn.gamma);
        out.push_back(&l.bn.beta);
    }
    out.push_back(&output_proj.weights);
    out.push_back(&output_proj.bias);
    return out;
}

std::vector<std::string> ModelParams::trainable_names() const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < encoder.size(); ++i) {
        const std::string base = "encoder." + std::to_string(i);
        out.insert(out.end(), {base + ".conv.weights", base + ".conv.bias", base + ".bn.gamma",
                               base + ".bn.beta"});
    }
    for (std::size_t i = 0; i < decoder.size(); ++i) {
        const std::string base = "decoder." + std::to_string(i);
        out.insert(out.end(), {base + ".conv.weights", base + ".conv.bias", base + ".bn.gamma",
                               base + ".bn.beta"});
    }
    out.insert(out.end(), {"output_proj.weights", "output_proj.bias"});
    return out;
}

ResidualFrame ResidualFrame::wrap(Tensor chw) {
    if (chw.rank() != 3) throw ShapeError("residual frame must be (C, H, W)");
    for (std::int64_t i = 0; i < chw.numel(); ++i) {
        if (chw[i] < -1.0 || chw[i] > 1.0 || !std::isfinite(chw[i])) {
            throw ShapeError("residual values must lie in [-1, 1]");
        }
    }
    ResidualFrame r;
    r.orig_height = chw.dim(1);
    r.orig_width = chw.dim(2);
    r.data = std::move(chw);
    return r;
}

Tensor reflect_pad_to_multiple(const Tensor& chw, int multiple) {
    if (chw.rank() != 3) throw ShapeError("reflect_pad_to_multiple expects (C, H, W)");
    const int c = chw.dim(0), h = chw.dim(1), w = chw.dim(2);
    const int th = (h + multiple - 1) / multiple * multiple;
    const int tw = (w + multiple - 1) / multiple * multiple;
    if (th == h && tw == w) return chw;
    if (th - h > h - 1 || tw - w > w - 1) {
        throw ShapeError("frame " + std::to_string(h) + "x" + std::to_string(w) +
                         " too small to reflect-pad to a multiple of " + std::to_string(multiple));
    }
    Tensor out({c, th, tw});
    for (int ci = 0; ci < c; ++ci)
        for (int y = 0; y < th; ++y) {
            const int sy = y < h ? y : 2 * h - 2 - y;
            for (int x = 0; x < tw; ++x) {
                const int sx = x < w ? x : 2 * w - 2 - x;
                out.at3(ci, y, x) = chw.at3(ci, sy, sx);
            }
        }
    return out;
}

Tensor crop_hw(const Tensor& chw, int height, int width) {
    if (chw.rank() != 3) throw ShapeError("crop_hw expects (C, H, W)");
    if (height > chw.dim(1) || width > chw.dim(2)) {
        throw ShapeError("crop larger than tensor");
    }
    if (height == chw.dim(1) && width == chw.dim(2)) return chw;
    Tensor out({chw.dim(0), height, width});
    for (int c = 0; c < chw.dim(0); ++c)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) out.at3(c, y, x) = chw.at3(c, y, x);
    return out;
}

Tensor ae_forward(ModelParams& params, const Tensor& input, Mode mode, bool ste_surrogate,
                  Rng* rng, ForwardCache* cache, bool update_running) {
    if (input.rank() != 4) throw ShapeError("ae_forward expects (N, C, H, W)");
    const AutoencoderConfig& cfg = params.config;
    const int f = cfg.downsample_factor();
    if (input.dim(1) != cfg.input_channels) {
        throw ShapeError("ae_forward: input " + input.shape_str() + " does not carry " +
                         std::to_string(cfg.input_channels) + " channels");
    }
    if (input.dim(2) % f != 0 || input.dim(3) % f != 0) {
        throw ShapeError("ae_forward: input " + input.shape_str() +
                         " not divisible by 2^L = " + std::to_string(f) +
                         "; reflect-pad to " +
                         std::to_string((input.dim(2) + f - 1) / f * f) + "x" +
                         std::to_string((input.dim(3) + f - 1) / f * f) + " first");
    }

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc = ForwardCache{};
    cc.input = input;

    Tensor x = input;
    const int L = cfg.layers;
    for (int l = 0; l < L; ++l) {
        cc.enc_conv_in.push_back(x);
        Tensor conv = conv2d_forward(x, params.encoder[static_cast<std::size_t>(l)].conv);
        cc.enc_conv_out.push_back(conv);
        BatchNormCache bn_cache;
        Tensor bn = batchnorm_forward(conv, params.encoder[static_cast<std::size_t>(l)].bn, mode,
                                      &bn_cache, update_running);
        cc.enc_bn.push_back(std::move(bn_cache));
        cc.enc_bn_out.push_back(bn);
        x = l + 1 < L ? relu_forward(bn) : bn;  // final layer feeds the binarizer activation
    }
    cc.features = x;

    cc.z = activate(x, cfg.binarizer, cfg.gumbel, mode, rng);
    cc.codes = ste_surrogate ? binarize_surrogate(cc.z)
                             : binarize_forward(cc.z, cfg.binarizer, mode, rng);

    x = cc.codes;
    for (int l = 0; l < L; ++l) {
        cc.dec_conv_in.push_back(x);
        Tensor conv = conv2d_forward(x, params.decoder[static_cast<std::size_t>(l)].conv);
        cc.dec_conv_out.push_back(conv);
        BatchNormCache bn_cache;
        Tensor bn = batchnorm_forward(conv, params.decoder[static_cast<std::size_t>(l)].bn, mode,
                                      &bn_cache, update_running);
        cc.dec_bn.push_back(std::move(bn_cache));
        cc.dec_bn_out.push_back(bn);
        Tensor relu = relu_forward(bn);
        cc.dec_relu_out.push_back(relu);
        x = subpixel_forward(relu);
    }
    cc.proj_in = x;
    cc.proj_out = conv2d_forward(x, params.output_proj);
    Tensor rhat = cc.proj_out;
    for (std::int64_t i = 0; i < rhat.numel(); ++i) rhat[i] = std::tanh(rhat[i]);
    cc.rhat = rhat;
    return rhat;
}

std::vector<Tensor> ae_backward(ModelParams& params, const ForwardCache& cache,
                                const Tensor& grad_rhat) {
    require_same_shape(grad_rhat, cache.rhat, "ae_backward");
    const int L = params.config.layers;

    // through the tanh projection
    Tensor g = grad_rhat;
    for (std::int64_t i = 0; i < g.numel(); ++i) {
        g[i] *= 1.0 - cache.rhat[i] * cache.rhat[i];
    }
    ConvGrads proj = conv2d_backward(cache.proj_in, params.output_proj, g);

    std::vector<ConvGrads> dec_conv(static_cast<std::size_t>(L));
    std::vector<BatchNormGrads> dec_bn(static_cast<std::size_t>(L));
    g = std::move(proj.input);
    for (int l = L - 1; l >= 0; --l) {
        const auto i = static_cast<std::size_t>(l);
        g = subpixel_backward(g);
        g = relu_backward(g, cache.dec_bn_out[i]);
        dec_bn[i] = batchnorm_backward(g, params.decoder[i].bn, cache.dec_bn[i]);
        dec_conv[i] = conv2d_backward(cache.dec_conv_in[i], params.decoder[i].conv,
                                      dec_bn[i].input);
        g = std::move(dec_conv[i].input);
    }

    // straight-through estimator, then the activation
    g = binarize_backward(g, cache.z);
    g = activate_backward(g, cache.features, cache.z, params.config.binarizer,
                          params.config.gumbel);

    std::vector<ConvGrads> enc_conv(static_cast<std::size_t>(L));
    std::vector<BatchNormGrads> enc_bn(static_cast<std::size_t>(L));
    for (int l = L - 1; l >= 0; --l) {
        const auto i = static_cast<std::size_t>(l);
        if (l + 1 < L) g = relu_backward(g, cache.enc_bn_out[i]);
        enc_bn[i] = batchnorm_backward(g, params.encoder[i].bn, cache.enc_bn[i]);
        enc_conv[i] = conv2d_backward(cache.enc_conv_in[i], params.encoder[i].conv,
                                      enc_bn[i].input);
        g = std::move(enc_conv[i].input);
    }

    std::vector<Tensor> grads;
    for (int l = 0; l < L; ++l) {
        const auto i = static_cast<std::size_t>(l);
        grads.push_back(std::move(enc_conv[i].weights));
        grads.push_back(std::move(enc_conv[i].bias));
        grads.push_back(std::move(enc_bn[i].gamma));
        grads.push_back(std::move(enc_bn[i].beta));
    }
    for (int l = 0; l < L; ++l) {
        const auto i = static_cast<std::size_t>(l);
        grads.push_back(std::move(dec_conv[i].weights));
        grads.push_back(std::move(dec_conv[i].bias));
        grads.push_back(std::move(dec_bn[i].gamma));
        grads.push_back(std::move(dec_bn[i].beta));
    }
    grads.push_back(std::move(proj.weights));
    grads.push_back(std::move(proj.bias));
    return grads;
}

Tensor encode(const ResidualFrame& r, ModelParams& params, Mode mode) {
    const AutoencoderConfig& cfg = params.config;
    const int f = cfg.downsample_factor();
    if (r.data.dim(1) % f != 0 || r.data.dim(2) % f != 0) {
        throw ShapeError("encode: frame " + r.data.shape_str() +
                         " not divisible by 2^L = " + std::to_string(f) + "; pad to " +
                         std::to_string((r.data.dim(1) + f - 1) / f * f) + "x" +
                         std::to_string((r.data.dim(2) + f - 1) / f * f));
    }
    Tensor x = r.data.reshaped({1, r.data.dim(0), r.data.dim(1), r.data.dim(2)});
    const int L = cfg.layers;
    for (int l = 0; l < L; ++l) {
        auto& layer = params.encoder[static_cast<std::size_t>(l)];
        x = conv2d_forward(x, layer.conv);
        x = batchnorm_forward(x, layer.bn, mode, nullptr, /*update_running=*/false);
        if (l + 1 < L) x = relu_forward(x);
    }
    return x.reshaped({x.dim(1), x.dim(2), x.dim(3)});
}

ResidualFrame decode(const Tensor& codes, ModelParams& params, int orig_height, int orig_width,
                     Mode mode) {
    if (codes.rank() != 3) throw ShapeError("decode expects a (C, h, w) latent");
    if (codes.dim(0) != params.config.channels) {
        throw ShapeError("decode: latent " + codes.shape_str() + " does not carry " +
                         std::to_string(params.config.channels) + " channels");
    }
    Tensor x = codes.reshaped({1, codes.dim(0), codes.dim(1), codes.dim(2)});
    const int L = params.config.layers;
    for (int l = 0; l < L; ++l) {
        auto& layer = params.decoder[static_cast<std::size_t>(l)];
        x = conv2d_forward(x, layer.conv);
        x = batchnorm_forward(x, layer.bn, mode, nullptr, /*update_running=*/false);
        x = relu_forward(x);
        x = subpixel_forward(x);
    }
    x = conv2d_forward(x, params.output_proj);
    for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = std::tanh(x[i]);
    Tensor chw = x.reshaped({x.dim(1), x.dim(2), x.dim(3)});
    if (orig_height > chw.dim(1) || orig_width > chw.dim(2)) {
        throw ShapeError("decode: latent too small for requested output dims");
    }
    ResidualFrame out;
    out.data = crop_hw(chw, orig_height, orig_width);
    out.orig_height = orig_height;
    out.orig_width = orig_width;
    return out;
}

double reconstruction_loss(const Tensor& r, const Tensor& rhat) {
    require_same_shape(r, rhat, "reconstruction_loss");
    long double acc = 0.0L;
    for (std::int64_t i = 0; i < r.numel(); ++i) {
        const long double d = static_cast<long double>(r[i]) - static_cast<long double>(rhat[i]);
        acc += d * d;
    }
    return static_cast<double>(acc / static_cast<long double>(r.numel()));
}

double lr_for_epoch(const TrainConfig& cfg, int epoch) {
    return cfg.lr * std::pow(0.5, epoch / cfg.lr_halving_period_epochs);
}

TrainResult train_autoencoder(const std::vector<ResidualFrame>& dataset, const TrainConfig& tcfg,
                              const AutoencoderConfig& acfg) {
    if (dataset.empty()) throw ConfigError("training dataset is empty");
    const int c = dataset[0].data.dim(0), h = dataset[0].data.dim(1), w = dataset[0].data.dim(2);
    for (const auto& r : dataset) {
        if (r.data.dim(0) != c || r.data.dim(1) != h || r.data.dim(2) != w) {
            throw ShapeError("training frames must share dims; got " + r.data.shape_str() +
                             " vs (" + std::to_string(c) + ", " + std::to_string(h) + ", " +
                             std::to_string(w) + ")");
        }
    }
    if (tcfg.batch_size < 1 || tcfg.epochs < 1) throw ConfigError("bad batch size or epoch count");

    TrainResult result;
    result.params = ModelParams::init(acfg, tcfg.seed);
    ModelParams& params = result.params;

    std::vector<Tensor*> tensors = params.trainable();
    std::vector<AdamState> states;
    states.reserve(tensors.size());
    for (Tensor* t : tensors) states.push_back(AdamState::make(*t, tcfg.lr, tcfg.beta1, tcfg.beta2));

    Rng loop_rng(tcfg.seed + 1);  // init consumed Rng(seed); keep the streams apart
    std::vector<int> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    const bool gumbel = acfg.binarizer == BinarizerKind::gumbel_sigmoid;
    for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
        const double lr = lr_for_epoch(tcfg, epoch);
        if (gumbel) anneal_temperature(params.config.gumbel, epoch);
        result.lr_history.push_back(lr);
        result.tau_history.push_back(params.config.gumbel.tau);
        loop_rng.shuffle(order);

        long double epoch_loss = 0.0L;
        std::int64_t epoch_elems = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(tcfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(tcfg.batch_size));
            const int n = static_cast<int>(end - start);
            Tensor batch({n, c, h, w});
            for (int b = 0; b < n; ++b) {
                const Tensor& src = dataset[static_cast<std::size_t>(order[start + b])].data;
                std::copy(src.data(), src.data() + src.numel(),
                          batch.data() + static_cast<std::int64_t>(b) * src.numel());
            }

            ForwardCache cache;
            Tensor rhat = ae_forward(params, batch, Mode::train, /*ste_surrogate=*/false,
                                     &loop_rng, &cache);
            const double loss = reconstruction_loss(batch, rhat);
            Tensor grad_rhat = rhat;
            const double scale = 2.0 / static_cast<double>(batch.numel());
            for (std::int64_t i = 0; i < grad_rhat.numel(); ++i) {
                grad_rhat[i] = scale * (rhat[i] - batch[i]);
            }
            std::vector<Tensor> grads = ae_backward(params, cache, grad_rhat);
            for (std::size_t i = 0; i < tensors.size(); ++i) {
                states[i].lr = lr;
                adam_step(*tensors[i], grads[i], states[i]);
            }
            result.step_loss_history.push_back(loss);
            epoch_loss += static_cast<long double>(loss) * static_cast<long double>(batch.numel());
            epoch_elems += batch.numel();
        }
        result.loss_history.push_back(
            static_cast<double>(epoch_loss / static_cast<long double>(epoch_elems)));
    }
    return result;
}

}  // namespace brs
