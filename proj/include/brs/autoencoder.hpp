#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "brs/adam.hpp"
#include "brs/binarizer.hpp"
#include "brs/layers.hpp"

namespace brs {

struct AutoencoderConfig {
    int layers = 2;          // L: conv layers per side
    int channels = 8;        // C: encoder channels == latent channels
    int input_channels = 3;
    BinarizerKind binarizer = BinarizerKind::hardtanh;
    GumbelConfig gumbel;

    void validate() const;
    int downsample_factor() const { return 1 << layers; }
};

// Raw latent bits for one frame: C * W * H / 2^(2L). Dims must divide 2^L.
std::int64_t latent_bits_per_frame(const AutoencoderConfig& cfg, int height, int width);

struct EncDecLayer {
    ConvLayerParams conv;
    BatchNormParams bn;
};

// Encoder: L x (conv stride 2 -> batchnorm), ReLU between layers, the final
// batchnorm output feeds the binarizer activation. Decoder: L x (conv stride
// 1 to 4C -> batchnorm -> ReLU -> subpixel x2), then a 3x3 projection back to
// input_channels with a tanh squashing the output into [-1, 1].
struct ModelParams {
    AutoencoderConfig config;
    std::vector<EncDecLayer> encoder;
    std::vector<EncDecLayer> decoder;
    ConvLayerParams output_proj;

    static ModelParams init(const AutoencoderConfig& cfg, std::uint64_t seed);

    // Trainable tensors in checkpoint order.
    std::vector<Tensor*> trainable();
    std::vector<std::string> trainable_names() const;
};

// Signed difference between two [0,1] frames, stored as (C, H, W) with the
// pre-padding dims remembered so decode can crop.
struct ResidualFrame {
    Tensor data;
    int orig_height = 0;
    int orig_width = 0;

    static ResidualFrame wrap(Tensor chw);
};

// Right/bottom reflect padding of a (C, H, W) tensor up to multiples of
// `multiple`, and the matching crop.
Tensor reflect_pad_to_multiple(const Tensor& chw, int multiple);
Tensor crop_hw(const Tensor& chw, int height, int width);

// Everything the backward pass needs from one forward evaluation.
struct ForwardCache {
    Tensor input;
    std::vector<Tensor> enc_conv_in, enc_conv_out, enc_bn_out;
    std::vector<BatchNormCache> enc_bn;
    Tensor features;  // e: final encoder batchnorm output
    Tensor z;         // activation output in [-1, 1]
    Tensor codes;     // binarized (or surrogate) latent fed to the decoder
    std::vector<Tensor> dec_conv_in, dec_conv_out, dec_bn_out, dec_relu_out;
    std::vector<BatchNormCache> dec_bn;
    Tensor proj_in, proj_out, rhat;
};

// Batched forward over (N, IC, H, W). In train mode batchnorm uses batch
// statistics and stochastic binarizers draw from rng; ste_surrogate replaces
// the discretization with clamp(z) to obtain a differentiable forward.
Tensor ae_forward(ModelParams& params, const Tensor& input, Mode mode, bool ste_surrogate,
                  Rng* rng, ForwardCache* cache, bool update_running = true);

// Gradients for every trainable tensor, aligned with ModelParams::trainable().
std::vector<Tensor> ae_backward(ModelParams& params, const ForwardCache& cache,
                                const Tensor& grad_rhat);

// Encoder half only: residual -> feature map e of shape (C, H/2^L, W/2^L).
Tensor encode(const ResidualFrame& r, ModelParams& params, Mode mode = Mode::eval);
// Decoder half only: +-1 latent -> residual estimate, cropped to orig dims.
ResidualFrame decode(const Tensor& codes, ModelParams& params, int orig_height, int orig_width,
                     Mode mode = Mode::eval);

// Mean squared elementwise difference; the sum is accumulated in long double.
double reconstruction_loss(const Tensor& r, const Tensor& rhat);

struct TrainConfig {
    double lr = 1e-3;
    int lr_halving_period_epochs = 5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    int batch_size = 10;
    int epochs = 50;
    std::uint64_t seed = 0;
};

struct TrainResult {
    ModelParams params;
    std::vector<double> loss_history;  // one mean per-element MSE per epoch
    std::vector<double> lr_history;
    std::vector<double> tau_history;
    std::vector<double> step_loss_history;  // per optimizer step, before the update
};

double lr_for_epoch(const TrainConfig& cfg, int epoch);

TrainResult train_autoencoder(const std::vector<ResidualFrame>& dataset, const TrainConfig& tcfg,
                              const AutoencoderConfig& acfg);

// Checkpoint file: magic "BRAE", version, config fields, then per-layer dims
// and raw little-endian f64 arrays in trainable order plus batchnorm
// running statistics. Byte-exact round trip.
std::vector<std::uint8_t> serialize_model(const ModelParams& params);
ModelParams deserialize_model(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);
std::uint64_t model_fingerprint(const ModelParams& params);

}  // namespace brs
