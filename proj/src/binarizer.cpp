#include "brs/binarizer.hpp"

#include <cmath>

namespace brs {

namespace {

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

constexpr double kRangeSlack = 1e-6;  // absorbs float drift from tanh

}  // namespace

BinarizerKind binarizer_from_name(std::string_view name) {
    if (name == "hardtanh") return BinarizerKind::hardtanh;
    if (name == "tanh") return BinarizerKind::tanh;
    if (name == "sigmoid") return BinarizerKind::sigmoid;
    if (name == "stochastic") return BinarizerKind::stochastic;
    if (name == "gumbel") return BinarizerKind::gumbel_sigmoid;
    throw ConfigError("unknown binarizer '" + std::string(name) +
                      "' (expected hardtanh|tanh|sigmoid|stochastic|gumbel)");
}

std::string_view binarizer_name(BinarizerKind kind) {
    switch (kind) {
        case BinarizerKind::hardtanh: return "hardtanh";
        case BinarizerKind::tanh: return "tanh";
        case BinarizerKind::sigmoid: return "sigmoid";
        case BinarizerKind::stochastic: return "stochastic";
        case BinarizerKind::gumbel_sigmoid: return "gumbel";
    }
    throw Error("invalid binarizer kind");
}

BinarizerKind binarizer_variant(int index) {
    switch (index) {
        case 0: return BinarizerKind::hardtanh;
        case 1: return BinarizerKind::tanh;
        case 2: return BinarizerKind::sigmoid;
        case 3: return BinarizerKind::stochastic;
        case 4: return BinarizerKind::gumbel_sigmoid;
        default: throw Error("binarizer variant index out of range");
    }
}

Tensor activate(const Tensor& e, BinarizerKind kind, const GumbelConfig& cfg, Mode mode,
                Rng* rng) {
    e.require_finite("activate");
    Tensor z = e;
    switch (kind) {
        case BinarizerKind::hardtanh:
            for (std::int64_t i = 0; i < z.numel(); ++i)
                z[i] = std::clamp(z[i], -1.0, 1.0);
            break;
        case BinarizerKind::tanh:
        case BinarizerKind::stochastic:
            for (std::int64_t i = 0; i < z.numel(); ++i) z[i] = std::tanh(z[i]);
            break;
        case BinarizerKind::sigmoid:
            for (std::int64_t i = 0; i < z.numel(); ++i) z[i] = 2.0 * (sigm(z[i]) - 0.5);
            break;
        case BinarizerKind::gumbel_sigmoid: {
            if (cfg.tau <= 0.0) throw ConfigError("gumbel temperature must be positive");
            const bool noisy = mode == Mode::train;
            if (noisy && rng == nullptr) {
                throw ConfigError("gumbel activation in train mode needs a seeded rng");
            }
            for (std::int64_t i = 0; i < z.numel(); ++i) {
                const double gk = noisy ? rng->gumbel() : 0.0;
                const double gl = noisy ? rng->gumbel() : 0.0;
                z[i] = 2.0 * (sigm((z[i] + gk - gl) / cfg.tau) - 0.5);
            }
            break;
        }
    }
    return z;
}

Tensor activate_backward(const Tensor& grad_z, const Tensor& e, const Tensor& z,
                         BinarizerKind kind, const GumbelConfig& cfg) {
    require_same_shape(grad_z, z, "activate_backward");
    require_same_shape(e, z, "activate_backward");
    Tensor ge = grad_z;
    switch (kind) {
        case BinarizerKind::hardtanh:
            for (std::int64_t i = 0; i < ge.numel(); ++i) {
                if (e[i] < -1.0 || e[i] > 1.0) ge[i] = 0.0;
            }
            break;
        case BinarizerKind::tanh:
        case BinarizerKind::stochastic:
            for (std::int64_t i = 0; i < ge.numel(); ++i) ge[i] *= 1.0 - z[i] * z[i];
            break;
        case BinarizerKind::sigmoid:
            for (std::int64_t i = 0; i < ge.numel(); ++i) ge[i] *= (1.0 - z[i] * z[i]) / 2.0;
            break;
        case BinarizerKind::gumbel_sigmoid:
            for (std::int64_t i = 0; i < ge.numel(); ++i)
                ge[i] *= (1.0 - z[i] * z[i]) / (2.0 * cfg.tau);
            break;
    }
    return ge;
}

Tensor binarize_forward(const Tensor& z, BinarizerKind kind, Mode mode, Rng* rng) {
    Tensor out = z;
    const bool sample = kind == BinarizerKind::stochastic && mode == Mode::train;
    if (sample && rng == nullptr) {
        throw ConfigError("stochastic binarization in train mode needs a seeded rng");
    }
    for (std::int64_t i = 0; i < out.numel(); ++i) {
        const double v = out[i];
        if (v < -1.0 - kRangeSlack || v > 1.0 + kRangeSlack) {
            throw ShapeError("binarize_forward: value " + std::to_string(v) +
                             " outside [-1, 1]; activation contract violated");
        }
        if (sample) {
            out[i] = rng->uniform() < (1.0 + v) / 2.0 ? 1.0 : -1.0;
        } else {
            out[i] = v >= 0.0 ? 1.0 : -1.0;
        }
    }
    return out;
}

Tensor binarize_backward(const Tensor& grad_out, const Tensor& z) {
    require_same_shape(grad_out, z, "binarize_backward");
    Tensor g = grad_out;
    for (std::int64_t i = 0; i < g.numel(); ++i) {
        if (z[i] < -1.0 || z[i] > 1.0) g[i] = 0.0;
    }
    return g;
}

Tensor binarize_surrogate(const Tensor& z) {
    Tensor out = z;
    for (std::int64_t i = 0; i < out.numel(); ++i) out[i] = std::clamp(out[i], -1.0, 1.0);
    return out;
}

double anneal_temperature(GumbelConfig& cfg, int epoch) {
    if (epoch < 0) throw ConfigError("epoch must be non-negative");
    cfg.tau = std::max(cfg.tau_floor, cfg.tau_initial * std::pow(cfg.anneal_factor, epoch));
    return cfg.tau;
}

}  // namespace brs
