#pragma once

#include <string>
#include <string_view>

#include "brs/layers.hpp"
#include "brs/rng.hpp"
#include "brs/tensor.hpp"

namespace brs {

// Squashing activation + discretization strategy for the latent.
enum class BinarizerKind { hardtanh, tanh, sigmoid, stochastic, gumbel_sigmoid };

BinarizerKind binarizer_from_name(std::string_view name);
std::string_view binarizer_name(BinarizerKind kind);
constexpr int kBinarizerVariantCount = 5;
BinarizerKind binarizer_variant(int index);

struct GumbelConfig {
    double tau = 1.0;
    double tau_initial = 1.0;
    double anneal_factor = 0.97;
    double tau_floor = 0.3;
};

// Maps encoder features into [-1, 1]. Stochastic variants draw from rng in
// train mode; eval mode is deterministic for every variant (zero noise for
// gumbel, plain threshold for stochastic).
Tensor activate(const Tensor& e, BinarizerKind kind, const GumbelConfig& cfg, Mode mode,
                Rng* rng = nullptr);

// d activation / d e, given the activation input e and output z. For the
// gumbel variant the derivative conditions on the noise actually drawn,
// which it can recover from z and tau alone.
Tensor activate_backward(const Tensor& grad_z, const Tensor& e, const Tensor& z,
                         BinarizerKind kind, const GumbelConfig& cfg);

// Discretizes z in [-1,1] to exactly {-1,+1}. Deterministic variants
// threshold at 0; the stochastic variant in train mode emits +1 with
// probability (1+z)/2.
Tensor binarize_forward(const Tensor& z, BinarizerKind kind, Mode mode, Rng* rng = nullptr);

// Straight-through: gradient passes unchanged where -1 <= z <= 1, else 0.
// Identical for all five variants.
Tensor binarize_backward(const Tensor& grad_out, const Tensor& z);

// The surrogate used in place of the discretization when a differentiable
// forward is required: clamp(z, -1, 1).
Tensor binarize_surrogate(const Tensor& z);

// tau = max(tau_floor, tau_initial * anneal_factor^epoch). Updates cfg.tau
// and returns it.
double anneal_temperature(GumbelConfig& cfg, int epoch);

}  // namespace brs
