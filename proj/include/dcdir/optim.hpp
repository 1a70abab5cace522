#pragma once

#include <span>

#include "dcdir/autodiff.hpp"

namespace dcdir {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam update over the whole set; gradients are zeroed
/// afterwards. Each parameter keeps its own step counter.
void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg);

/// Plain SGD update (used by the translational-embedding pretrainer);
/// gradients are zeroed afterwards.
void sgd_step(std::span<Parameter* const> params, double lr);

void zero_grads(std::span<Parameter* const> params);

}  // namespace dcdir
