#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dcdir/autodiff.hpp"

namespace dcdir {

/// Perceptron mapping source-domain user features into the target space.
/// tanh between consecutive layers, linear output. The training
/// architecture is d -> 2d -> d; a single linear layer is available as a
/// degenerate test configuration.
struct MlpMapper {
  int dim = 0;
  std::vector<Parameter> weights;
  std::vector<Parameter> biases;

  /// d -> 2d -> d with tanh hidden activation, Glorot-initialized.
  static MlpMapper init(int dim, Rng& rng);
  /// Single linear layer initialized to the identity map.
  static MlpMapper single_linear_identity(int dim);
  std::vector<Parameter*> params();
  std::size_t layer_count() const { return weights.size(); }
};

/// Forward pass on the tape; optional inverted dropout on hidden layers
/// while training.
Tape::Id map_feature(Tape& tape, MlpMapper& m, Tape::Id input, double keep_prob = 1.0,
                     Rng* rng = nullptr, bool training = false);

Tensor map_feature_value(const MlpMapper& m, const Tensor& input);

/// Sum over pairs of |f(u_s) - u_t|^2 with both features entering as
/// constants: the gradient reaches only the mapper's parameters.
Tape::Id cross_loss(Tape& tape, MlpMapper& m,
                    std::span<const std::pair<const Tensor*, const Tensor*>> pairs,
                    double keep_prob = 1.0, Rng* rng = nullptr, bool training = false);

}  // namespace dcdir
