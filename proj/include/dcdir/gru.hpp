#pragma once

#include <span>
#include <string>
#include <vector>

#include "dcdir/autodiff.hpp"

namespace dcdir {

/// Gated recurrent cell with hidden size equal to the input size. Update
/// gate, reset gate, candidate with the reset applied to the recurrent
/// term, then the gated interpolation with the previous state.
struct GruCell {
  int dim = 0;
  Parameter Wx, Wr, Wh;  // input weights, dim x dim
  Parameter Ux, Ur, Uh;  // recurrent weights, dim x dim
  Parameter bx, br, bh;  // biases

  static GruCell init(int dim, Rng& rng, const std::string& prefix);
  std::vector<Parameter*> params();
};

/// One recurrence step on the tape.
Tape::Id gru_step(Tape& tape, GruCell& cell, Tape::Id input, Tape::Id h_prev);

/// Runs the cell over a sequence from a zero initial state and returns the
/// final hidden state.
Tape::Id gru_encode(Tape& tape, GruCell& cell, std::span<const Tape::Id> inputs);

/// Forward-only step/encoder sharing the same kernels as the tape path, so
/// the two agree bitwise. Used where no gradient is needed.
Tensor gru_step_value(const GruCell& cell, const Tensor& input, const Tensor& h_prev);
Tensor gru_encode_value(const GruCell& cell, std::span<const Tensor> inputs);

}  // namespace dcdir
