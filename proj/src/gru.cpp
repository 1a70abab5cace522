#include "dcdir/gru.hpp"

#include <cmath>

#include "dcdir/errors.hpp"

namespace dcdir {

namespace {
Tensor glorot(Rng& rng, std::size_t rows, std::size_t cols) {
  Tensor t = Tensor::mat(rows, cols);
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (auto& v : t.data) v = rng.uniform(-bound, bound);
  return t;
}
}  // namespace

GruCell GruCell::init(int dim, Rng& rng, const std::string& prefix) {
  if (dim < 1) throw ConfigError("gru: dim must be >= 1");
  const std::size_t d = static_cast<std::size_t>(dim);
  GruCell c;
  c.dim = dim;
  c.Wx = Parameter(prefix + ".Wx", glorot(rng, d, d));
  c.Wr = Parameter(prefix + ".Wr", glorot(rng, d, d));
  c.Wh = Parameter(prefix + ".Wh", glorot(rng, d, d));
  c.Ux = Parameter(prefix + ".Ux", glorot(rng, d, d));
  c.Ur = Parameter(prefix + ".Ur", glorot(rng, d, d));
  c.Uh = Parameter(prefix + ".Uh", glorot(rng, d, d));
  c.bx = Parameter(prefix + ".bx", Tensor::vec(d));
  c.br = Parameter(prefix + ".br", Tensor::vec(d));
  c.bh = Parameter(prefix + ".bh", Tensor::vec(d));
  return c;
}

std::vector<Parameter*> GruCell::params() {
  return {&Wx, &Wr, &Wh, &Ux, &Ur, &Uh, &bx, &br, &bh};
}

Tape::Id gru_step(Tape& tape, GruCell& c, Tape::Id input, Tape::Id h_prev) {
  auto update =
      tape.sigmoid(tape.add(tape.affine(tape.param(c.Wx), input, tape.param(c.bx)),
                            tape.matvec(tape.param(c.Ux), h_prev)));
  auto reset =
      tape.sigmoid(tape.add(tape.affine(tape.param(c.Wr), input, tape.param(c.br)),
                            tape.matvec(tape.param(c.Ur), h_prev)));
  auto candidate =
      tape.tanh_op(tape.add(tape.affine(tape.param(c.Wh), input, tape.param(c.bh)),
                            tape.mul(reset, tape.matvec(tape.param(c.Uh), h_prev))));
  return tape.add(tape.mul(tape.one_minus(update), h_prev), tape.mul(update, candidate));
}

Tape::Id gru_encode(Tape& tape, GruCell& c, std::span<const Tape::Id> inputs) {
  if (inputs.empty()) throw DomainError("gru_encode: empty sequence");
  Tape::Id h = tape.constant(Tensor::vec(static_cast<std::size_t>(c.dim)));
  for (Tape::Id x : inputs) h = gru_step(tape, c, x, h);
  return h;
}

Tensor gru_step_value(const GruCell& c, const Tensor& input, const Tensor& h_prev) {
  const std::size_t d = static_cast<std::size_t>(c.dim);
  Tensor update(Tensor::vec(d)), reset(Tensor::vec(d)), tmp(Tensor::vec(d));
  affine_into(c.Wx.value, input, &c.bx.value, update);
  affine_into(c.Ux.value, h_prev, nullptr, tmp);
  for (std::size_t i = 0; i < d; ++i) update.data[i] = sigmoid_scalar(update.data[i] + tmp.data[i]);
  affine_into(c.Wr.value, input, &c.br.value, reset);
  affine_into(c.Ur.value, h_prev, nullptr, tmp);
  for (std::size_t i = 0; i < d; ++i) reset.data[i] = sigmoid_scalar(reset.data[i] + tmp.data[i]);
  Tensor cand(Tensor::vec(d));
  affine_into(c.Wh.value, input, &c.bh.value, cand);
  affine_into(c.Uh.value, h_prev, nullptr, tmp);
  for (std::size_t i = 0; i < d; ++i)
    cand.data[i] = std::tanh(cand.data[i] + reset.data[i] * tmp.data[i]);
  Tensor h(Tensor::vec(d));
  for (std::size_t i = 0; i < d; ++i)
    h.data[i] = (1.0 - update.data[i]) * h_prev.data[i] + update.data[i] * cand.data[i];
  return h;
}

Tensor gru_encode_value(const GruCell& c, std::span<const Tensor> inputs) {
  if (inputs.empty()) throw DomainError("gru_encode: empty sequence");
  Tensor h = Tensor::vec(static_cast<std::size_t>(c.dim));
  for (const Tensor& x : inputs) h = gru_step_value(c, x, h);
  return h;
}

}  // namespace dcdir
