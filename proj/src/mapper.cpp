#include "dcdir/mapper.hpp"

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

MlpMapper MlpMapper::init(int dim, Rng& rng) {
  if (dim < 1) throw ConfigError("mapper: dim must be >= 1");
  const std::size_t d = static_cast<std::size_t>(dim);
  MlpMapper m;
  m.dim = dim;
  m.W1 = Parameter("mlp.W1", glorot(rng, 2 * d, d));
  m.b1 = Parameter("mlp.b1", Tensor::vec(2 * d));
  m.W2 = Parameter("mlp.W2", glorot(rng, d, 2 * d));
  m.b2 = Parameter("mlp.b2", Tensor::vec(d));
  return m;
}

std::vector<Parameter*> MlpMapper::params() { return {&W1, &b1, &W2, &b2}; }

Tape::Id map_feature(Tape& tape, MlpMapper& m, Tape::Id input, double keep_prob, Rng* rng,
                     bool training) {
  Tape::Id hidden =
      tape.tanh_op(tape.affine(tape.param(m.W1), input, tape.param(m.b1)));
  if (training && keep_prob < 1.0 && rng != nullptr)
    hidden = tape.dropout(hidden, keep_prob, *rng, true);
  return tape.affine(tape.param(m.W2), hidden, tape.param(m.b2));
}

Tensor map_feature_value(const MlpMapper& m, const Tensor& input) {
  Tensor hidden;
  affine_into(m.W1.value, input, &m.b1.value, hidden);
  for (auto& v : hidden.data) v = std::tanh(v);
  Tensor out;
  affine_into(m.W2.value, hidden, &m.b2.value, out);
  return out;
}

Tape::Id cross_loss(Tape& tape, MlpMapper& m,
                    std::span<const std::pair<const Tensor*, const Tensor*>> pairs,
                    double keep_prob, Rng* rng, bool training) {
  if (pairs.empty()) throw DomainError("cross_loss: empty pair list");
  std::vector<Tape::Id> terms;
  terms.reserve(pairs.size());
  for (const auto& [source_feat, target_feat] : pairs) {
    if (source_feat->size() != target_feat->size())
      throw DimensionError("cross_loss: features " + source_feat->shape_str() + " vs " +
                           target_feat->shape_str());
    Tape::Id mapped =
        map_feature(tape, m, tape.constant(source_feat), keep_prob, rng, training);
    terms.push_back(tape.sum_squares(tape.sub(mapped, tape.constant(target_feat))));
  }
  return terms.size() == 1 ? terms[0] : tape.add_n(terms);
}

}  // namespace dcdir
