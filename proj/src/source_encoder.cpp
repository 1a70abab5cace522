#include "dcdir/source_encoder.hpp"

#include <algorithm>

#include "dcdir/errors.hpp"

namespace dcdir {

Tensor item_embedding(const WordTable& table, std::span<const std::string> tokens) {
  if (tokens.empty()) return table.vectors[static_cast<std::size_t>(table.unk_index)];
  Tensor out = table.vector_for(tokens[0]);
  for (std::size_t k = 1; k < tokens.size(); ++k) {
    const Tensor& w = table.vector_for(tokens[k]);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::max(out.data[i], w.data[i]);
  }
  return out;
}

Tape::Id user_source_feature(Tape& tape, GruCell& cell, std::span<const Tensor> item_embs) {
  if (item_embs.empty())
    throw DomainError("user_source_feature: user has no source-domain history");
  std::vector<Tape::Id> inputs;
  inputs.reserve(item_embs.size());
  for (const Tensor& e : item_embs) inputs.push_back(tape.constant(&e));
  return gru_encode(tape, cell, inputs);
}

Tensor user_source_feature_value(const GruCell& cell, std::span<const Tensor> item_embs) {
  if (item_embs.empty())
    throw DomainError("user_source_feature: user has no source-domain history");
  return gru_encode_value(cell, item_embs);
}

}  // namespace dcdir
