#pragma once

#include <span>

#include "dcdir/gru.hpp"
#include "dcdir/word2vec.hpp"

namespace dcdir {

/// Source item embedding: elementwise max over the description's word
/// vectors (the word axis), dimension d. An empty description falls back to
/// the UNK vector alone.
Tensor item_embedding(const WordTable& table, std::span<const std::string> tokens);

/// Source-domain user feature: the cell run over the history's item
/// embeddings in chronological order from a zero state.
Tape::Id user_source_feature(Tape& tape, GruCell& cell, std::span<const Tensor> item_embs);

/// Forward-only variant for inference and detached uses.
Tensor user_source_feature_value(const GruCell& cell, std::span<const Tensor> item_embs);

}  // namespace dcdir
