#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcdir/tensor.hpp"

namespace dcdir {

struct WordConfig {
  int dim = 50;
  int window = 2;
  int negatives = 5;
  int epochs = 30;
  int min_count = 1;
  double lr = 0.025;
  std::uint64_t seed = 13;
};

/// Skip-gram word vectors. Out-of-vocabulary tokens share one UNK vector.
struct WordTable {
  int dim = 0;
  std::vector<std::string> tokens;  // index -> token; tokens.back() is <unk>
  std::unordered_map<std::string, int> vocab;
  std::vector<Tensor> vectors;  // input vectors, index-aligned with tokens
  int unk_index = -1;

  const Tensor& vector_for(const std::string& token) const {
    auto it = vocab.find(token);
    return vectors[static_cast<std::size_t>(it == vocab.end() ? unk_index : it->second)];
  }
};

/// Skip-gram with negative sampling over whitespace-tokenized sentences.
/// Negatives come from the unigram^0.75 distribution; training is seeded
/// and single-threaded, so identical configs give identical tables.
WordTable train_word_vectors(const std::vector<std::vector<std::string>>& corpus,
                             const WordConfig& cfg);

void save_word_table(const WordTable& table, const std::string& path);
WordTable load_word_table(const std::string& path);

}  // namespace dcdir
