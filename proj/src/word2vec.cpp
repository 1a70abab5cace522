#include "dcdir/word2vec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "dcdir/errors.hpp"
#include "dcdir/rng.hpp"

namespace dcdir {

namespace {
constexpr std::size_t kUnigramTableSize = 1 << 17;
constexpr const char* kUnkToken = "<unk>";
}  // namespace

WordTable train_word_vectors(const std::vector<std::vector<std::string>>& corpus,
                             const WordConfig& cfg) {
  if (corpus.empty()) throw ConfigError("word2vec: empty corpus");
  if (cfg.dim < 1 || cfg.window < 1 || cfg.negatives < 0)
    throw ConfigError("word2vec: invalid config");

  // vocabulary ordered by (count desc, token asc) for determinism
  std::map<std::string, long long> counts;
  long long total_tokens = 0;
  for (const auto& sent : corpus)
    for (const auto& tok : sent) {
      ++counts[tok];
      ++total_tokens;
    }
  if (total_tokens == 0) throw ConfigError("word2vec: corpus has no tokens");
  std::vector<std::pair<std::string, long long>> ordered(counts.begin(), counts.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  WordTable table;
  table.dim = cfg.dim;
  for (const auto& [tok, cnt] : ordered) {
    if (cnt < cfg.min_count) continue;
    table.vocab.emplace(tok, static_cast<int>(table.tokens.size()));
    table.tokens.push_back(tok);
  }
  const std::size_t v = table.tokens.size();
  table.unk_index = static_cast<int>(v);
  table.tokens.push_back(kUnkToken);

  const std::size_t d = static_cast<std::size_t>(cfg.dim);
  Rng rng(Rng::derive(cfg.seed, "word2vec"));
  std::vector<double> syn0((v + 1) * d);  // input vectors, incl. UNK
  std::vector<double> syn1(v * d, 0.0);   // output vectors
  for (auto& x : syn0) x = rng.uniform(-0.5, 0.5) / static_cast<double>(cfg.dim);

  // unigram^0.75 table for negative sampling
  std::vector<int> unigram(kUnigramTableSize);
  {
    double z = 0.0;
    std::vector<double> pw(v);
    for (std::size_t i = 0; i < v; ++i) {
      pw[i] = std::pow(static_cast<double>(counts[table.tokens[i]]), 0.75);
      z += pw[i];
    }
    std::size_t i = 0;
    double cum = pw.empty() ? 0.0 : pw[0] / z;
    for (std::size_t k = 0; k < kUnigramTableSize; ++k) {
      unigram[k] = static_cast<int>(i);
      if (static_cast<double>(k + 1) / kUnigramTableSize > cum && i + 1 < v) {
        ++i;
        cum += pw[i] / z;
      }
    }
  }

  // sentences as index sequences; unseen (min_count-filtered) tokens dropped
  std::vector<std::vector<int>> sents;
  for (const auto& sent : corpus) {
    std::vector<int> ids;
    for (const auto& tok : sent) {
      auto it = table.vocab.find(tok);
      if (it != table.vocab.end()) ids.push_back(it->second);
    }
    if (!ids.empty()) sents.push_back(std::move(ids));
  }

  std::vector<double> hidden_grad(d);
  const long long steps_total =
      static_cast<long long>(cfg.epochs) * static_cast<long long>(total_tokens);
  long long steps_done = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& sent : sents) {
      for (std::size_t pos = 0; pos < sent.size(); ++pos) {
        const double progress =
            static_cast<double>(steps_done++) / std::max<long long>(1, steps_total);
        const double lr = std::max(cfg.lr * (1.0 - progress), cfg.lr * 1e-4);
        const int center = sent[pos];
        double* in = syn0.data() + static_cast<std::size_t>(center) * d;
        const std::size_t lo = pos >= static_cast<std::size_t>(cfg.window)
                                   ? pos - static_cast<std::size_t>(cfg.window)
                                   : 0;
        const std::size_t hi = std::min(sent.size() - 1, pos + static_cast<std::size_t>(cfg.window));
        for (std::size_t cpos = lo; cpos <= hi; ++cpos) {
          if (cpos == pos) continue;
          std::fill(hidden_grad.begin(), hidden_grad.end(), 0.0);
          for (int k = 0; k <= cfg.negatives; ++k) {
            int target;
            double label;
            if (k == 0) {
              target = sent[cpos];
              label = 1.0;
            } else {
              target = unigram[rng.uniform_int(kUnigramTableSize)];
              if (target == sent[cpos]) continue;
              label = 0.0;
            }
            double* out = syn1.data() + static_cast<std::size_t>(target) * d;
            double act = 0.0;
            for (std::size_t i = 0; i < d; ++i) act += in[i] * out[i];
            const double err = (label - sigmoid_scalar(act)) * lr;
            for (std::size_t i = 0; i < d; ++i) {
              hidden_grad[i] += err * out[i];
              out[i] += err * in[i];
            }
          }
          for (std::size_t i = 0; i < d; ++i) in[i] += hidden_grad[i];
        }
      }
    }
  }

  table.vectors.reserve(v + 1);
  for (std::size_t i = 0; i <= v; ++i) {
    Tensor t = Tensor::vec(d);
    std::copy_n(syn0.begin() + static_cast<std::ptrdiff_t>(i * d), d, t.data.begin());
    table.vectors.push_back(std::move(t));
  }
  return table;
}

void save_word_table(const WordTable& table, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  f << "# dim\t" << table.dim << "\n";
  char buf[64];
  for (std::size_t i = 0; i < table.tokens.size(); ++i) {
    f << table.tokens[i];
    for (double x : table.vectors[i].data) {
      std::snprintf(buf, sizeof buf, "%a", x);
      f << '\t' << buf;
    }
    f << '\n';
  }
}

WordTable load_word_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open " + path);
  WordTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream is(line);
    if (line[0] == '#') {
      std::string hash, key;
      is >> hash >> key;
      if (key == "dim") is >> table.dim;
      continue;
    }
    std::string tok, field;
    std::getline(is, tok, '\t');
    Tensor vec = Tensor::vec(static_cast<std::size_t>(table.dim));
    for (int i = 0; i < table.dim; ++i) {
      if (!std::getline(is, field, '\t'))
        throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(table.dim) + " floats");
      vec.data[static_cast<std::size_t>(i)] = std::stod(field);
    }
    if (tok != kUnkToken) table.vocab.emplace(tok, static_cast<int>(table.tokens.size()));
    else table.unk_index = static_cast<int>(table.tokens.size());
    table.tokens.push_back(tok);
    table.vectors.push_back(std::move(vec));
  }
  if (table.unk_index < 0) throw ParseError(path + ": missing <unk> row");
  return table;
}

}  // namespace dcdir
