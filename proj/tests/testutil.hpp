#pragma once

#include <cstdlib>
#include <string>

#include "dcdir/rng.hpp"
#include "dcdir/tensor.hpp"

namespace testutil {

inline dcdir::Tensor rand_vec(dcdir::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  dcdir::Tensor t = dcdir::Tensor::vec(n);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

inline dcdir::Tensor rand_mat(dcdir::Rng& rng, std::size_t r, std::size_t c, double lo = -1.0,
                              double hi = 1.0) {
  dcdir::Tensor t = dcdir::Tensor::mat(r, c);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

inline std::string fixtures_dir() {
  const char* env = std::getenv("DCDIR_FIXTURES");
  return env ? std::string(env) : std::string("data/fixtures");
}

}  // namespace testutil
