#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dcdir/errors.hpp"

namespace dcdir {

/// Dense row-major tensor of 64-bit floats. Rank 1 and 2 cover everything
/// the model needs; scalars are rank-1 tensors of length 1.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor zeros(std::vector<std::size_t> s) {
    Tensor t;
    std::size_t n = 1;
    for (auto d : s) n *= d;
    t.shape = std::move(s);
    t.data.assign(n, 0.0);
    return t;
  }

  static Tensor vec(std::size_t n) { return zeros({n}); }
  static Tensor mat(std::size_t r, std::size_t c) { return zeros({r, c}); }

  static Tensor scalar(double v) {
    Tensor t = zeros({1});
    t.data[0] = v;
    return t;
  }

  static Tensor from(std::initializer_list<double> vals) {
    Tensor t;
    t.shape = {vals.size()};
    t.data.assign(vals.begin(), vals.end());
    return t;
  }

  static Tensor mat_from(std::size_t r, std::size_t c, std::initializer_list<double> vals) {
    Tensor t;
    t.shape = {r, c};
    t.data.assign(vals.begin(), vals.end());
    if (t.data.size() != r * c)
      throw DimensionError("mat_from: " + std::to_string(vals.size()) + " values for " +
                           std::to_string(r) + "x" + std::to_string(c));
    return t;
  }

  static Tensor identity(std::size_t n) {
    Tensor t = mat(n, n);
    for (std::size_t i = 0; i < n; ++i) t.data[i * n + i] = 1.0;
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  bool is_scalar() const { return data.size() == 1; }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
  }
};

// Shared numeric kernels. Both the tape and the forward-only encoders use
// these, so tape and plain evaluation of the same expression agree bitwise.

inline double dot_raw(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

inline double norm2(const Tensor& a) { return std::sqrt(dot_raw(a, a)); }

inline double cosine(const Tensor& a, const Tensor& b) {
  double na = norm2(a), nb = norm2(b);
  if (na == 0.0 || nb == 0.0) throw ScoringError("cosine: zero-norm vector");
  return dot_raw(a, b) / (na * nb);
}

/// out = W x + b   (W: m x n, x: n, b: m). Pass b = nullptr for plain W x.
inline void affine_into(const Tensor& W, const Tensor& x, const Tensor* b, Tensor& out) {
  const std::size_t m = W.rows(), n = W.cols();
  out.shape = {m};
  out.data.resize(m);
  const double* w = W.data.data();
  for (std::size_t i = 0; i < m; ++i) {
    double s = b ? b->data[i] : 0.0;
    const double* row = w + i * n;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x.data[j];
    out.data[i] = s;
  }
}

inline double sigmoid_scalar(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace dcdir
