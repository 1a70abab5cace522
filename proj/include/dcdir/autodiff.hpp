#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dcdir/rng.hpp"
#include "dcdir/tensor.hpp"

namespace dcdir {

/// A named trainable tensor with its gradient and Adam moments.
struct Parameter {
  std::string id;
  Tensor value;
  Tensor grad;
  Tensor adam_m;
  Tensor adam_v;
  std::int64_t step_count = 0;
  int slot = -1;  // index within the owning parameter set, -1 if unregistered

  Parameter() = default;
  Parameter(std::string name, Tensor v)
      : id(std::move(name)),
        value(std::move(v)),
        grad(Tensor::zeros(value.shape)),
        adam_m(Tensor::zeros(value.shape)),
        adam_v(Tensor::zeros(value.shape)) {}
};

/// Slot-indexed gradient accumulation buffers. Workers that share parameters
/// accumulate here instead of Parameter::grad, and the trainer merges stores
/// in a fixed order so results do not depend on thread scheduling.
class GradStore {
 public:
  explicit GradStore(std::span<Parameter* const> params);
  Tensor& slot(const Parameter& p);
  void clear();
  /// grad += store, in slot order.
  void merge_into_params(std::span<Parameter* const> params) const;

 private:
  std::vector<Tensor> grads_;
};

/// Record of differentiable vector ops executed in forward order. backward()
/// replays it in exact reverse, accumulating into Parameter::grad (or into a
/// GradStore when one is supplied). Tapes are single-threaded and cheap to
/// reset; build one per loss term.
class Tape {
 public:
  using Id = std::int32_t;

  Id param(Parameter& p);
  Id constant(Tensor t);
  Id constant(const Tensor* t);  // aliases caller storage, no copy

  /// W x + b. W: m x n, x: n, b: m.
  Id affine(Id W, Id x, Id b);
  /// W x without bias.
  Id matvec(Id W, Id x);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);  // elementwise
  Id add_n(std::span<const Id> xs);
  Id one_minus(Id x);  // 1 - x elementwise
  Id sigmoid(Id x);
  Id tanh_op(Id x);
  /// Max-shifted softmax over a vector; entries sum to 1.
  Id softmax(Id x);
  /// Elementwise max over equal-length rows; gradient goes to the argmax
  /// row, lowest index on ties.
  Id max_pool(std::span<const Id> rows);
  /// Inverted dropout: zero entries with prob 1-keep_prob and scale
  /// survivors by 1/keep_prob while training, identity at inference.
  Id dropout(Id x, double keep_prob, Rng& rng, bool training);
  Id dot(Id a, Id b);
  Id scale(Id x, Id s);             // s is a scalar node
  Id scale_const(Id x, double a);
  Id sum_squares(Id x);             // sum of squared entries, scalar
  /// Binary cross-entropy of a scalar prediction against label y in {0,1};
  /// the prediction is clamped to [1e-12, 1-1e-12].
  Id bce(Id yhat, double label);

  const Tensor& value(Id id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  /// Reverse sweep from a scalar root. Gradients accumulate into
  /// Parameter::grad, or into `sink` when given.
  void backward(Id root, GradStore* sink = nullptr);

  void reset();
  std::size_t node_count() const { return nodes_.size(); }

 private:
  enum class Op : std::uint8_t {
    Leaf, Const, ConstRef, Affine, MatVec, Add, Sub, Mul, AddN, OneMinus,
    Sigmoid, Tanh, Softmax, MaxPool, Dropout, Dot, Scale, ScaleConst,
    SumSquares, Bce
  };

  struct Node {
    Op op;
    std::array<Id, 3> in{-1, -1, -1};
    std::vector<Id> many;              // AddN / MaxPool inputs
    Tensor value;
    const Tensor* ref = nullptr;       // ConstRef payload
    Parameter* parameter = nullptr;    // Leaf payload
    std::vector<std::uint32_t> arg;    // MaxPool argmax per coordinate
    std::vector<std::uint8_t> mask;    // Dropout keep mask
    double aux = 0.0;                  // keep_prob / scale / label
  };

  const Tensor& val(Id id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id)];
    return n.ref ? *n.ref : n.value;  // Leaf and ConstRef alias external storage
  }

  Id push(Node n);
  std::vector<Node> nodes_;
};

}  // namespace dcdir
