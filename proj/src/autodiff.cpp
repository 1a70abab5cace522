#include "dcdir/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "dcdir/errors.hpp"

namespace dcdir {

namespace {
constexpr double kBceClamp = 1e-12;

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": shapes " + a.shape_str() + " and " + b.shape_str() +
                       " do not conform");
}
}  // namespace

GradStore::GradStore(std::span<Parameter* const> params) {
  grads_.reserve(params.size());
  for (const Parameter* p : params) grads_.push_back(Tensor::zeros(p->value.shape));
}

Tensor& GradStore::slot(const Parameter& p) {
  return grads_[static_cast<std::size_t>(p.slot)];
}

void GradStore::clear() {
  for (Tensor& g : grads_) g.fill(0.0);
}

void GradStore::merge_into_params(std::span<Parameter* const> params) const {
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& g = params[i]->grad;
    const Tensor& src = grads_[i];
    for (std::size_t k = 0; k < g.size(); ++k) g.data[k] += src.data[k];
  }
}

Tape::Id Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

void Tape::reset() { nodes_.clear(); }

Tape::Id Tape::param(Parameter& p) {
  Node n;
  n.op = Op::Leaf;
  n.parameter = &p;
  n.ref = &p.value;
  return push(std::move(n));
}

Tape::Id Tape::constant(Tensor t) {
  Node n;
  n.op = Op::Const;
  n.value = std::move(t);
  return push(std::move(n));
}

Tape::Id Tape::constant(const Tensor* t) {
  Node n;
  n.op = Op::ConstRef;
  n.ref = t;
  return push(std::move(n));
}

Tape::Id Tape::affine(Id W, Id x, Id b) {
  const Tensor& w = val(W);
  const Tensor& xv = val(x);
  const Tensor& bv = val(b);
  if (w.rank() != 2 || w.cols() != xv.size()) shape_fail("affine", w, xv);
  if (bv.size() != w.rows()) shape_fail("affine", w, bv);
  Node n;
  n.op = Op::Affine;
  n.in = {W, x, b};
  affine_into(w, xv, &bv, n.value);
  return push(std::move(n));
}

Tape::Id Tape::matvec(Id W, Id x) {
  const Tensor& w = val(W);
  const Tensor& xv = val(x);
  if (w.rank() != 2 || w.cols() != xv.size()) shape_fail("matvec", w, xv);
  Node n;
  n.op = Op::MatVec;
  n.in = {W, x, -1};
  affine_into(w, xv, nullptr, n.value);
  return push(std::move(n));
}

Tape::Id Tape::add(Id a, Id b) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv)) shape_fail("add", av, bv);
  Node n;
  n.op = Op::Add;
  n.in = {a, b, -1};
  n.value = av;
  for (std::size_t i = 0; i < bv.size(); ++i) n.value.data[i] += bv.data[i];
  return push(std::move(n));
}

Tape::Id Tape::sub(Id a, Id b) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv)) shape_fail("sub", av, bv);
  Node n;
  n.op = Op::Sub;
  n.in = {a, b, -1};
  n.value = av;
  for (std::size_t i = 0; i < bv.size(); ++i) n.value.data[i] -= bv.data[i];
  return push(std::move(n));
}

Tape::Id Tape::mul(Id a, Id b) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (!av.same_shape(bv)) shape_fail("mul", av, bv);
  Node n;
  n.op = Op::Mul;
  n.in = {a, b, -1};
  n.value = av;
  for (std::size_t i = 0; i < bv.size(); ++i) n.value.data[i] *= bv.data[i];
  return push(std::move(n));
}

Tape::Id Tape::add_n(std::span<const Id> xs) {
  if (xs.empty()) throw DomainError("add_n: empty input list");
  Node n;
  n.op = Op::AddN;
  n.many.assign(xs.begin(), xs.end());
  n.value = val(xs[0]);
  for (std::size_t k = 1; k < xs.size(); ++k) {
    const Tensor& t = val(xs[k]);
    if (!t.same_shape(n.value)) shape_fail("add_n", n.value, t);
    for (std::size_t i = 0; i < t.size(); ++i) n.value.data[i] += t.data[i];
  }
  return push(std::move(n));
}

Tape::Id Tape::one_minus(Id x) {
  Node n;
  n.op = Op::OneMinus;
  n.in = {x, -1, -1};
  n.value = val(x);
  for (double& v : n.value.data) v = 1.0 - v;
  return push(std::move(n));
}

Tape::Id Tape::sigmoid(Id x) {
  Node n;
  n.op = Op::Sigmoid;
  n.in = {x, -1, -1};
  n.value = val(x);
  for (double& v : n.value.data) v = sigmoid_scalar(v);
  return push(std::move(n));
}

Tape::Id Tape::tanh_op(Id x) {
  Node n;
  n.op = Op::Tanh;
  n.in = {x, -1, -1};
  n.value = val(x);
  for (double& v : n.value.data) v = std::tanh(v);
  return push(std::move(n));
}

Tape::Id Tape::softmax(Id x) {
  const Tensor& xv = val(x);
  if (xv.size() == 0) throw DomainError("softmax: empty input");
  Node n;
  n.op = Op::Softmax;
  n.in = {x, -1, -1};
  n.value = xv;
  double mx = *std::max_element(xv.data.begin(), xv.data.end());
  double z = 0.0;
  for (double& v : n.value.data) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : n.value.data) v /= z;
  return push(std::move(n));
}

Tape::Id Tape::max_pool(std::span<const Id> rows) {
  if (rows.empty()) throw DomainError("max_pool: empty row list");
  Node n;
  n.op = Op::MaxPool;
  n.many.assign(rows.begin(), rows.end());
  const Tensor& first = val(rows[0]);
  n.value = first;
  n.arg.assign(first.size(), 0);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const Tensor& t = val(rows[r]);
    if (!t.same_shape(first)) shape_fail("max_pool", first, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.data[i] > n.value.data[i]) {  // strict: ties keep the lowest row
        n.value.data[i] = t.data[i];
        n.arg[i] = static_cast<std::uint32_t>(r);
      }
    }
  }
  return push(std::move(n));
}

Tape::Id Tape::dropout(Id x, double keep_prob, Rng& rng, bool training) {
  if (keep_prob <= 0.0 || keep_prob > 1.0)
    throw ConfigError("dropout: keep_prob must be in (0,1], got " + std::to_string(keep_prob));
  const Tensor& xv = val(x);
  Node n;
  n.op = Op::Dropout;
  n.in = {x, -1, -1};
  n.aux = keep_prob;
  n.value = xv;
  if (training && keep_prob < 1.0) {
    n.mask.resize(xv.size());
    const double inv = 1.0 / keep_prob;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      n.mask[i] = rng.bernoulli(keep_prob) ? 1 : 0;
      n.value.data[i] = n.mask[i] ? xv.data[i] * inv : 0.0;
    }
  }
  return push(std::move(n));
}

Tape::Id Tape::dot(Id a, Id b) {
  const Tensor& av = val(a);
  const Tensor& bv = val(b);
  if (av.size() != bv.size()) shape_fail("dot", av, bv);
  Node n;
  n.op = Op::Dot;
  n.in = {a, b, -1};
  n.value = Tensor::scalar(dot_raw(av, bv));
  return push(std::move(n));
}

Tape::Id Tape::scale(Id x, Id s) {
  const Tensor& sv = val(s);
  if (!sv.is_scalar()) shape_fail("scale", val(x), sv);
  Node n;
  n.op = Op::Scale;
  n.in = {x, s, -1};
  n.value = val(x);
  for (double& v : n.value.data) v *= sv.data[0];
  return push(std::move(n));
}

Tape::Id Tape::scale_const(Id x, double a) {
  Node n;
  n.op = Op::ScaleConst;
  n.in = {x, -1, -1};
  n.aux = a;
  n.value = val(x);
  for (double& v : n.value.data) v *= a;
  return push(std::move(n));
}

Tape::Id Tape::sum_squares(Id x) {
  const Tensor& xv = val(x);
  Node n;
  n.op = Op::SumSquares;
  n.in = {x, -1, -1};
  n.value = Tensor::scalar(dot_raw(xv, xv));
  return push(std::move(n));
}

Tape::Id Tape::bce(Id yhat, double label) {
  const Tensor& pv = val(yhat);
  if (!pv.is_scalar()) throw DimensionError("bce: prediction must be scalar, got " + pv.shape_str());
  double p = std::clamp(pv.data[0], kBceClamp, 1.0 - kBceClamp);
  Node n;
  n.op = Op::Bce;
  n.in = {yhat, -1, -1};
  n.aux = label;
  n.value = Tensor::scalar(-(label * std::log(p) + (1.0 - label) * std::log(1.0 - p)));
  return push(std::move(n));
}

void Tape::backward(Id root, GradStore* sink) {
  const std::size_t n = nodes_.size();
  const Tensor& rv = val(root);
  if (!rv.is_scalar())
    throw DimensionError("backward: root must be scalar, got " + rv.shape_str());

  std::vector<Tensor> adj(n);
  auto bump = [&](Id id) {
    Tensor& g = adj[static_cast<std::size_t>(id)];
    if (g.data.empty()) g = Tensor::zeros(val(id).shape);
    return &g;
  };
  bump(root)->data[0] = 1.0;

  for (std::size_t k = n; k-- > 0;) {
    Node& nd = nodes_[k];
    Tensor& g = adj[k];
    if (g.data.empty()) continue;  // node unreachable from root
    switch (nd.op) {
      case Op::Leaf: {
        Parameter& p = *nd.parameter;
        Tensor& dst = sink ? sink->slot(p) : p.grad;
        for (std::size_t i = 0; i < g.size(); ++i) dst.data[i] += g.data[i];
        break;
      }
      case Op::Const:
      case Op::ConstRef:
        break;
      case Op::Affine:
      case Op::MatVec: {
        const Tensor& w = val(nd.in[0]);
        const Tensor& x = val(nd.in[1]);
        Tensor* gw = bump(nd.in[0]);
        Tensor* gx = bump(nd.in[1]);
        const std::size_t m = w.rows(), c = w.cols();
        for (std::size_t i = 0; i < m; ++i) {
          const double gi = g.data[i];
          if (gi == 0.0) continue;
          double* gwrow = gw->data.data() + i * c;
          const double* wrow = w.data.data() + i * c;
          for (std::size_t j = 0; j < c; ++j) {
            gwrow[j] += gi * x.data[j];
            gx->data[j] += gi * wrow[j];
          }
        }
        if (nd.op == Op::Affine) {
          Tensor* gb = bump(nd.in[2]);
          for (std::size_t i = 0; i < m; ++i) gb->data[i] += g.data[i];
        }
        break;
      }
      case Op::Add: {
        Tensor* ga = bump(nd.in[0]);
        Tensor* gb = bump(nd.in[1]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga->data[i] += g.data[i];
          gb->data[i] += g.data[i];
        }
        break;
      }
      case Op::Sub: {
        Tensor* ga = bump(nd.in[0]);
        Tensor* gb = bump(nd.in[1]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga->data[i] += g.data[i];
          gb->data[i] -= g.data[i];
        }
        break;
      }
      case Op::Mul: {
        const Tensor& a = val(nd.in[0]);
        const Tensor& b = val(nd.in[1]);
        Tensor* ga = bump(nd.in[0]);
        Tensor* gb = bump(nd.in[1]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          ga->data[i] += g.data[i] * b.data[i];
          gb->data[i] += g.data[i] * a.data[i];
        }
        break;
      }
      case Op::AddN: {
        for (Id src : nd.many) {
          Tensor* gs = bump(src);
          for (std::size_t i = 0; i < g.size(); ++i) gs->data[i] += g.data[i];
        }
        break;
      }
      case Op::OneMinus: {
        Tensor* gx = bump(nd.in[0]);
        for (std::size_t i = 0; i < g.size(); ++i) gx->data[i] -= g.data[i];
        break;
      }
      case Op::Sigmoid: {
        Tensor* gx = bump(nd.in[0]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = nd.value.data[i];
          gx->data[i] += g.data[i] * y * (1.0 - y);
        }
        break;
      }
      case Op::Tanh: {
        Tensor* gx = bump(nd.in[0]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = nd.value.data[i];
          gx->data[i] += g.data[i] * (1.0 - y * y);
        }
        break;
      }
      case Op::Softmax: {
        Tensor* gx = bump(nd.in[0]);
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += g.data[i] * nd.value.data[i];
        for (std::size_t i = 0; i < g.size(); ++i)
          gx->data[i] += nd.value.data[i] * (g.data[i] - s);
        break;
      }
      case Op::MaxPool: {
        for (std::size_t i = 0; i < g.size(); ++i) {
          Tensor* gr = bump(nd.many[nd.arg[i]]);
          gr->data[i] += g.data[i];
        }
        break;
      }
      case Op::Dropout: {
        Tensor* gx = bump(nd.in[0]);
        if (nd.mask.empty()) {
          for (std::size_t i = 0; i < g.size(); ++i) gx->data[i] += g.data[i];
        } else {
          const double inv = 1.0 / nd.aux;
          for (std::size_t i = 0; i < g.size(); ++i)
            if (nd.mask[i]) gx->data[i] += g.data[i] * inv;
        }
        break;
      }
      case Op::Dot: {
        const Tensor& a = val(nd.in[0]);
        const Tensor& b = val(nd.in[1]);
        Tensor* ga = bump(nd.in[0]);
        Tensor* gb = bump(nd.in[1]);
        const double gs = g.data[0];
        for (std::size_t i = 0; i < a.size(); ++i) {
          ga->data[i] += gs * b.data[i];
          gb->data[i] += gs * a.data[i];
        }
        break;
      }
      case Op::Scale: {
        const Tensor& x = val(nd.in[0]);
        const double s = val(nd.in[1]).data[0];
        Tensor* gx = bump(nd.in[0]);
        Tensor* gs = bump(nd.in[1]);
        for (std::size_t i = 0; i < g.size(); ++i) {
          gx->data[i] += g.data[i] * s;
          gs->data[0] += g.data[i] * x.data[i];
        }
        break;
      }
      case Op::ScaleConst: {
        Tensor* gx = bump(nd.in[0]);
        for (std::size_t i = 0; i < g.size(); ++i) gx->data[i] += g.data[i] * nd.aux;
        break;
      }
      case Op::SumSquares: {
        const Tensor& x = val(nd.in[0]);
        Tensor* gx = bump(nd.in[0]);
        const double gs = 2.0 * g.data[0];
        for (std::size_t i = 0; i < x.size(); ++i) gx->data[i] += gs * x.data[i];
        break;
      }
      case Op::Bce: {
        const double y = nd.aux;
        const double p = std::clamp(val(nd.in[0]).data[0], kBceClamp, 1.0 - kBceClamp);
        Tensor* gx = bump(nd.in[0]);
        gx->data[0] += g.data[0] * (-(y / p) + (1.0 - y) / (1.0 - p));
        break;
      }
    }
  }
}

}  // namespace dcdir
