#include <doctest.h>

#include <cmath>

#include "dcdir/autodiff.hpp"
#include "dcdir/errors.hpp"
#include "dcdir/grad_check.hpp"
#include "dcdir/optim.hpp"
#include "testutil.hpp"

using namespace dcdir;
using testutil::rand_mat;
using testutil::rand_vec;

TEST_CASE("affine hand cases") {
  Tape tape;
  Parameter W("W", Tensor::identity(2));
  Parameter x("x", Tensor::from({3, -1}));
  Parameter b("b", Tensor::from({0, 0}));
  auto y = tape.affine(tape.param(W), tape.param(x), tape.param(b));
  CHECK(tape.value(y).data[0] == doctest::Approx(3.0));
  CHECK(tape.value(y).data[1] == doctest::Approx(-1.0));

  Parameter W2("W2", Tensor::mat_from(2, 2, {1, 2, 0, 1}));
  Parameter x2("x2", Tensor::from({1, 1}));
  Parameter b2("b2", Tensor::from({1, 0}));
  auto y2 = tape.affine(tape.param(W2), tape.param(x2), tape.param(b2));
  CHECK(tape.value(y2).data[0] == doctest::Approx(4.0));
  CHECK(tape.value(y2).data[1] == doctest::Approx(1.0));
}

TEST_CASE("affine shape mismatch names op and shapes") {
  Tape tape;
  Parameter W("W", Tensor::mat(2, 3));
  Parameter x("x", Tensor::vec(2));
  Parameter b("b", Tensor::vec(2));
  try {
    tape.affine(tape.param(W), tape.param(x), tape.param(b));
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    std::string msg = e.what();
    CHECK(msg.find("affine") != std::string::npos);
    CHECK(msg.find("(2,3)") != std::string::npos);
  }
}

TEST_CASE("gradient of squared norm of affine output matches finite differences") {
  Rng rng(11);
  Parameter W("W", rand_mat(rng, 3, 3));
  Parameter x("x", rand_vec(rng, 3));
  Parameter b("b", rand_vec(rng, 3));
  Parameter* params[] = {&W, &x, &b};
  auto f = [&](bool record) {
    Tape tape;
    auto y = tape.affine(tape.param(W), tape.param(x), tape.param(b));
    auto loss = tape.sum_squares(y);
    if (record) tape.backward(loss);
    return tape.value(loss).data[0];
  };
  auto report = grad_check(f, params, 1e-6, 1e-6);
  CHECK(report.ok());
  CHECK(report.max_rel_err < 1e-6);
}

TEST_CASE("pointwise values") {
  Tape tape;
  auto z = tape.constant(Tensor::from({0.0, std::log(3.0)}));
  auto s = tape.sigmoid(z);
  CHECK(tape.value(s).data[0] == doctest::Approx(0.5));
  CHECK(tape.value(s).data[1] == doctest::Approx(0.75));
  auto t = tape.tanh_op(tape.constant(Tensor::from({0.0})));
  CHECK(tape.value(t).data[0] == doctest::Approx(0.0));
}

TEST_CASE("softmax values and invariants") {
  Tape tape;
  auto u = tape.softmax(tape.constant(Tensor::from({0, 0, 0})));
  for (int i = 0; i < 3; ++i) CHECK(tape.value(u).data[i] == doctest::Approx(1.0 / 3));

  auto big = tape.softmax(tape.constant(Tensor::from({1000, 1000})));
  CHECK(tape.value(big).data[0] == doctest::Approx(0.5));
  CHECK(tape.value(big).all_finite());

  auto skew = tape.softmax(tape.constant(Tensor::from({0.0, std::log(3.0)})));
  CHECK(tape.value(skew).data[0] == doctest::Approx(0.25));
  CHECK(tape.value(skew).data[1] == doctest::Approx(0.75));

  // sums to 1 and shift invariance on random inputs
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor v = rand_vec(rng, 7, -4, 4);
    Tensor shifted = v;
    const double c = rng.uniform(-10, 10);
    for (auto& e : shifted.data) e += c;
    Tape t2;
    auto a = t2.softmax(t2.constant(v));
    auto bb = t2.softmax(t2.constant(shifted));
    double sum = 0;
    for (int i = 0; i < 7; ++i) {
      sum += t2.value(a).data[i];
      CHECK(std::fabs(t2.value(a).data[i] - t2.value(bb).data[i]) < 1e-12);
    }
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }

  CHECK_THROWS_AS((void)tape.softmax(tape.constant(Tensor::vec(0))), DomainError);
}

TEST_CASE("max_pool values, tie rule, and dominance") {
  Tape tape;
  Parameter a("a", Tensor::from({1, 5}));
  Parameter b("b", Tensor::from({3, 2}));
  Tape::Id rows[] = {tape.param(a), tape.param(b)};
  auto m = tape.max_pool(rows);
  CHECK(tape.value(m).data[0] == doctest::Approx(3.0));
  CHECK(tape.value(m).data[1] == doctest::Approx(5.0));

  // single row is identity
  Tape t1;
  Parameter c("c", Tensor::from({2, -7, 0}));
  Tape::Id one[] = {t1.param(c)};
  auto mm = t1.max_pool(one);
  for (int i = 0; i < 3; ++i) CHECK(t1.value(mm).data[i] == c.value.data[i]);

  // tie on coord 0 routes gradient to the first row only
  Tape t2;
  Parameter p("p", Tensor::from({1, 1}));
  Parameter q("q", Tensor::from({1, 0}));
  Tape::Id tied[] = {t2.param(p), t2.param(q)};
  auto pooled = t2.max_pool(tied);
  auto loss = t2.sum_squares(pooled);
  t2.backward(loss);
  CHECK(p.grad.data[0] != 0.0);
  CHECK(q.grad.data[0] == 0.0);

  // dominance property on random rows
  Rng rng(3);
  Tape t3;
  std::vector<Tensor> raw;
  std::vector<Tape::Id> ids;
  for (int r = 0; r < 6; ++r) {
    raw.push_back(rand_vec(rng, 8));
    ids.push_back(t3.constant(raw.back()));
  }
  auto pool = t3.max_pool(ids);
  for (const auto& row : raw)
    for (std::size_t i = 0; i < 8; ++i) CHECK(t3.value(pool).data[i] >= row.data[i]);

  CHECK_THROWS_AS((void)tape.max_pool(std::span<const Tape::Id>{}), DomainError);
}

TEST_CASE("dropout identity cases and config error") {
  Rng rng(9);
  Tensor x = rand_vec(rng, 20);
  Tape tape;
  auto keep_all = tape.dropout(tape.constant(x), 1.0, rng, true);
  auto infer = tape.dropout(tape.constant(x), 0.5, rng, false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(tape.value(keep_all).data[i] == x.data[i]);
    CHECK(tape.value(infer).data[i] == x.data[i]);
  }
  CHECK_THROWS_AS((void)tape.dropout(tape.constant(x), 0.0, rng, true), ConfigError);
}

TEST_CASE("dropout empirical keep rate near 0.8") {
  // Monte-Carlo oracle: 1e5 trials on a length-100 tensor.
  Tensor x = Tensor::vec(100);
  x.fill(1.0);
  Rng rng(42);
  long long kept = 0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) {
    Tape tape;
    auto d = tape.dropout(tape.constant(&x), 0.8, rng, true);
    for (double v : tape.value(d).data)
      if (v != 0.0) ++kept;
  }
  const double rate = static_cast<double>(kept) / (100.0 * trials);
  CHECK(std::fabs(rate - 0.8) < 0.01);
}

TEST_CASE("dropout is seed-deterministic") {
  Tensor x = Tensor::vec(64);
  x.fill(2.5);
  auto run = [&] {
    Rng rng(1234);
    Tape tape;
    auto d = tape.dropout(tape.constant(&x), 0.8, rng, true);
    return tape.value(d).data;
  };
  CHECK(run() == run());
}

TEST_CASE("adam first step and zero-grad behaviour") {
  Parameter w("w", Tensor::scalar(0.0));
  Parameter* ps[] = {&w};
  w.grad.data[0] = 1.0;
  AdamConfig cfg;
  adam_step(ps, cfg);
  CHECK(w.value.data[0] == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(w.step_count == 1);
  CHECK(w.grad.data[0] == 0.0);

  Parameter z("z", Tensor::scalar(7.0));
  Parameter* qs[] = {&z};
  adam_step(qs, cfg);
  CHECK(z.value.data[0] == 7.0);
  CHECK(z.step_count == 1);
}

TEST_CASE("adam minimizes a scalar quadratic") {
  Parameter w("w", Tensor::scalar(0.0));
  Parameter* ps[] = {&w};
  AdamConfig cfg;
  for (int step = 0; step < 10000; ++step) {
    Tape tape;
    auto diff = tape.sub(tape.param(w), tape.constant(Tensor::scalar(3.0)));
    auto loss = tape.sum_squares(diff);
    tape.backward(loss);
    adam_step(ps, cfg);
    if (std::fabs(w.value.data[0] - 3.0) < 1e-3) break;
  }
  CHECK(std::fabs(w.value.data[0] - 3.0) < 1e-3);
}

TEST_CASE("grad_check on squared norm") {
  Parameter x("x", Tensor::from({1, 2}));
  Parameter* ps[] = {&x};
  auto f = [&](bool record) {
    Tape tape;
    auto loss = tape.sum_squares(tape.param(x));
    if (record) tape.backward(loss);
    return tape.value(loss).data[0];
  };
  zero_grads(ps);
  f(true);
  CHECK(x.grad.data[0] == doctest::Approx(2.0));
  CHECK(x.grad.data[1] == doctest::Approx(4.0));
  auto report = grad_check(f, ps, 1e-5, 1e-8);
  CHECK(report.ok());
}

TEST_CASE("grad_check flags a corrupted backward rule") {
  Parameter x("x", Tensor::from({0.7, -0.4, 1.2}));
  Parameter* ps[] = {&x};
  auto corrupted = [&](bool record) {
    Tape tape;
    auto loss = tape.sum_squares(tape.sigmoid(tape.param(x)));
    if (record) {
      tape.backward(loss);
      x.grad.data[0] *= 3.0;  // simulated bug in one backward rule
    }
    return tape.value(loss).data[0];
  };
  auto report = grad_check(corrupted, ps, 1e-5, 1e-4);
  CHECK(!report.ok());
  CHECK(report.max_rel_err > 1e-2);
}

TEST_CASE("parameter reused twice accumulates both contributions") {
  Parameter x("x", Tensor::from({1.5, -2.0}));
  Parameter* ps[] = {&x};
  zero_grads(ps);
  Tape tape;
  auto leaf = tape.param(x);
  auto loss = tape.dot(leaf, leaf);
  tape.backward(loss);
  CHECK(x.grad.data[0] == doctest::Approx(3.0));
  CHECK(x.grad.data[1] == doctest::Approx(-4.0));
}

TEST_CASE("every elementary op passes finite differences on random inputs") {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    Parameter W("W", rand_mat(rng, 4, 3));
    Parameter x("x", rand_vec(rng, 3));
    Parameter b("b", rand_vec(rng, 4));
    Parameter u("u", rand_vec(rng, 4));
    Parameter* ps[] = {&W, &x, &b, &u};
    const std::uint64_t mask_seed = Rng::derive(77, "dropmask", trial);
    auto f = [&](bool record) {
      Tape tape;
      Rng drop_rng(mask_seed);
      auto a = tape.affine(tape.param(W), tape.param(x), tape.param(b));
      auto s = tape.sigmoid(a);
      auto t = tape.tanh_op(tape.matvec(tape.param(W), tape.param(x)));
      auto m = tape.mul(s, t);
      auto sm = tape.softmax(tape.param(u));
      Tape::Id rows[] = {m, sm, tape.one_minus(tape.param(u))};
      auto pooled = tape.max_pool(rows);
      auto dropped = tape.dropout(pooled, 0.8, drop_rng, true);
      auto y = tape.sigmoid(tape.dot(dropped, tape.param(u)));
      auto loss = tape.add(tape.bce(y, 1.0), tape.sum_squares(tape.sub(sm, tape.param(b))));
      if (record) tape.backward(loss);
      CHECK(tape.value(loss).all_finite());
      return tape.value(loss).data[0];
    };
    auto report = grad_check(f, ps, 1e-5, 1e-4);
    if (!report.ok()) {
      CAPTURE(report.failures[0].parameter);
      CAPTURE(report.failures[0].analytic);
      CAPTURE(report.failures[0].numeric);
    }
    CHECK(report.ok());
  }
}
