#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pronsim/ops.hpp"

using namespace pronsim;

namespace {

Tensor random_vec(std::size_t n, Rng& rng) {
  Tensor t = Tensor::vec(n);
  for (auto& x : t.data) x = rng.uniform(-1.0, 1.0);
  return t;
}

Parameter random_param(const std::string& name, std::vector<std::size_t> shape,
                       Rng& rng) {
  Parameter p(name, Tensor::zeros(std::move(shape)));
  for (auto& x : p.value.data) x = rng.uniform(-1.0, 1.0);
  return p;
}

}  // namespace

TEST_CASE("affine identity and zero cases") {
  Parameter w("w", Tensor::mat(3, 3));
  Parameter b("b", Tensor::vec(3));
  for (std::size_t i = 0; i < 3; ++i) w.value.at(i, i) = 1.0;
  Tensor x = Tensor::vec(3);
  x.data = {1.5, -2.0, 0.25};
  const Tensor out = affine(x, w, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(x[i]));

  b.value.data = {4.0, 5.0, 6.0};
  const Tensor out2 = affine(Tensor::vec(3), w, b);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out2[i] == doctest::Approx(b.value[i]));

  CHECK_THROWS_AS(affine(Tensor::vec(2), w, b), std::invalid_argument);
}

TEST_CASE("affine gradients match finite differences") {
  Rng rng(11);
  Parameter w = random_param("w", {4, 3}, rng);
  Parameter b = random_param("b", {4}, rng);
  const Tensor x = random_vec(3, rng);
  const Tensor probe = random_vec(4, rng);  // fixed scalarization weights

  auto fn = [&](bool with_grad) {
    const Tensor out = affine(x, w, b);
    double loss = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) loss += probe[i] * out[i];
    if (with_grad) affine_backward(x, w, b, probe);
    return loss;
  };
  Parameter* params[] = {&w, &b};
  const auto report = grad_check(fn, params, 1e-5, 1e-6, 64, rng);
  CHECK(report.all_pass());
}

TEST_CASE("activation values and subgradient policy") {
  Tensor x = Tensor::vec(3);
  x.data = {0.0, -5.0, 2.0};
  const Tensor s = activation(Activation::Sigmoid, x);
  const Tensor t = activation(Activation::Tanh, x);
  const Tensor r = activation(Activation::Relu, x);
  CHECK(s[0] == doctest::Approx(0.5));
  CHECK(t[0] == doctest::Approx(0.0));
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 2.0);

  Tensor ones = Tensor::vec(3);
  ones.fill(1.0);
  const Tensor dr = activation_backward(Activation::Relu, x, r, ones);
  CHECK(dr[0] == 0.0);  // subgradient 0 at the kink
  CHECK(dr[1] == 0.0);
  CHECK(dr[2] == 1.0);
}

TEST_CASE("activation gradients match finite differences") {
  Rng rng(13);
  for (auto kind : {Activation::Sigmoid, Activation::Tanh, Activation::Relu}) {
    Parameter x = random_param("x", {6}, rng);
    const Tensor probe = random_vec(6, rng);
    auto fn = [&](bool with_grad) {
      const Tensor y = activation(kind, x.value);
      double loss = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) loss += probe[i] * y[i];
      if (with_grad) {
        const Tensor dx = activation_backward(kind, x.value, y, probe);
        for (std::size_t i = 0; i < dx.size(); ++i) x.grad[i] += dx[i];
      }
      return loss;
    };
    Parameter* params[] = {&x};
    CHECK(grad_check(fn, params, 1e-5, 1e-6, 64, rng).all_pass());
  }
}

TEST_CASE("softmax_nll analytic cases") {
  Tensor logits = Tensor::vec(2);
  auto r = softmax_nll(logits, 0);
  CHECK(r.loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(r.probs[0] == doctest::Approx(0.5));
  CHECK(r.probs[1] == doctest::Approx(0.5));

  logits.data = {100.0, -100.0};
  CHECK(softmax_nll(logits, 0).loss < 1e-8);

  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    Tensor l = random_vec(5, rng);
    for (auto& v : l.data) v *= 10.0;
    const auto sm = softmax_nll(l, rng.below(5));
    double sum = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
      CHECK(sm.probs[j] > 0.0);
      CHECK(sm.probs[j] < 1.0);
      sum += sm.probs[j];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("softmax_nll gradient matches finite differences") {
  Rng rng(17);
  Parameter logits = random_param("logits", {4}, rng);
  const std::size_t cls = 2;
  auto fn = [&](bool with_grad) {
    const auto sm = softmax_nll(logits.value, cls);
    if (with_grad) {
      const Tensor d = softmax_nll_backward(sm, cls);
      for (std::size_t i = 0; i < d.size(); ++i) logits.grad[i] += d[i];
    }
    return sm.loss;
  };
  Parameter* params[] = {&logits};
  CHECK(grad_check(fn, params, 1e-5, 1e-6, 64, rng).all_pass());
}

TEST_CASE("cosine similarity analytic cases") {
  Tensor u = Tensor::vec(3), v = Tensor::vec(3);
  u.data = {1.0, 2.0, -1.0};
  CHECK(cosine_similarity01(u, u) == doctest::Approx(1.0).epsilon(1e-12));

  u.data = {1.0, 0.0, 0.0};
  v.data = {0.0, 3.0, 0.0};
  CHECK(cosine_similarity01(u, v) == doctest::Approx(0.5).epsilon(1e-12));

  v.data = {-1.0, 0.0, 0.0};
  CHECK(cosine_similarity01(u, v) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(cosine_similarity01(Tensor::vec(3), u), std::domain_error);
}

TEST_CASE("cosine similarity symmetry and scale invariance") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const Tensor u = random_vec(5, rng);
    const Tensor v = random_vec(5, rng);
    const double f = cosine_similarity01(u, v);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(cosine_similarity01(v, u) == doctest::Approx(f).epsilon(1e-12));
    Tensor su = u, sv = v;
    const double a = rng.uniform(0.1, 5.0), b = rng.uniform(0.1, 5.0);
    for (auto& x : su.data) x *= a;
    for (auto& x : sv.data) x *= b;
    CHECK(cosine_similarity01(su, sv) == doctest::Approx(f).epsilon(1e-12));
  }
}

TEST_CASE("cosine gradient matches finite differences") {
  Rng rng(29);
  Parameter u = random_param("u", {6}, rng);
  Parameter v = random_param("v", {6}, rng);
  auto fn = [&](bool with_grad) {
    const double f = cosine_similarity01(u.value, v.value);
    if (with_grad)
      cosine_similarity01_backward(u.value, v.value, 1.0, u.grad, v.grad);
    return f;
  };
  Parameter* params[] = {&u, &v};
  CHECK(grad_check(fn, params, 1e-6, 1e-6, 64, rng).all_pass());
}

TEST_CASE("backward passes accumulate") {
  Rng rng(31);
  Parameter w = random_param("w", {2, 2}, rng);
  Parameter b = random_param("b", {2}, rng);
  const Tensor x = random_vec(2, rng);
  Tensor ones = Tensor::vec(2);
  ones.fill(1.0);
  affine_backward(x, w, b, ones);
  const Tensor once = w.grad;
  affine_backward(x, w, b, ones);
  for (std::size_t i = 0; i < once.size(); ++i)
    CHECK(w.grad[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-12));
}

TEST_CASE("grad_check harness itself") {
  // f(x) = x^2 at x = 3: analytic 6.
  Parameter x("x", Tensor::vec(1));
  x.value[0] = 3.0;
  Rng rng(1);
  auto fn = [&](bool with_grad) {
    if (with_grad) x.grad[0] += 2.0 * x.value[0];
    return x.value[0] * x.value[0];
  };
  Parameter* params[] = {&x};
  const auto good = grad_check(fn, params, 1e-5, 1e-6, 64, rng);
  CHECK(good.all_pass());
  CHECK(good.entries[0].max_rel_err < 1e-8);

  // Deliberately doubled analytic gradient must fail with rel err ~ 0.5.
  auto bad_fn = [&](bool with_grad) {
    if (with_grad) x.grad[0] += 4.0 * x.value[0];
    return x.value[0] * x.value[0];
  };
  const auto bad = grad_check(bad_fn, params, 1e-5, 1e-4, 64, rng);
  CHECK(!bad.all_pass());
  CHECK(bad.entries[0].max_rel_err == doctest::Approx(0.5).epsilon(1e-4));
}
