#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "odekernel/models.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "odekernel/systems.hpp"
#include "support.hpp"

using namespace odekernel;
using namespace odekernel::testing;

TEST_CASE("kernel forward squares elementwise in the identity configuration") {
  ParametricPolyKernel model(2, 2, 2, 2);
  model.w1 = Tensor::identity(2);
  model.w2 = Tensor::identity(2);
  const Tensor out = model.forward(Tensor::column({1.0, 3.0}));
  CHECK(out(0, 0) == 1.0);
  CHECK(out(1, 0) == 9.0);
}

TEST_CASE("kernel forward at x=0 reduces to W2 B1^n + B2") {
  SplitMix64 rng(9);
  ParametricPolyKernel model(3, 2, 4, 3);
  model.init_gaussian(rng);
  model.b1 = random_tensor(4, 1, rng);
  model.b2 = random_tensor(2, 1, rng);
  const Tensor expected = add(matmul(model.w2, elementwise_power(model.b1, 3)), model.b2);
  CHECK(max_abs_diff(model.forward(Tensor::zeros(3, 1)), expected) == 0.0);
}

TEST_CASE("kernel forward matches an explicit cubic polynomial expansion") {
  SplitMix64 rng(42);
  const int m_dim = 5;
  ParametricPolyKernel model(2, 1, m_dim, 3);
  model.init_gaussian(rng);
  model.b1 = random_tensor(m_dim, 1, rng);
  model.b2 = random_tensor(1, 1, rng);

  // Expand W2 [ (a_m x1 + b_m x2 + c_m)^3 ] + B2 into monomial coefficients
  // coeff[i][j] of x1^i x2^j via the multinomial theorem.
  double coeff[4][4] = {};
  auto factorial = [](int k) { return k == 0 ? 1.0 : k == 1 ? 1.0 : k == 2 ? 2.0 : 6.0; };
  for (int m = 0; m < m_dim; ++m) {
    const double a = model.w1(m, 0), b = model.w1(m, 1), c = model.b1[m];
    const double w = model.w2(0, m);
    for (int i = 0; i <= 3; ++i) {
      for (int j = 0; j <= 3 - i; ++j) {
        const int k = 3 - i - j;
        const double multinomial = 6.0 / (factorial(i) * factorial(j) * factorial(k));
        coeff[i][j] += w * multinomial * std::pow(a, i) * std::pow(b, j) * std::pow(c, k);
      }
    }
  }
  coeff[0][0] += model.b2[0];

  for (int trial = 0; trial < 10; ++trial) {
    const Tensor x = random_tensor(2, 1, rng);
    double expected = 0.0;
    for (int i = 0; i <= 3; ++i) {
      for (int j = 0; j <= 3 - i; ++j) {
        expected += coeff[i][j] * std::pow(x[0], i) * std::pow(x[1], j);
      }
    }
    CHECK(close_rel(model.forward(x)(0, 0), expected, 1e-10, 1e-12));
  }
}

TEST_CASE("kernel forward is a polynomial of total degree <= n") {
  // The (n+1)-th forward difference along any coordinate of a degree-n
  // polynomial vanishes identically.
  SplitMix64 rng(4242);
  for (const int order : {2, 3, 4}) {
    ParametricPolyKernel model(3, 2, 4, order);
    model.init_gaussian(rng);
    model.b1 = random_tensor(4, 1, rng);

    const Tensor base = random_tensor(3, 1, rng);
    const double h = 0.5;
    for (int dim = 0; dim < 3; ++dim) {
      for (int out = 0; out < 2; ++out) {
        double diff = 0.0;
        double binom = 1.0;  // C(order+1, k) with alternating sign
        for (int k = 0; k <= order + 1; ++k) {
          Tensor x = base;
          x[dim] += h * static_cast<double>(order + 1 - k);
          diff += binom * model.forward(x)(out, 0);
          binom *= -static_cast<double>(order + 1 - k) / static_cast<double>(k + 1);
        }
        CHECK(std::abs(diff) <= 1e-8);
      }
    }
  }
}

TEST_CASE("mlp forward analytic reductions") {
  Mlp zeroed = Mlp::standard(2, 2, 7);
  std::vector<Tensor> blocks = zeroed.param_blocks();
  for (Tensor& b : blocks) b.fill(0.0);
  blocks.back() = Tensor::column({1.5, -2.0});  // B4
  zeroed.set_param_blocks(blocks);
  const Tensor out = zeroed.forward(Tensor::column({3.0, 4.0}));
  CHECK(out(0, 0) == 1.5);
  CHECK(out(1, 0) == -2.0);
}

TEST_CASE("mlp forward matches a manual layer-by-layer oracle") {
  SplitMix64 rng(17);
  Mlp model({3, 6, 6, 6, 2});
  model.init_gaussian(rng);
  const std::vector<Tensor> blocks = model.param_blocks();
  const Tensor x = random_tensor(3, 1, rng);

  // Oracle: explicit loops, no shared kernels.
  std::vector<double> act(x.data().begin(), x.data().end());
  for (std::size_t layer = 0; layer < 4; ++layer) {
    const Tensor& w = blocks[2 * layer];
    const Tensor& b = blocks[2 * layer + 1];
    std::vector<double> next(static_cast<std::size_t>(w.rows()));
    for (int i = 0; i < w.rows(); ++i) {
      double z = b[i];
      for (int j = 0; j < w.cols(); ++j) z += w(i, j) * act[j];
      next[i] = layer + 1 < 4 ? 1.0 / (1.0 + std::exp(-z)) : z;
    }
    act = std::move(next);
  }

  const Tensor out = model.forward(x);
  CHECK(close_rel(out(0, 0), act[0], 1e-12, 1e-14));
  CHECK(close_rel(out(1, 0), act[1], 1e-12, 1e-14));
}

TEST_CASE("polyfeature forward basics and brute-force oracle") {
  {
    PolyFeatureModel constant(3);
    constant.gamma = Tensor::filled(3, 1, 5.0);
    const Tensor out = constant.forward(Tensor::column({1.0, -2.0, 0.5}));
    for (int i = 0; i < 3; ++i) CHECK(out[i] == 5.0);
  }
  {
    // N=2: only alpha^1_{21} = 1 (0-based pair (k=1, j=0)) -> output_1 = u2 u1.
    PolyFeatureModel model(2);
    model.alpha(0, 1) = 1.0;
    const Tensor out = model.forward(Tensor::column({3.0, 4.0}));
    CHECK(out[0] == 12.0);
    CHECK(out[1] == 0.0);
  }
  {
    SplitMix64 rng(71);
    PolyFeatureModel model(3);
    model.init_gaussian(rng);
    model.gamma = random_tensor(3, 1, rng);
    const Tensor u = random_tensor(3, 1, rng);
    const Tensor out = model.forward(u);
    for (int i = 0; i < 3; ++i) {
      double expected = model.gamma[i];
      int pair = 0;
      for (int k = 0; k < 3; ++k) {
        for (int j = 0; j <= k; ++j) expected += model.alpha(i, pair++) * u[k] * u[j];
      }
      for (int k = 0; k < 3; ++k) expected += model.beta(i, k) * u[k];
      CHECK(close_rel(out[i], expected, 1e-12, 1e-14));
    }
  }
}

TEST_CASE("taped evaluation agrees bitwise with plain forward") {
  SplitMix64 rng(2025);
  std::vector<std::unique_ptr<Model>> models;
  {
    auto kernel = std::make_unique<ParametricPolyKernel>(4, 4, 6, 2);
    kernel->init_gaussian(rng);
    models.push_back(std::move(kernel));
  }
  {
    auto mlp = std::make_unique<Mlp>(std::vector<int>{4, 9, 9, 9, 4});
    mlp->init_gaussian(rng);
    models.push_back(std::move(mlp));
  }
  {
    auto poly = std::make_unique<PolyFeatureModel>(4);
    poly->init_gaussian(rng);
    models.push_back(std::move(poly));
  }
  models.push_back(std::make_unique<Lorenz96Model>(Lorenz96Params{8, 5.0}));

  for (const auto& model : models) {
    for (int trial = 0; trial < 100; ++trial) {
      const Tensor x = random_tensor(model->input_dim(), 1, rng, 3.0);
      Tape tape;
      const TapedModel taped = model->record_params(tape);
      const NodeId out = model->record_apply(tape, taped, tape.constant(x));
      CHECK(tape.value(out) == model->forward(x));
    }
  }
}

TEST_CASE("parameter round-trip and counts") {
  SplitMix64 rng(3);
  ParametricPolyKernel kernel(3, 2, 5, 2);
  kernel.init_gaussian(rng);
  CHECK(kernel.param_count() == 5 * 3 + 5 + 2 * 5 + 2);

  const Tensor flat = kernel.params();
  const Tensor x = random_tensor(3, 1, rng);
  const Tensor before = kernel.forward(x);
  kernel.set_params(flat);
  CHECK(kernel.forward(x) == before);

  PolyFeatureModel poly(8);
  CHECK(poly.param_count() == 360);  // 8 outputs x (36 + 8 + 1)

  Mlp mlp = Mlp::standard(1, 1);
  CHECK(mlp.param_count() == 100 + 100 + 10000 + 100 + 10000 + 100 + 100 + 1);

  CHECK_THROWS_AS(kernel.set_params(Tensor::zeros(3, 1)), DimensionError);
}

TEST_CASE("ridge fit trivial cases") {
  {
    const std::vector<Tensor> xs = {Tensor::column({0.0})};
    const std::vector<Tensor> ys = {Tensor::column({5.0})};
    const KernelRidge fit = ridge_fit(xs, ys, 1.0, 1.0, 1, 0.0);
    CHECK(close_rel(fit.alpha(0, 0), 5.0, 1e-12));
    CHECK(close_rel(ridge_predict(fit, xs[0])(0, 0), 5.0, 1e-12));
  }
  {
    // Two points, linear kernel, no ridge: interpolates both targets; the
    // oracle is the 2x2 solve done by hand.
    const std::vector<Tensor> xs = {Tensor::column({1.0}), Tensor::column({2.0})};
    const std::vector<Tensor> ys = {Tensor::column({3.0}), Tensor::column({-1.0})};
    const double b = 1.0, c = 1.0;
    const KernelRidge fit = ridge_fit(xs, ys, b, c, 1, 0.0);

    const double k11 = 2.0, k12 = 3.0, k22 = 5.0;
    const double det = k11 * k22 - k12 * k12;
    const double a1 = (k22 * 3.0 - k12 * -1.0) / det;
    const double a2 = (-k12 * 3.0 + k11 * -1.0) / det;
    CHECK(close_rel(fit.alpha(0, 0), a1, 1e-10));
    CHECK(close_rel(fit.alpha(1, 0), a2, 1e-10));
    CHECK(close_rel(ridge_predict(fit, xs[0])(0, 0), 3.0, 1e-10));
    CHECK(close_rel(ridge_predict(fit, xs[1])(0, 0), -1.0, 1e-10));
  }
  CHECK_THROWS_AS(ridge_fit({}, {}, 1.0, 1.0, 1, 0.0), InvalidInputError);
}

TEST_CASE("ridge prediction is linear in the weights") {
  SplitMix64 rng(100);
  std::vector<Tensor> xs, ys;
  for (int i = 0; i < 6; ++i) {
    xs.push_back(random_tensor(2, 1, rng));
    ys.push_back(random_tensor(1, 1, rng));
  }
  KernelRidge fit = ridge_fit(xs, ys, 0.5, 1.0, 2, 0.01);
  const Tensor x = random_tensor(2, 1, rng);
  const double before = ridge_predict(fit, x)(0, 0);

  // Doubling all weights doubles the output.
  for (double& v : fit.alpha.data()) v *= 2.0;
  CHECK(close_rel(ridge_predict(fit, x)(0, 0), 2.0 * before, 1e-12));

  // Direct-summation oracle.
  for (double& v : fit.alpha.data()) v *= 0.5;
  double direct = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    direct += fit.alpha(static_cast<int>(i), 0) * poly_kernel(0.5, 1.0, 2, x, xs[i]);
  }
  CHECK(close_rel(ridge_predict(fit, x)(0, 0), direct, 1e-12));
}

TEST_CASE("ridge interpolates exactly with no regularization") {
  const std::vector<Tensor> xs = {Tensor::column({-1.5}), Tensor::column({-0.5}),
                                  Tensor::column({0.5}), Tensor::column({1.5})};
  std::vector<Tensor> ys;
  for (const Tensor& x : xs) ys.push_back(Tensor::column({cubic_target(x[0])}));
  const KernelRidge fit = ridge_fit(xs, ys, 1.0, 10.0, 3, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(std::abs(ridge_predict(fit, xs[i])(0, 0) - ys[i][0]) <= 1e-8);
  }
}

TEST_CASE("ridge on the cubic benchmark reaches the expected loss scale") {
  // 25 points evenly spaced in [-2, 2], d=3, lambda=0.1, c=10, b=1/D.
  std::vector<Tensor> xs, ys;
  for (int i = 0; i < 25; ++i) {
    const double x = -2.0 + 4.0 * static_cast<double>(i) / 24.0;
    xs.push_back(Tensor::column({x}));
    ys.push_back(Tensor::column({cubic_target(x)}));
  }
  const KernelRidge fit = ridge_fit(xs, ys, 1.0, 10.0, 3, 0.1);
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ridge_predict(fit, xs[i])(0, 0) - ys[i][0];
    loss += r * r;
  }
  loss /= static_cast<double>(xs.size());
  CHECK(loss >= 1e-3);
  CHECK(loss <= 1e-1);
}
