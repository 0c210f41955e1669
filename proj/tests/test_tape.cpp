#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "odekernel/tape.hpp"

#include <cmath>
#include <vector>

#include "odekernel/systems.hpp"
#include "support.hpp"

using namespace odekernel;
using namespace odekernel::testing;

TEST_CASE("record caches forward values") {
  Tape tape;
  const NodeId a = tape.constant(Tensor::from_rows({{1, 2}}));
  const NodeId b = tape.constant(Tensor::from_rows({{3, 4}}));
  const NodeId s = tape.add(a, b);
  CHECK(tape.value(s) == Tensor::from_rows({{4, 6}}));

  const NodeId z = tape.constant(Tensor::from_rows({{0.0}}));
  CHECK(tape.value(tape.sigmoid(z))(0, 0) == 0.5);
}

TEST_CASE("taped matmul chain matches direct composition") {
  SplitMix64 rng(41);
  const Tensor w = random_tensor(3, 4, rng);
  const Tensor x = random_tensor(4, 1, rng);
  const Tensor b = random_tensor(4, 1, rng);

  Tape tape;
  const NodeId out = tape.matmul(tape.constant(w), tape.add(tape.constant(x), tape.constant(b)));
  CHECK(tape.value(out) == matmul(w, add(x, b)));
}

TEST_CASE("backward on simple analytic cases") {
  {
    Tape tape;
    const NodeId p = tape.parameter(Tensor::from_rows({{3.0}}));
    const NodeId loss = tape.sum_squares(p);  // J = p^2
    tape.backward(loss);
    CHECK(tape.adjoint(p)(0, 0) == doctest::Approx(6.0).epsilon(1e-14));
  }
  {
    Tape tape;
    const NodeId p = tape.parameter(Tensor::from_rows({{0.0}}));
    const NodeId loss = tape.mean(tape.sigmoid(p));  // J = sigmoid(p)
    tape.backward(loss);
    CHECK(tape.adjoint(p)(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  }
}

TEST_CASE("backward rejects non-scalar losses") {
  Tape tape;
  const NodeId p = tape.parameter(Tensor::from_rows({{1.0}, {2.0}}));
  CHECK_THROWS_AS(tape.backward(p), InvalidInputError);
}

TEST_CASE("random three-layer graph gradient matches finite differences") {
  SplitMix64 rng(77);
  const Tensor w1 = random_tensor(5, 3, rng);
  const Tensor b1 = random_tensor(5, 1, rng);
  const Tensor w2 = random_tensor(4, 5, rng);
  const Tensor b2 = random_tensor(4, 1, rng);
  const Tensor w3 = random_tensor(1, 4, rng);
  const Tensor x = random_tensor(3, 1, rng);

  // Flat layout: w1, b1, w2, b2, w3.
  const std::vector<Tensor> blocks = {w1, b1, w2, b2, w3};
  auto eval = [&](const Tensor& flat) {
    std::vector<Tensor> local = blocks;
    std::size_t at = 0;
    for (Tensor& t : local) {
      for (double& v : t.data()) v = flat[at++];
    }
    const Tensor h1 = sigmoid(add(matmul(local[0], x), local[1]));
    const Tensor h2 = sigmoid(add(matmul(local[2], h1), local[3]));
    const Tensor out = matmul(local[4], h2);
    return out(0, 0) * out(0, 0);
  };

  std::size_t total = 0;
  for (const Tensor& t : blocks) total += t.size();
  Tensor flat(static_cast<int>(total), 1);
  std::size_t at = 0;
  for (const Tensor& t : blocks) {
    for (double v : t.data()) flat[at++] = v;
  }

  Tape tape;
  std::vector<NodeId> param_ids;
  for (const Tensor& t : blocks) param_ids.push_back(tape.parameter(t));
  const NodeId xc = tape.constant(x);
  const NodeId h1 = tape.sigmoid(tape.add(tape.matmul(param_ids[0], xc), param_ids[1]));
  const NodeId h2 = tape.sigmoid(tape.add(tape.matmul(param_ids[2], h1), param_ids[3]));
  const NodeId loss = tape.sum_squares(tape.matmul(param_ids[4], h2));
  tape.backward(loss);

  Tensor reverse(static_cast<int>(total), 1);
  at = 0;
  for (const NodeId id : param_ids) {
    for (double v : tape.adjoint(id).data()) reverse[at++] = v;
  }
  CHECK(gradients_match(reverse, fd_gradient(eval, flat)));
}

TEST_CASE("every op kind gradient matches finite differences at random inputs") {
  SplitMix64 rng(1234);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = random_tensor(3, 2, rng);
    const Tensor b = random_tensor(3, 2, rng);
    const Tensor m = random_tensor(2, 3, rng);

    struct Case {
      const char* name;
      std::function<NodeId(Tape&, NodeId)> build;  // unary in the flat input
    };
    // Each case maps the 3x2 input through one op and reduces via sum_squares
    // (or uses the op itself when it is already scalar).
    const std::vector<Case> cases = {
        {"add", [&](Tape& t, NodeId p) { return t.sum_squares(t.add(p, t.constant(b))); }},
        {"matmul-left",
         [&](Tape& t, NodeId p) { return t.sum_squares(t.matmul(t.constant(m), p)); }},
        {"matmul-right",
         [&](Tape& t, NodeId p) { return t.sum_squares(t.matmul(t.constant(m), p)); }},
        {"hadamard",
         [&](Tape& t, NodeId p) { return t.sum_squares(t.hadamard(p, t.constant(b))); }},
        {"scale", [&](Tape& t, NodeId p) { return t.sum_squares(t.scale(p, -1.7)); }},
        {"sigmoid", [&](Tape& t, NodeId p) { return t.sum_squares(t.sigmoid(p)); }},
        {"power", [&](Tape& t, NodeId p) { return t.sum_squares(t.power(p, 3)); }},
        {"sum-squares", [&](Tape& t, NodeId p) { return t.sum_squares(p); }},
        {"mean", [&](Tape& t, NodeId p) { return t.mean(p); }},
    };

    for (const Case& c : cases) {
      Tape tape;
      const NodeId p = tape.parameter(a);
      const NodeId loss = c.build(tape, p);
      tape.backward(loss);
      Tensor reverse(static_cast<int>(a.size()), 1);
      for (std::size_t i = 0; i < a.size(); ++i) reverse[i] = tape.adjoint(p)[i];

      auto eval = [&](const Tensor& flat) {
        Tensor input(a.rows(), a.cols());
        for (std::size_t i = 0; i < a.size(); ++i) input[i] = flat[i];
        Tape t2;
        const NodeId q = t2.parameter(input);
        return t2.value(c.build(t2, q))(0, 0);
      };
      Tensor flat(static_cast<int>(a.size()), 1);
      for (std::size_t i = 0; i < a.size(); ++i) flat[i] = a[i];
      const Tensor fd = fd_gradient(eval, flat);
      CHECK_MESSAGE(gradients_match(reverse, fd), c.name);
    }
  }
}

TEST_CASE("adjoint accumulation is linear over summed losses") {
  SplitMix64 rng(55);
  const Tensor p0 = random_tensor(4, 1, rng);
  const Tensor c1 = random_tensor(4, 1, rng);
  const Tensor c2 = random_tensor(4, 1, rng);

  auto gradient_of = [&](bool first, bool second, bool summed) {
    Tape tape;
    const NodeId p = tape.parameter(p0);
    const NodeId l1 = tape.sum_squares(tape.add(p, tape.constant(c1)));
    const NodeId l2 = tape.sum_squares(tape.hadamard(p, tape.constant(c2)));
    NodeId loss = l1;
    if (summed) {
      loss = tape.add(l1, l2);
    } else if (second) {
      loss = l2;
    }
    tape.backward(loss);
    return tape.adjoint(p);
  };

  const Tensor g1 = gradient_of(true, false, false);
  const Tensor g2 = gradient_of(false, true, false);
  const Tensor g12 = gradient_of(false, false, true);
  CHECK(max_abs_diff(g12, add(g1, g2)) <= 1e-14);
}

TEST_CASE("taping the same computation twice is bitwise deterministic") {
  auto run = [] {
    SplitMix64 rng(2024);
    const Tensor w = random_tensor(4, 4, rng);
    const Tensor x = random_tensor(4, 1, rng);
    Tape tape;
    const NodeId p = tape.parameter(w);
    const NodeId loss = tape.sum_squares(tape.sigmoid(tape.matmul(p, tape.constant(x))));
    tape.backward(loss);
    return std::pair{tape.value(loss)(0, 0), tape.adjoint(p)};
  };
  const auto [v1, g1] = run();
  const auto [v2, g2] = run();
  CHECK(v1 == v2);
  CHECK(g1 == g2);
}

TEST_CASE("replay after parameter update reproduces fresh recordings") {
  SplitMix64 rng(31);
  const Tensor w_first = random_tensor(3, 3, rng);
  const Tensor w_second = random_tensor(3, 3, rng);
  const Tensor x = random_tensor(3, 1, rng);

  Tape tape;
  const NodeId p = tape.parameter(w_first);
  const NodeId loss = tape.sum_squares(tape.power(tape.matmul(p, tape.constant(x)), 2));
  tape.set_value(p, w_second);
  tape.replay();

  Tape fresh;
  const NodeId q = fresh.parameter(w_second);
  const NodeId fresh_loss = fresh.sum_squares(fresh.power(fresh.matmul(q, fresh.constant(x)), 2));
  CHECK(tape.value(loss) == fresh.value(fresh_loss));
}

TEST_CASE("inputs must already live on the tape") {
  Tape tape;
  const NodeId a = tape.constant(Tensor::ones(2, 1));
  CHECK_THROWS_AS(tape.add(a, static_cast<NodeId>(5)), InvalidInputError);
}

TEST_CASE("generic record covers compute kinds and rejects leaves") {
  Tape tape;
  const NodeId a = tape.constant(Tensor::from_rows({{1, 2}}));
  const NodeId b = tape.constant(Tensor::from_rows({{3, 4}}));
  const std::vector<NodeId> pair = {a, b};
  const NodeId s = tape.record(OpKind::Add, pair);
  CHECK(tape.value(s) == Tensor::from_rows({{4, 6}}));
  const std::vector<NodeId> single = {s};
  CHECK(tape.value(tape.record(OpKind::Scale, single, 2.0)) == Tensor::from_rows({{8, 12}}));
  CHECK_THROWS_AS(tape.record(OpKind::Constant, single), UnsupportedOpError);
}

TEST_CASE("jacobian of a linear map is its matrix") {
  SplitMix64 rng(8);
  const Tensor a = random_tensor(3, 4, rng);
  const Tensor x = random_tensor(4, 1, rng);
  const Tensor jac = jacobian(
      [&](Tape& tape, NodeId in) { return tape.matmul(tape.constant(a), in); }, x);
  CHECK(max_abs_diff(jac, a) <= 1e-14);
}

TEST_CASE("jacobian of x∘x is diag(2x)") {
  const Tensor x = Tensor::column({1.0, 2.0});
  const Tensor jac = jacobian([](Tape& tape, NodeId in) { return tape.power(in, 2); }, x);
  CHECK(jac(0, 0) == doctest::Approx(2.0));
  CHECK(jac(1, 1) == doctest::Approx(4.0));
  CHECK(jac(0, 1) == 0.0);
  CHECK(jac(1, 0) == 0.0);
}

TEST_CASE("jacobian of the Lorenz-96 RHS matches finite differences") {
  const Lorenz96Model model({8, 5.0});
  SplitMix64 rng(123);
  const Tensor u = random_tensor(8, 1, rng, 3.0);

  const Tensor jac = jacobian(
      [&](Tape& tape, NodeId in) {
        const TapedModel taped = model.record_params(tape);
        return model.record_apply(tape, taped, in);
      },
      u);

  for (int e = 0; e < 8; ++e) {
    auto component = [&](const Tensor& flat) {
      return lorenz96_rhs(model.system(), flat)[e];
    };
    const Tensor fd = fd_gradient(component, u);
    for (int d = 0; d < 8; ++d) {
      CHECK(close_rel(jac(e, d), fd[d], 1e-5));
    }
  }
}
