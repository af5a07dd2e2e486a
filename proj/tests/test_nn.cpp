#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "uniseq/common/error.hpp"
#include "uniseq/nn/checkpoint.hpp"
#include "uniseq/nn/gradcheck.hpp"
#include "uniseq/nn/ops.hpp"
#include "uniseq/nn/optim.hpp"
#include "uniseq/nn/params.hpp"
#include "uniseq/nn/transformer.hpp"

using namespace uniseq;
using namespace uniseq::nn;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Tensor t({r, c});
  for (auto& v : t.values()) v = d(rng);
  return t;
}

Tensor random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Tensor t({n});
  for (auto& v : t.values()) v = d(rng);
  return t;
}

// Reduces any matrix to a scalar with fixed random weights so every output
// element carries a distinct gradient.
Var weighted_sum(const Var& x, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Tensor w = random_matrix(x.cols(), 1, rng);
  Var out = matmul(x, Var::constant(w));
  Tensor ones({1, out.rows()});
  ones.fill(1.0);
  return matmul(Var::constant(ones), out);
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  t(1, 2) = 5.0;
  CHECK(t[5] == 5.0);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), Error);
  Tensor v({4});
  CHECK(v.rows() == 1);
  CHECK(v.cols() == 4);
}

TEST_CASE("non-finite op outputs are rejected") {
  Tensor a = Tensor::matrix(1, 2, {1.0, std::numeric_limits<double>::quiet_NaN()});
  Tensor b = Tensor::matrix(2, 1, {1.0, 1.0});
  CHECK_THROWS_AS(matmul(Var::constant(a), Var::constant(b)), Error);
  Tensor big = Tensor::matrix(1, 1, {1e300});
  CHECK_THROWS_AS(scale(Var::constant(big), 1e300), Error);
}

TEST_CASE("matmul and linear values") {
  Var a = Var::constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  Var b = Var::constant(Tensor::matrix(2, 2, {5, 6, 7, 8}));
  Tensor c = matmul(a, b).value();
  CHECK(c == Tensor::matrix(2, 2, {19, 22, 43, 50}));
  Var bias = Var::constant(Tensor({2}, {1.0, -1.0}));
  CHECK(linear(a, b, bias).value() == Tensor::matrix(2, 2, {20, 21, 44, 49}));
  CHECK_THROWS_AS(matmul(a, Var::constant(Tensor::matrix(3, 1, {1, 2, 3}))), Error);
}

TEST_CASE("cross entropy reference values") {
  SUBCASE("uniform logits give ln V") {
    Var logits = Var::constant(Tensor({2, 4}));
    std::vector<std::size_t> targets{0, 3};
    const double loss = cross_entropy(logits, targets, {true, true}).value()[0];
    CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(loss == doctest::Approx(1.386294).epsilon(1e-6));
  }
  SUBCASE("logits [2,1,0] target 0") {
    const double expect = -std::log(std::exp(2.0) / (std::exp(2.0) + std::exp(1.0) + 1.0));
    Var logits = Var::constant(Tensor::matrix(1, 3, {2, 1, 0}));
    std::vector<std::size_t> targets{0};
    const double loss = cross_entropy(logits, targets, {true}).value()[0];
    CHECK(loss == doctest::Approx(expect).epsilon(1e-12));
    CHECK(loss == doctest::Approx(0.40761).epsilon(1e-5));
  }
  SUBCASE("dominant target logit drives the loss to zero") {
    Var logits = Var::constant(Tensor::matrix(1, 3, {60, 0, 0}));
    std::vector<std::size_t> targets{0};
    CHECK(cross_entropy(logits, targets, {true}).value()[0] < 1e-20);
  }
  SUBCASE("mask selects rows and per-position NLL") {
    Var logits = Var::constant(Tensor::matrix(2, 3, {2, 1, 0, 0, 0, 0}));
    std::vector<std::size_t> targets{0, 1};
    std::vector<double> per;
    const double loss = cross_entropy(logits, targets, {false, true}, &per).value()[0];
    CHECK(loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(per[0] == 0.0);
    CHECK(per[1] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  }
  SUBCASE("errors") {
    Var logits = Var::constant(Tensor({1, 3}));
    std::vector<std::size_t> bad{3};
    CHECK_THROWS_AS(cross_entropy(logits, bad, {true}), Error);
    std::vector<std::size_t> ok{0};
    CHECK_THROWS_AS(cross_entropy(logits, ok, {false}), Error);
    CHECK_THROWS_AS(cross_entropy(logits, ok, {true, true}), Error);
  }
}

TEST_CASE("log_softmax is stable") {
  const auto ls = log_softmax(std::vector<double>{1000.0, 1000.0});
  CHECK(ls[0] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
  CHECK(ls[1] == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("attention with equal scores averages values") {
  // Zero queries make every score equal, so row 2 is the mean of both values.
  Var q = Var::constant(Tensor({2, 2}));
  Var k = Var::constant(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  Var v = Var::constant(Tensor::matrix(2, 2, {1, 0, 3, 2}));
  std::vector<std::size_t> seg{2};
  Tensor out = segment_causal_attention(q, k, v, 1, seg, nullptr).value();
  CHECK(out(0, 0) == doctest::Approx(1.0));
  CHECK(out(0, 1) == doctest::Approx(0.0));
  CHECK(out(1, 0) == doctest::Approx(2.0));
  CHECK(out(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("single position attention is the value path") {
  std::mt19937_64 rng(3);
  ParamSet ps;
  const std::size_t D = 4;
  for (const char* n : {"wq", "wk", "wv", "wo"}) ps.add(n, random_matrix(D, D, rng, 0.5));
  for (const char* n : {"bq", "bk", "bv", "bo"}) ps.add(n, random_vector(D, rng, 0.1));
  ParamBinding bind(ps, false);
  AttentionParams p{bind["wq"], bind["bq"], bind["wk"], bind["bk"], bind["wv"], bind["bv"], bind["wo"], bind["bo"], 2};
  Var x = Var::constant(random_matrix(1, D, rng));
  std::vector<std::size_t> seg{1};
  Tensor out = causal_self_attention(x, p, seg, nullptr).value();
  Tensor expect = linear(linear(x, p.wv, p.bv), p.wo, p.bo).value();
  for (std::size_t i = 0; i < D; ++i) CHECK(out[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("attention counter adds squared segment lengths") {
  std::mt19937_64 rng(4);
  Var x = Var::constant(random_matrix(7, 4, rng));
  std::vector<std::size_t> seg{3, 4};
  AttentionCounter counter;
  segment_causal_attention(x, x, x, 2, seg, &counter);
  CHECK(counter.score_entries == 9 + 16);
  CHECK(counter.calls == 1);
  std::vector<std::size_t> bad{3, 3};
  CHECK_THROWS_AS(segment_causal_attention(x, x, x, 2, bad, nullptr), Error);
  CHECK_THROWS_AS(segment_causal_attention(x, x, x, 3, seg, nullptr), Error);
}

TEST_CASE("stack outputs are causal, exactly, within each segment") {
  std::mt19937_64 rng(5);
  ParamSet ps;
  const StackConfig cfg{2, 8, 2, 16};
  init_stack(ps, "s", cfg, rng, 0.3);
  ParamBinding bind(ps, false);
  const std::vector<std::size_t> seg{4, 3};
  Tensor base = random_matrix(7, 8, rng);
  const Tensor ref = stack_forward(bind, "s", cfg, Var::constant(base), seg, nullptr).value();
  const std::size_t starts[] = {0, 0, 0, 0, 4, 4, 4};
  const std::size_t ends[] = {4, 4, 4, 4, 7, 7, 7};
  for (std::size_t j = 0; j < 7; ++j) {
    Tensor pert = base;
    for (std::size_t c = 0; c < 8; ++c) pert(j, c) += 3.0 + static_cast<double>(c);
    const Tensor out = stack_forward(bind, "s", cfg, Var::constant(pert), seg, nullptr).value();
    for (std::size_t i = 0; i < 7; ++i) {
      const bool may_change = i >= j && i < ends[j] && j >= starts[i];
      bool same = true;
      for (std::size_t c = 0; c < 8; ++c) same = same && out(i, c) == ref(i, c);
      if (!may_change) CHECK_MESSAGE(same, "row " << i << " changed after perturbing row " << j);
      if (i == j) CHECK_FALSE(same);
    }
  }
}

TEST_CASE("stack forward is deterministic") {
  std::mt19937_64 r1(9), r2(9);
  ParamSet a, b;
  const StackConfig cfg{1, 8, 2, 16};
  init_stack(a, "s", cfg, r1);
  init_stack(b, "s", cfg, r2);
  CHECK(a == b);
  std::mt19937_64 rx(1);
  Tensor x = random_matrix(5, 8, rx);
  std::vector<std::size_t> seg{5};
  ParamBinding ba(a, false), bb(b, false);
  CHECK(stack_forward(ba, "s", cfg, Var::constant(x), seg, nullptr).value() ==
        stack_forward(bb, "s", cfg, Var::constant(x), seg, nullptr).value());
}

TEST_CASE("stack parameter count matches registration") {
  std::mt19937_64 rng(1);
  ParamSet ps;
  const StackConfig cfg{3, 16, 4, 40};
  init_stack(ps, "g", cfg, rng);
  CHECK(ps.count() == cfg.param_count());
  // Per block: 2 layer norms, 4 projections, 2 feed-forward layers.
  const std::size_t D = 16, F = 40;
  const std::size_t block = 2 * 2 * D + 4 * (D * D + D) + (D * F + F) + (F * D + D);
  CHECK(cfg.param_count() == 3 * block + 2 * D);
  CHECK_THROWS_AS((StackConfig{1, 10, 4, 8}.validate("x")), Error);
}

TEST_CASE("grad_check on analytic functions") {
  SUBCASE("w^2 at 3") {
    ParamSet ps;
    ps.add("w", Tensor({1, 1}, {3.0}));
    auto f = [](const ParamBinding& b) { return matmul(b["w"], b["w"]); };
    ParamBinding bind(ps, true);
    backward(f(bind));
    CHECK(bind.grads()[0][0] == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(grad_check(f, ps, 1e-4).max_rel_error < 1e-10);
  }
  SUBCASE("constant objective") {
    ParamSet ps;
    ps.add("w", Tensor({1, 1}, {2.0}));
    auto f = [](const ParamBinding&) { return Var::constant(Tensor({1, 1}, {5.0})); };
    const auto r = grad_check(f, ps, 1e-5);
    CHECK(r.max_abs_error == 0.0);
    CHECK(r.checked == 1);
  }
  SUBCASE("epsilon domain") {
    ParamSet ps;
    ps.add("w", Tensor({1, 1}, {2.0}));
    auto f = [](const ParamBinding& b) { return b["w"]; };
    CHECK_THROWS_AS(grad_check(f, ps, 1e-2), Error);
    CHECK_THROWS_AS(grad_check(f, ps, 1e-9), Error);
  }
}

TEST_CASE("every op passes the finite-difference check") {
  std::mt19937_64 rng(11);
  ParamSet ps;
  ps.add("x", random_matrix(4, 3, rng));
  ps.add("w", random_matrix(3, 5, rng, 0.5));
  ps.add("b", random_vector(5, rng));
  ps.add("g", random_vector(3, rng));
  ps.add("table", random_matrix(6, 3, rng));
  ps.add("q", random_matrix(5, 4, rng));
  ps.add("k", random_matrix(5, 4, rng));
  ps.add("v", random_matrix(5, 4, rng));

  auto check = [&](const char* what, const Objective& f) {
    CAPTURE(what);
    CHECK(grad_check(f, ps, 1e-5).max_rel_error < 1e-4);
  };
  check("linear+gelu", [](const ParamBinding& b) { return weighted_sum(gelu(linear(b["x"], b["w"], b["b"])), 1); });
  check("add_row+scale", [](const ParamBinding& b) {
    return weighted_sum(scale(add_row(matmul(b["x"], b["w"]), b["b"]), -0.7), 2);
  });
  check("add", [](const ParamBinding& b) { return weighted_sum(add(b["x"], scale(b["x"], 2.0)), 3); });
  check("layer_norm", [](const ParamBinding& b) { return weighted_sum(layer_norm(b["x"], b["g"], b["g"]), 4); });
  check("reshape", [](const ParamBinding& b) { return weighted_sum(reshape(b["x"], 3, 4), 5); });
  check("gather_rows", [](const ParamBinding& b) {
    const std::vector<std::size_t> ids{5, 0, 5, 2};
    return weighted_sum(gather_rows(b["table"], ids), 6);
  });
  check("embedding_bag", [](const ParamBinding& b) {
    const std::vector<std::vector<BagEntry>> bags{{{1, 1.0}, {4, 0.5}}, {}, {{1, -2.0}}};
    return weighted_sum(embedding_bag(b["table"], bags), 7);
  });
  check("scatter_add_rows", [](const ParamBinding& b) {
    const std::vector<std::size_t> rows{0, 5, 0, 2};
    return weighted_sum(scatter_add_rows(b["table"], b["x"], rows), 8);
  });
  check("repeat_rows+concat", [](const ParamBinding& b) {
    return weighted_sum(concat_rows(repeat_rows(b["x"], 3), b["table"]), 9);
  });
  check("attention", [](const ParamBinding& b) {
    const std::vector<std::size_t> seg{2, 3};
    return weighted_sum(segment_causal_attention(b["q"], b["k"], b["v"], 2, seg, nullptr), 10);
  });
  check("cross_entropy", [](const ParamBinding& b) {
    const std::vector<std::size_t> t{4, 0, 2, 1};
    return cross_entropy(linear(b["x"], b["w"], b["b"]), t, {true, false, true, true});
  });
}

TEST_CASE("transformer block gradients match finite differences") {
  std::mt19937_64 rng(12);
  ParamSet ps;
  const StackConfig cfg{1, 8, 2, 12};
  init_stack(ps, "s", cfg, rng, 0.4);
  ps.add("x", random_matrix(5, 8, rng));
  auto f = [&](const ParamBinding& b) {
    const std::vector<std::size_t> seg{5};
    return weighted_sum(stack_forward(b, "s", cfg, b["x"], seg, nullptr), 13);
  };
  CHECK(grad_check(f, ps, 1e-5).max_rel_error < 1e-4);
}

TEST_CASE("lr schedule") {
  const double peak = 1e-3;
  CHECK(lr_schedule(400, peak, 400) == doctest::Approx(peak).epsilon(1e-15));
  CHECK(lr_schedule(1600, peak, 400) == doctest::Approx(peak / 2).epsilon(1e-15));
  CHECK(lr_schedule(200, peak, 400) == doctest::Approx(peak / 2).epsilon(1e-15));
  double prev = 0.0;
  for (std::uint64_t s = 1; s <= 400; ++s) {
    const double r = lr_schedule(s, peak, 400);
    CHECK(r > prev);
    prev = r;
  }
  for (std::uint64_t s = 401; s <= 2000; ++s) {
    const double r = lr_schedule(s, peak, 400);
    CHECK(r < prev);
    CHECK(r <= peak);
    prev = r;
  }
}

TEST_CASE("adam update rules") {
  AdamConfig cfg{0.1, 1, 0.9, 0.999, 1e-8, 0.0};
  SUBCASE("zero gradient leaves params unchanged") {
    ParamSet ps;
    ps.add("w", Tensor({2}, {1.0, -2.0}));
    const ParamSet before = ps;
    auto st = OptimizerState::for_params(ps, cfg);
    for (int i = 0; i < 3; ++i) optimizer_step(ps, {Tensor({2})}, st);
    CHECK(ps == before);
    CHECK(st.step == 3);
  }
  SUBCASE("constant unit gradient moves by the scheduled rate") {
    ParamSet ps;
    ps.add("w", Tensor({1}, {0.0}));
    auto st = OptimizerState::for_params(ps, cfg);
    for (std::uint64_t s = 1; s <= 20; ++s) {
      const double before = ps.at(0)[0];
      const double lr = optimizer_step(ps, {Tensor({1}, {1.0})}, st);
      CHECK(lr == doctest::Approx(lr_schedule(s, cfg.peak_lr, cfg.warmup)));
      CHECK(before - ps.at(0)[0] == doctest::Approx(lr).epsilon(1e-6));
    }
  }
  SUBCASE("two steps on a quadratic reduce the loss") {
    ParamSet ps;
    ps.add("w", Tensor({1}, {2.0}));
    AdamConfig small{0.01, 1, 0.9, 0.999, 1e-8, 0.0};
    auto st = OptimizerState::for_params(ps, small);
    double loss = 4.0;
    for (int i = 0; i < 2; ++i) {
      const double w = ps.at(0)[0];
      optimizer_step(ps, {Tensor({1}, {2.0 * w})}, st);
      const double next = ps.at(0)[0] * ps.at(0)[0];
      CHECK(next < loss);
      loss = next;
    }
  }
  SUBCASE("errors leave params untouched") {
    ParamSet ps;
    ps.add("w", Tensor({2}, {1.0, 2.0}));
    const ParamSet before = ps;
    auto st = OptimizerState::for_params(ps, cfg);
    CHECK_THROWS_AS(optimizer_step(ps, {Tensor({3})}, st), Error);
    CHECK_THROWS_AS(optimizer_step(ps, {Tensor({2}, {1.0, std::numeric_limits<double>::infinity()})}, st), Error);
    CHECK(ps == before);
  }
  SUBCASE("clipping bounds the global norm") {
    ParamSet ps;
    ps.add("w", Tensor({2}, {0.0, 0.0}));
    AdamConfig c{0.1, 1, 0.0, 0.0, 0.0, 1.0};
    auto st = OptimizerState::for_params(ps, c);
    optimizer_step(ps, {Tensor({2}, {30.0, 40.0})}, st);
    // beta = 0 makes the update lr * sign(g) regardless of the clip factor.
    CHECK(ps.at(0)[0] == doctest::Approx(-0.1));
    CHECK(ps.at(0)[1] == doctest::Approx(-0.1));
  }
}

TEST_CASE("checkpoint round trip") {
  std::mt19937_64 rng(2);
  ParamSet ps;
  ps.add("a.w", random_matrix(3, 4, rng));
  ps.add("b", random_vector(5, rng));
  ps.add("c", Tensor({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8}));
  const auto bytes = encode_checkpoint(ps);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "UAW1");
  CHECK(decode_checkpoint(bytes) == ps);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad), FormatError);
  std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 3);
  CHECK_THROWS_AS(decode_checkpoint(cut), FormatError);
}
