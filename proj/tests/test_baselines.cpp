#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "uniseq/baselines/cost.hpp"
#include "uniseq/baselines/models.hpp"
#include "uniseq/common/error.hpp"

using namespace uniseq;
using namespace uniseq::baselines;

namespace {

constexpr LayoutKind kAll[] = {LayoutKind::Flatten, LayoutKind::CoarseFirst, LayoutKind::Parallel, LayoutKind::Delay,
                               LayoutKind::MultiScale};

std::set<Cell> as_set(const std::vector<Cell>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("layout names") {
  for (auto k : kAll) CHECK(layout_from_name(layout_name(k)) == k);
  CHECK(layout_from_name("coarse") == LayoutKind::CoarseFirst);
  CHECK_THROWS_AS(layout_from_name("zigzag"), Error);
}

TEST_CASE("emission steps match the definitions") {
  for (auto kind : kAll)
    for (std::size_t T = 1; T <= 4; ++T)
      for (std::size_t nq = 1; nq <= 4; ++nq) {
        CAPTURE(layout_name(kind));
        CAPTURE(T);
        CAPTURE(nq);
        const auto L = make_layout(kind, T, nq);
        const auto ref = testing::reference_steps(kind, T, nq);
        REQUIRE(L.step_of == ref);
        for (std::size_t s = 0; s < L.steps.size(); ++s)
          for (const auto& c : L.steps[s]) CHECK(L.step_of[L.cell_index(c)] == s);
      }
}

TEST_CASE("completeness and anti-leakage") {
  for (auto kind : kAll)
    for (std::size_t T = 1; T <= 4; ++T)
      for (std::size_t nq = 1; nq <= 4; ++nq) {
        CAPTURE(layout_name(kind));
        const auto L = make_layout(kind, T, nq);
        std::multiset<Cell> emitted;
        for (const auto& st : L.steps) emitted.insert(st.begin(), st.end());
        CHECK(emitted.size() == T * nq);
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t k = 0; k < nq; ++k) CHECK(emitted.count({t, k}) == 1);
        const auto brute = testing::visibility_from_steps(L.steps, T, nq);
        for (std::size_t t = 0; t < T; ++t)
          for (std::size_t k = 0; k < nq; ++k) {
            const Cell c{t, k};
            const auto& vis = visible_set(L, c);
            CHECK(as_set(vis) == brute[L.cell_index(c)]);
            CHECK(std::is_sorted(vis.begin(), vis.end()));
            for (const auto& v : vis) CHECK(L.step_of[L.cell_index(v)] < L.step_of[L.cell_index(c)]);
          }
      }
}

TEST_CASE("flattening and multiscale share the autoregressive set") {
  for (std::size_t T = 1; T <= 4; ++T)
    for (std::size_t nq = 1; nq <= 4; ++nq) {
      const auto F = layout_flatten(T, nq), M = layout_multiscale(T, nq);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < nq; ++k) {
          const auto ar = testing::autoregressive_set({t, k}, nq);
          CHECK(as_set(visible_set(F, {t, k})) == ar);
          CHECK(as_set(visible_set(M, {t, k})) == ar);
        }
    }
}

TEST_CASE("layout examples") {
  SUBCASE("flattening") {
    const auto L = layout_flatten(3, 3);
    CHECK(L.sequence_length() == 9);
    // (2,2) in 1-based terms
    CHECK(as_set(visible_set(L, {1, 1})) == std::set<Cell>{{0, 0}, {0, 1}, {0, 2}, {1, 0}});
    const auto one = layout_flatten(1, 1);
    CHECK(one.sequence_length() == 1);
    CHECK(visible_set(one, {0, 0}).empty());
  }
  SUBCASE("coarse first") {
    const auto L = layout_coarse_first(3, 3);
    CHECK(L.sequence_length() == 9);
    const std::vector<Cell> first{{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}};
    for (std::size_t s = 0; s < first.size(); ++s) CHECK(L.steps[s] == std::vector<Cell>{first[s]});
    CHECK(as_set(visible_set(L, {0, 1})).count({2, 0}) == 1);
    for (std::size_t T = 1; T <= 4; ++T) {
      const auto a = layout_coarse_first(T, 1), b = layout_flatten(T, 1);
      CHECK(a.steps == b.steps);
      CHECK(a.visible == b.visible);
    }
  }
  SUBCASE("parallel") {
    const auto L = layout_parallel(3, 3);
    CHECK(L.sequence_length() == 3);
    for (const auto& st : L.steps) CHECK(st.size() == 3);
    for (std::size_t t = 0; t < 3; ++t)
      for (std::size_t k = 0; k < 3; ++k)
        for (const auto& v : visible_set(L, {t, k})) CHECK(v.t < t);
    const auto a = layout_parallel(4, 1), b = layout_flatten(4, 1);
    CHECK(a.steps == b.steps);
    CHECK(a.visible == b.visible);
  }
  SUBCASE("delay") {
    const auto L = layout_delay(3, 3);
    REQUIRE(L.sequence_length() == 5);
    const std::vector<std::set<Cell>> expect{
        {{0, 0}}, {{1, 0}, {0, 1}}, {{2, 0}, {1, 1}, {0, 2}}, {{2, 1}, {1, 2}}, {{2, 2}}};
    for (std::size_t s = 0; s < 5; ++s) CHECK(as_set(L.steps[s]) == expect[s]);
    const auto vis = as_set(visible_set(L, {1, 1}));
    CHECK(vis.count({1, 0}) == 1);
    CHECK(vis.count({0, 1}) == 1);
    CHECK(vis.count({0, 2}) == 0);
    // Each row is empty for n_q - 1 of the T + n_q - 1 steps.
    CHECK(L.padding.size() == 6);
    for (const auto& p : L.padding)
      for (const auto& c : L.steps[p.step]) CHECK(c.k != p.row);
    const auto one = layout_delay(4, 1);
    CHECK(one.padding.empty());
    CHECK(one.steps == layout_flatten(4, 1).steps);
  }
  SUBCASE("errors") {
    const auto L = layout_flatten(2, 2);
    CHECK_THROWS_AS(visible_set(L, {2, 0}), Error);
    CHECK_THROWS_AS(visible_set(L, {0, 2}), Error);
    CHECK_THROWS_AS(make_layout(LayoutKind::Delay, 0, 2), Error);
  }
}

TEST_CASE("layout rendering") {
  CHECK(render_layout(layout_flatten(3, 3)) ==
        "flatten T=3 n_q=3 steps=9\n"
        "k1 | 1 4 7\n"
        "k2 | 2 5 8\n"
        "k3 | 3 6 9\n");
  CHECK(render_layout(layout_delay(3, 2)) ==
        "delay T=3 n_q=2 steps=4\n"
        "k1 | 1 2 3\n"
        "k2 | 2 3 4\n"
        "emission (frame per step, 0 = empty)\n"
        "k1 | 1 2 3 0\n"
        "k2 | 0 1 2 3\n");
}

TEST_CASE("attention cost closed forms") {
  CHECK(attention_cost(LayoutKind::Flatten, 3, 3, 1).entries == 81);
  CHECK(attention_cost(LayoutKind::MultiScale, 3, 3, 1, 1).entries == 36);
  CHECK(attention_cost(LayoutKind::Flatten, 3, 3, 1).length == 9);
  CHECK(attention_cost(LayoutKind::Delay, 3, 3, 2) == AttentionCost{50, 5});
  CHECK(attention_cost(LayoutKind::Parallel, 7, 3, 2) == AttentionCost{98, 7});
  for (std::size_t T : {2, 5, 40})
    CHECK(attention_cost(LayoutKind::Flatten, 2 * T, 3, 2).entries ==
          4 * attention_cost(LayoutKind::Flatten, T, 3, 2).entries);
  // Global term does not grow with n_q.
  for (std::size_t nq : {1, 3, 8}) {
    const auto c = attention_cost(LayoutKind::MultiScale, 50, nq, 4, 2);
    CHECK(c.entries - 50 * nq * nq * 2 == 50 * 50 * 4);
    CHECK(c.length == 50);
  }
  CHECK_THROWS_AS(attention_cost(LayoutKind::Flatten, 0, 3, 1), Error);
}

TEST_CASE("instrumented counts equal the closed forms") {
  std::mt19937_64 rng(3);
  for (auto kind : {LayoutKind::Flatten, LayoutKind::CoarseFirst, LayoutKind::Parallel, LayoutKind::Delay})
    for (std::size_t T : {1, 3, 6})
      for (std::size_t nq : {1, 3}) {
        CAPTURE(layout_name(kind));
        BaselineConfig cfg;
        cfg.layout = kind;
        cfg.n_q = nq;
        cfg.codebook = 5;
        cfg.stack = {2, 8, 2, 16};
        cfg.max_len = 32;
        const auto m = BaselineModel::init(cfg, 1);
        const std::vector<codec::TokenGrid> batch{testing::random_grid(T, nq, 5, rng),
                                                  testing::random_grid(T, nq, 5, rng)};
        nn::ParamBinding bind(m.params, false);
        nn::AttentionCounter counter;
        baseline_forward(bind, cfg, batch, &counter);
        CHECK(counter.score_entries == 2 * attention_cost(kind, T, nq, 2).entries);
      }
}

TEST_CASE("baseline model behaviour") {
  BaselineConfig cfg;
  cfg.n_q = 3;
  cfg.codebook = 6;
  cfg.stack = {1, 8, 2, 16};
  cfg.max_len = 40;
  std::mt19937_64 rng(5);
  const std::vector<codec::TokenGrid> batch{testing::random_grid(4, 3, 6, rng)};

  SUBCASE("param count") {
    for (auto kind : {LayoutKind::Flatten, LayoutKind::Delay}) {
      cfg.layout = kind;
      CHECK(BaselineModel::init(cfg, 1).params.count() == BaselineModel::param_count(cfg));
    }
  }
  SUBCASE("padding is not supervised") {
    cfg.layout = LayoutKind::Delay;
    const auto m = BaselineModel::init(cfg, 1);
    nn::ParamBinding bind(m.params, false);
    const auto r = baseline_forward(bind, cfg, batch);
    CHECK(r.supervised == 12);
    CHECK(r.logits.value().rows() == 6 * 3);
    cfg.layout = LayoutKind::Flatten;
    const auto mf = BaselineModel::init(cfg, 1);
    nn::ParamBinding bf(mf.params, false);
    const auto rf = baseline_forward(bf, cfg, batch);
    CHECK(rf.supervised == 12);
    CHECK(rf.logits.value().rows() == 12);
  }
  SUBCASE("causality follows the layout") {
    for (auto kind : {LayoutKind::Flatten, LayoutKind::CoarseFirst, LayoutKind::Parallel, LayoutKind::Delay}) {
      CAPTURE(layout_name(kind));
      cfg.layout = kind;
      cfg.init_std = 0.3;
      const auto m = BaselineModel::init(cfg, 2);
      const auto L = make_layout(kind, 4, 3);
      auto logits_for = [&](const codec::TokenGrid& g) {
        nn::ParamBinding bind(m.params, false);
        return baseline_forward(bind, cfg, std::span(&g, 1)).logits.value();
      };
      const auto base = logits_for(batch[0]);
      // Row scoring cell c.
      auto row_of = [&](Cell c) {
        const std::size_t s = L.step_of[L.cell_index(c)];
        return (kind == LayoutKind::Parallel || kind == LayoutKind::Delay) ? s * 3 + c.k : s;
      };
      for (std::size_t b = 0; b < 12; ++b) {
        auto g = batch[0];
        g.codes[b] = (g.codes[b] + 1) % 6;
        const auto out = logits_for(g);
        const Cell cb{b / 3, b % 3};
        for (std::size_t a = 0; a < 12; ++a) {
          const Cell ca{a / 3, a % 3};
          const auto r0 = base.row(row_of(ca)), r1 = out.row(row_of(ca));
          const bool changed = !std::equal(r0.begin(), r0.end(), r1.begin());
          const auto vis = as_set(visible_set(L, ca));
          if (changed) CHECK(vis.count(cb) == 1);
        }
      }
    }
  }
  SUBCASE("training reduces the loss") {
    cfg.layout = LayoutKind::Delay;
    auto m = BaselineModel::init(cfg, 3);
    auto opt = nn::OptimizerState::for_params(m.params, {3e-3, 5, 0.9, 0.98, 1e-9, 1.0});
    const double first = baseline_train_step(m, opt, batch);
    double last = first;
    for (int i = 0; i < 200; ++i) last = baseline_train_step(m, opt, batch);
    CHECK(last < 0.5 * first);
  }
  SUBCASE("errors") {
    const auto m = BaselineModel::init(cfg, 1);
    nn::ParamBinding bind(m.params, false);
    const std::vector<codec::TokenGrid> mixed{testing::random_grid(4, 3, 6, rng), testing::random_grid(3, 3, 6, rng)};
    CHECK_THROWS_AS(baseline_forward(bind, cfg, mixed), Error);
    const std::vector<codec::TokenGrid> levels{testing::random_grid(4, 2, 6, rng)};
    CHECK_THROWS_AS(baseline_forward(bind, cfg, levels), Error);
    const std::vector<codec::TokenGrid> longer{testing::random_grid(20, 3, 6, rng)};
    CHECK_THROWS_AS(baseline_forward(bind, cfg, longer), Error);
    auto bad = cfg;
    bad.codebook = 0;
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = cfg;
    bad.layout = LayoutKind::MultiScale;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}

TEST_CASE("parameter budget matching") {
  model::ModelConfig ms;
  ms.n_q = 3;
  ms.vocab_size = 3 * 64 + 130;
  ms.cont_dim = 8;
  ms.max_patches = 256;
  const std::size_t target = model::MultiScaleModel::param_count(ms);
  for (auto kind : {LayoutKind::Flatten, LayoutKind::CoarseFirst, LayoutKind::Parallel, LayoutKind::Delay}) {
    BaselineConfig cfg;
    cfg.layout = kind;
    cfg.max_len = 768;
    const auto matched = match_param_budget(cfg, target, 0.10);
    const double n = static_cast<double>(BaselineModel::param_count(matched));
    CHECK(std::abs(n - static_cast<double>(target)) <= 0.10 * static_cast<double>(target));
  }
  BaselineConfig cfg;
  CHECK_THROWS_AS(match_param_budget(cfg, 10, 0.10), Error);
}
