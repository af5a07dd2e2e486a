#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "support.hpp"
#include "uniseq/baselines/cost.hpp"
#include "uniseq/bench/benchmark.hpp"
#include "uniseq/bench/multitask.hpp"
#include "uniseq/bench/scaling.hpp"
#include "uniseq/bench/synthetic.hpp"
#include "uniseq/common/error.hpp"
#include "uniseq/task/resample.hpp"

using namespace uniseq;
using namespace uniseq::bench;
using baselines::LayoutKind;

namespace {

SyntheticTaskSpec small_spec(SyntheticRule rule) {
  SyntheticTaskSpec s;
  s.rule = rule;
  s.train = 300;
  s.eval = 50;
  s.T = 6;
  s.codebook = 16;
  s.symbols = 8;
  return s;
}

}  // namespace

TEST_CASE("synthetic corpora") {
  for (auto rule : {SyntheticRule::TokenTts, SyntheticRule::Denoise}) {
    CAPTURE(rule_name(rule));
    const auto spec = small_spec(rule);
    const auto a = gen_synthetic_task(spec), b = gen_synthetic_task(spec);
    CHECK(a.train == b.train);
    CHECK(a.eval == b.eval);
    CHECK(a.train.size() == 300);
    CHECK(a.eval.size() == 50);
    CHECK(a.vocab.size() == 128 + 3 * 16 + 8);
    // Overlap by full comparison, independent of the hash used to enforce it.
    std::size_t overlap = 0;
    for (const auto& e : a.eval)
      for (const auto& t : a.train) overlap += e == t;
    CHECK(overlap == 0);
    auto other = spec;
    other.seed = 2;
    CHECK_FALSE(gen_synthetic_task(other).train == a.train);
    const auto reg = task::TemplateRegistry::defaults();
    for (const auto& ex : a.train) {
      CHECK(ex.task == spec.task());
      CHECK(task::parse_task(a.vocab, reg, task::serialize_task(a.vocab, reg.get(ex.task), ex.conditions, ex.target)) ==
            ex);
    }
  }
  CHECK(rule_from_name(rule_name(SyntheticRule::Denoise)) == SyntheticRule::Denoise);
  CHECK_THROWS_AS(rule_from_name("copy"), Error);
}

TEST_CASE("token-TTS rule is a per-level bijection") {
  const auto spec = small_spec(SyntheticRule::TokenTts);
  const auto c = gen_synthetic_task(spec);
  const SymbolCodeTable table(spec.symbols, spec.n_q, spec.codebook, spec.seed);
  for (std::size_t k = 0; k < spec.n_q; ++k) {
    std::set<std::uint32_t> codes;
    for (std::size_t s = 0; s < spec.symbols; ++s) codes.insert(table.code(s, k));
    CHECK(codes.size() == spec.symbols);
    for (std::uint32_t code = 0; code < spec.codebook; ++code) CHECK(table.in_image(code, k) == (codes.count(code) == 1));
  }
  for (const auto& ex : c.train) {
    const auto& sym = std::get<task::DiscretePayload>(ex.conditions[0]).tokens;
    REQUIRE(sym.size() == spec.T);
    CHECK(std::get<codec::TokenGrid>(ex.conditions[1]).frames() == spec.prompt_frames);
    for (std::size_t t = 0; t < spec.T; ++t)
      for (std::size_t k = 0; k < spec.n_q; ++k) CHECK(ex.target.at(t, k) == table.code(sym[t], k));
  }
}

TEST_CASE("denoise corruption") {
  const auto spec = small_spec(SyntheticRule::Denoise);
  const auto c = gen_synthetic_task(spec);
  const SymbolCodeTable table(spec.symbols, spec.n_q, spec.codebook, spec.seed);
  const auto expect = static_cast<std::size_t>(std::llround(spec.noise * spec.T * spec.n_q));
  for (const auto& ex : c.train) {
    const auto& noisy = std::get<codec::TokenGrid>(ex.conditions[0]);
    std::size_t changed = 0;
    for (std::size_t t = 0; t < spec.T; ++t) {
      std::size_t per_frame = 0;
      for (std::size_t k = 0; k < spec.n_q; ++k) {
        CHECK(table.in_image(ex.target.at(t, k), k));
        if (noisy.at(t, k) != ex.target.at(t, k)) {
          CHECK_FALSE(table.in_image(noisy.at(t, k), k));
          ++per_frame;
        }
      }
      CHECK(per_frame < spec.n_q);
      changed += per_frame;
    }
    CHECK(changed == expect);
  }
}

TEST_CASE("synthetic spec errors") {
  auto s = small_spec(SyntheticRule::TokenTts);
  s.symbols = 17;
  CHECK_THROWS_AS(gen_synthetic_task(s), Error);
  s = small_spec(SyntheticRule::Denoise);
  s.symbols = 16;
  CHECK_THROWS_AS(gen_synthetic_task(s), Error);
  s = small_spec(SyntheticRule::TokenTts);
  s.T = 1;
  s.symbols = 2;
  s.prompt_frames = 0;
  s.train = 10;
  CHECK_THROWS_AS(gen_synthetic_task(s), Error);  // only two distinct examples exist
}

TEST_CASE("gaussian mixture frames") {
  const auto a = gaussian_mixture_frames(100, 4, 3, 9), b = gaussian_mixture_frames(100, 4, 3, 9);
  CHECK(a.frames() == 100);
  CHECK(a.dim == 4);
  CHECK(a.data == b.data);
  CHECK_FALSE(gaussian_mixture_frames(100, 4, 3, 10).data == a.data);
}

TEST_CASE("scaling exponent") {
  const std::vector<double> x{64, 128, 256, 512};
  std::vector<double> y;
  for (double v : x) y.push_back(3.5 * v * v);
  CHECK(std::abs(fit_scaling_exponent(x, y) - 2.0) < 1e-9);
  std::vector<double> flat;
  for (std::size_t T : {64, 128, 256})
    flat.push_back(static_cast<double>(baselines::attention_cost(LayoutKind::Flatten, T, 3, 4).entries));
  const std::vector<double> Ts{64, 128, 256};
  CHECK(std::abs(fit_scaling_exponent(Ts, flat) - 2.0) < 0.01);
  // Global term against n_q at fixed T.
  const std::vector<double> nqs{2, 3, 8};
  std::vector<double> global;
  for (double nq : nqs) {
    const auto full = baselines::attention_cost(LayoutKind::MultiScale, 256, static_cast<std::size_t>(nq), 4, 2);
    const auto local = baselines::attention_cost(LayoutKind::MultiScale, 256, static_cast<std::size_t>(nq), 4, 0);
    CHECK(full.entries - local.entries == 256 * static_cast<std::uint64_t>(nq * nq) * 2);
    global.push_back(static_cast<double>(local.entries));
  }
  CHECK(fit_scaling_exponent(nqs, global) == 0.0);

  const std::vector<double> two{1, 2, 2};
  CHECK_THROWS_AS(fit_scaling_exponent(two, two), Error);
  const std::vector<double> neg{1, 2, -3};
  CHECK_THROWS_AS(fit_scaling_exponent(x, neg), Error);
}

TEST_CASE("benchmark records") {
  BenchScale scale;
  scale.global = {2, 16, 2, 32};
  scale.local = {1, 8, 2, 16};
  scale.codebook = 8;
  scale.iters = 2;
  scale.warmup = 1;
  const std::vector<LayoutKind> archs{LayoutKind::Flatten, LayoutKind::CoarseFirst, LayoutKind::Parallel,
                                      LayoutKind::Delay, LayoutKind::MultiScale};
  const auto recs = run_benchmark(archs, {4, 8}, {2, 3}, scale, 1);
  REQUIRE(recs.size() == 5 * 2 * 2);
  const auto again = run_benchmark(archs, {4, 8}, {2, 3}, scale, 1);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    CAPTURE(r.arch);
    CHECK(r.ms_per_iter > 0);
    CHECK(again[i].attn_pairs == r.attn_pairs);
    CHECK(again[i].param_count == r.param_count);
    const auto kind = baselines::layout_from_name(r.arch);
    const std::size_t layers = scale.global.layers + (kind == LayoutKind::MultiScale ? 0 : scale.local.layers);
    CHECK(r.attn_pairs ==
          scale.batch * baselines::attention_cost(kind, r.T, r.n_q, layers, scale.local.layers).entries);
  }
  // Parameter budgets within tolerance of the multiscale model per cell.
  for (const auto& r : recs) {
    const auto ms = std::find_if(recs.begin(), recs.end(), [&](const BenchRecord& m) {
      return m.arch == "multiscale" && m.T == r.T && m.n_q == r.n_q;
    });
    REQUIRE(ms != recs.end());
    CHECK(std::abs(static_cast<double>(r.param_count) - static_cast<double>(ms->param_count)) <=
          0.10 * static_cast<double>(ms->param_count));
  }
  const auto csv = bench_csv(recs);
  CHECK(csv.rfind("arch,T,n_q,ms_per_iter,attn_pairs,param_count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 21);
  CHECK_THROWS_AS(run_benchmark(archs, {}, {3}, scale, 1), Error);
}

TEST_CASE("task resampling at alpha 0 is uniform") {
  task::ResamplingConfig cfg{{2000, 50}, 0.0};
  const auto w = task::resample_weights(cfg);
  std::mt19937_64 rng(3);
  std::vector<std::size_t> counts(2, 0);
  for (int i = 0; i < 10000; ++i) ++counts[task::sample_task(w, rng)];
  const std::vector<double> uniform{0.5, 0.5};
  CHECK(testing::chi_square_p(counts, uniform) > 0.01);
}

TEST_CASE("multitask study plumbing") {
  StudyConfig cfg;
  auto a = small_spec(SyntheticRule::TokenTts);
  auto b = small_spec(SyntheticRule::Denoise);
  a.train = b.train = 40;
  a.eval = b.eval = 8;
  cfg.tasks = {a, b};
  cfg.model.global = {1, 16, 2, 32};
  cfg.model.local = {1, 16, 2, 32};
  cfg.model.cont_dim = 4;
  cfg.model.max_patches = 64;
  cfg.loop.steps = 6;
  cfg.loop.batch = 4;
  cfg.loop.check_every = 0;
  std::vector<std::string> lines;
  const auto r = run_multitask_study(cfg, [&](const std::string& s) { lines.push_back(s); });
  REQUIRE(r.tasks.size() == 2);
  CHECK(r.tasks[0].task == "tts");
  CHECK(r.tasks[1].task == "se");
  CHECK(r.joint_steps == 6);
  CHECK(r.weights == task::resample_weights({{40, 40}, 0.05}));
  for (const auto& t : r.tasks) {
    CHECK(t.single_steps == 6);
    CHECK(t.single_accuracy >= 0.0);
    CHECK(t.single_accuracy <= 1.0);
    CHECK(t.joint_accuracy >= 0.0);
    CHECK(t.joint_accuracy <= 1.0);
  }
  CHECK_FALSE(lines.empty());

  auto mismatch = cfg;
  mismatch.tasks[1].codebook = 32;
  CHECK_THROWS_AS(run_multitask_study(mismatch), Error);
  auto one = cfg;
  one.tasks.pop_back();
  CHECK_THROWS_AS(run_multitask_study(one), Error);
}

TEST_CASE("accuracy measures") {
  const auto spec = small_spec(SyntheticRule::TokenTts);
  const auto c = gen_synthetic_task(spec);
  const auto reg = task::TemplateRegistry::defaults();
  model::ModelConfig mc;
  mc.n_q = 3;
  mc.global = {1, 16, 2, 32};
  mc.local = {1, 16, 2, 32};
  mc.vocab_size = c.vocab.size();
  mc.cont_dim = 4;
  mc.max_patches = 64;
  auto m = model::MultiScaleModel::init(mc, 4);
  const std::span<const task::TaskExample> few(c.eval.data(), 4);
  const double before = exact_match_accuracy(m, c.vocab, reg, few);
  CHECK(before >= 0.0);
  CHECK(before < 0.5);
  std::vector<task::PatchSequence> ps;
  for (const auto& ex : few)
    ps.push_back(task::to_patches(c.vocab, task::serialize_task(c.vocab, reg.get(ex.task), ex.conditions, ex.target)));
  const double tf = teacher_forced_accuracy(m, ps);
  CHECK(tf >= 0.0);
  CHECK(tf < 0.5);
  CHECK_THROWS_AS(exact_match_accuracy(m, c.vocab, reg, std::span<const task::TaskExample>()), Error);
}
