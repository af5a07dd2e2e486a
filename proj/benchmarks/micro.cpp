#include <benchmark/benchmark.h>

#include <random>

#include "uniseq/bench/synthetic.hpp"
#include "uniseq/codec/rvq.hpp"
#include "uniseq/inference/sampling.hpp"
#include "uniseq/model/trainer.hpp"
#include "uniseq/nn/autograd.hpp"
#include "uniseq/nn/ops.hpp"

using namespace uniseq;

namespace {

nn::Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = d(rng);
  return nn::Tensor({rows, cols}, std::move(v));
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const auto a = nn::Var::constant(random_tensor(n, n, rng));
  const auto b = nn::Var::constant(random_tensor(n, n, rng));
  for (auto _ : state) benchmark::DoNotOptimize(nn::matmul(a, b).value().values().data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

// One long causal segment vs. many short ones of the same total length.
void BM_SegmentAttention(benchmark::State& state) {
  const std::size_t n = 768;
  const auto seg = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const auto q = nn::Var::leaf(random_tensor(n, 64, rng));
  const auto k = nn::Var::leaf(random_tensor(n, 64, rng));
  const auto v = nn::Var::leaf(random_tensor(n, 64, rng));
  const std::vector<std::size_t> segments(n / seg, seg);
  for (auto _ : state) {
    const auto out = nn::segment_causal_attention(q, k, v, 4, segments, nullptr);
    nn::backward(nn::cross_entropy(out, std::vector<std::size_t>(n, 0), std::vector<bool>(n, true)));
  }
  state.counters["pairs"] = static_cast<double>(n / seg * seg * seg);
}
BENCHMARK(BM_SegmentAttention)->Arg(768)->Arg(96)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_RvqEncode(benchmark::State& state) {
  codec::CodecConfig cfg;
  cfg.latent_dim = 16;
  cfg.levels = static_cast<std::size_t>(state.range(0));
  cfg.codebook_size = 256;
  const auto frames = bench::gaussian_mixture_frames(1024, 16, 8, 3);
  const std::vector<codec::LatentFrames> corpus{frames};
  const auto books = codec::train_codebooks(corpus, cfg, 5, 4);
  for (auto _ : state) benchmark::DoNotOptimize(codec::rvq_encode(frames, books).codes.data());
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_RvqEncode)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TopKSample(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  std::vector<double> logits(static_cast<std::size_t>(state.range(0)));
  for (auto& x : logits) x = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(inference::top_k_sample(logits, 30, 0.8, rng));
}
BENCHMARK(BM_TopKSample)->Arg(1024)->Arg(4212);

void BM_TrainStep(benchmark::State& state) {
  bench::SyntheticTaskSpec spec;
  spec.train = 8;
  spec.eval = 1;
  spec.n_q = static_cast<std::size_t>(state.range(0));
  const auto corpus = bench::gen_synthetic_task(spec);
  const auto reg = task::TemplateRegistry::defaults();
  std::vector<task::PatchSequence> batch;
  for (const auto& ex : corpus.train)
    batch.push_back(task::to_patches(corpus.vocab, task::serialize_task(corpus.vocab, reg.get(ex.task),
                                                                        ex.conditions, ex.target)));
  model::ModelConfig c;
  c.n_q = spec.n_q;
  c.global = {2, 64, 4, 256};
  c.local = {1, 32, 4, 128};
  c.vocab_size = corpus.vocab.size();
  c.cont_dim = 8;
  c.max_patches = 256;
  auto m = model::MultiScaleModel::init(c, 7);
  auto opt = nn::OptimizerState::for_params(m.params, {1e-3, 10, 0.9, 0.98, 1e-9, 1.0});
  for (auto _ : state) benchmark::DoNotOptimize(model::train_step(m, opt, batch, model::LossMode::All, 4096).loss);
}
BENCHMARK(BM_TrainStep)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
