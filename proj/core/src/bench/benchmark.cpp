#include "uniseq/bench/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "uniseq/baselines/cost.hpp"
#include "uniseq/baselines/models.hpp"
#include "uniseq/common/error.hpp"
#include "uniseq/model/trainer.hpp"
#include "uniseq/task/vocab.hpp"

namespace uniseq::bench {

using baselines::LayoutKind;

model::ModelConfig bench_model_config(const BenchScale& scale, std::size_t T, std::size_t n_q) {
  model::ModelConfig c;
  c.n_q = n_q;
  c.global = scale.global;
  c.local = scale.local;
  c.vocab_size = task::kSpecialCount + n_q * scale.codebook;
  c.max_patches = T;
  c.validate();
  return c;
}

namespace {

template <class F>
double median_ms(std::size_t warmup, std::size_t iters, F&& step) {
  for (std::size_t i = 0; i < warmup; ++i) step();
  std::vector<double> ms;
  for (std::size_t i = 0; i < iters; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    step();
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  const std::size_t n = ms.size();
  return n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
}

std::vector<codec::TokenGrid> random_grids(std::size_t count, std::size_t T, std::size_t n_q, std::size_t V,
                                           std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> code(0, static_cast<std::uint32_t>(V - 1));
  std::vector<codec::TokenGrid> out;
  for (std::size_t i = 0; i < count; ++i) {
    codec::TokenGrid g(T, n_q);
    for (auto& c : g.codes) c = code(rng);
    out.push_back(std::move(g));
  }
  return out;
}

nn::AdamConfig bench_adam() {
  nn::AdamConfig a;
  a.peak_lr = 1e-4;
  a.warmup = 100;
  return a;
}

}  // namespace

std::vector<BenchRecord> run_benchmark(const std::vector<LayoutKind>& archs, const std::vector<std::size_t>& Ts,
                                       const std::vector<std::size_t>& nqs, const BenchScale& scale,
                                       std::uint64_t seed) {
  require(!archs.empty() && !Ts.empty() && !nqs.empty(), "bench: archs, T and n_q lists must be non-empty");
  require(scale.iters >= 1, "bench: iters must be >= 1");
  std::vector<BenchRecord> out;
  for (std::size_t T : Ts) {
    for (std::size_t nq : nqs) {
      require(T >= 1 && nq >= 1, "bench: T and n_q must be >= 1");
      const auto mcfg = bench_model_config(scale, T, nq);
      const std::size_t budget = model::MultiScaleModel::param_count(mcfg);
      std::mt19937_64 rng(seed ^ (T * 1000003ULL + nq));
      const auto grids = random_grids(scale.batch, T, nq, scale.codebook, rng);
      for (auto arch : archs) {
        BenchRecord rec;
        rec.arch = std::string(baselines::layout_name(arch));
        rec.T = T;
        rec.n_q = nq;
        if (arch == LayoutKind::MultiScale) {
          const task::RangeSpec rs[] = {{"special", task::kSpecialCount, 1}, {"audio", scale.codebook, nq}};
          const auto vocab = task::Vocabulary::build(rs);
          std::vector<task::PatchSequence> batch;
          for (const auto& g : grids) batch.push_back(task::patches_from_grid(vocab, g, T));
          auto m = model::MultiScaleModel::init(mcfg, seed);
          auto opt = nn::OptimizerState::for_params(m.params, bench_adam());
          nn::AttentionCounter counter;
          {
            nn::ParamBinding bind(m.params, false);
            model::forward_loss(bind, mcfg, batch, model::LossMode::All, &counter);
          }
          const auto cost = baselines::attention_cost(arch, T, nq, mcfg.global.layers, mcfg.local.layers);
          require(counter.score_entries == cost.entries * scale.batch,
                  "bench: multiscale attention counter disagrees with closed form");
          rec.attn_pairs = cost.entries;
          rec.param_count = m.params.count();
          rec.ms_per_iter = median_ms(scale.warmup, scale.iters, [&] {
            model::train_step(m, opt, batch, model::LossMode::All, std::numeric_limits<std::size_t>::max());
          });
        } else {
          baselines::BaselineConfig bc;
          bc.layout = arch;
          bc.n_q = nq;
          bc.codebook = scale.codebook;
          bc.stack = scale.global;
          bc.stack.layers = scale.global.layers + scale.local.layers;
          bc.max_len = baselines::make_layout(arch, T, nq).sequence_length();
          bc = baselines::match_param_budget(bc, budget, scale.param_tolerance);
          auto m = baselines::BaselineModel::init(bc, seed);
          auto opt = nn::OptimizerState::for_params(m.params, bench_adam());
          nn::AttentionCounter counter;
          {
            nn::ParamBinding bind(m.params, false);
            baselines::baseline_forward(bind, bc, grids, &counter);
          }
          const auto cost = baselines::attention_cost(arch, T, nq, bc.stack.layers);
          require(counter.score_entries == cost.entries * scale.batch,
                  "bench: " + rec.arch + " attention counter disagrees with closed form");
          rec.attn_pairs = cost.entries;
          rec.param_count = m.params.count();
          rec.ms_per_iter = median_ms(scale.warmup, scale.iters, [&] { baselines::baseline_train_step(m, opt, grids); });
        }
        const double dev = std::abs(static_cast<double>(rec.param_count) - static_cast<double>(budget)) /
                           static_cast<double>(budget);
        require(dev <= scale.param_tolerance, "bench: " + rec.arch + " parameter count outside budget tolerance");
        out.push_back(rec);
      }
    }
  }
  return out;
}

std::string bench_csv(const std::vector<BenchRecord>& records) {
  std::string s = "arch,T,n_q,ms_per_iter,attn_pairs,param_count\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.4f,%llu,%zu\n", r.arch.c_str(), r.T, r.n_q, r.ms_per_iter,
                  static_cast<unsigned long long>(r.attn_pairs), r.param_count);
    s += buf;
  }
  return s;
}

}  // namespace uniseq::bench
