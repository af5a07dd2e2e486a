#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "run_config.hpp"
#include "uniseq/baselines/layout.hpp"
#include "uniseq/bench/benchmark.hpp"
#include "uniseq/bench/multitask.hpp"
#include "uniseq/codec/audio.hpp"
#include "uniseq/codec/codec_io.hpp"
#include "uniseq/codec/rvq.hpp"
#include "uniseq/common/binary_io.hpp"
#include "uniseq/common/error.hpp"
#include "uniseq/inference/generate.hpp"
#include "uniseq/task/resample.hpp"

namespace uniseq::cli {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  io::write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("UNISEQ_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0') throw UsageError(std::string("UNISEQ_SEED is not an integer: ") + env);
    return v;
  }
  return 1;
}

RunConfig load_config(const std::string& path) { return path.empty() ? RunConfig{} : load_run_config(path); }

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& s, const char* flag) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(item.c_str(), &end, 10);
    if (*end != '\0' || v == 0) throw UsageError(std::string(flag) + ": not a positive integer: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

// ---- vocabulary files -------------------------------------------------------

std::string vocab_json(const task::Vocabulary& vocab) {
  json ranges = json::array();
  for (const auto& r : vocab.spec()) ranges.push_back({{"name", r.name}, {"size", r.size}, {"levels", r.levels}});
  return json{{"ranges", ranges}}.dump(2) + "\n";
}

task::Vocabulary load_vocab(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_text(path));
    std::vector<task::RangeSpec> spec;
    for (const auto& r : doc.at("ranges")) {
      spec.push_back({r.at("name").get<std::string>(), r.at("size").get<std::size_t>(),
                      r.value("levels", std::size_t{1})});
    }
    return task::Vocabulary::build(spec);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::filesystem::path vocab_path_for(const std::filesystem::path& model) { return model.string() + ".vocab.json"; }

task::Vocabulary config_vocab(const RunConfig& cfg) {
  const std::vector<task::RangeSpec> spec{{"special", task::kSpecialCount, 1},
                                          {"audio", cfg.codec.codebook_size, cfg.codec.levels},
                                          {"semantic", cfg.vocab.semantic, 1},
                                          {"phoneme", cfg.vocab.phoneme, 1},
                                          {"midi", cfg.vocab.midi, 1}};
  return task::Vocabulary::build(spec);
}

codec::CodebookSet load_books(const RunConfig& cfg, const std::string& flag) {
  const std::string path = flag.empty() ? cfg.books : flag;
  if (path.empty()) throw UsageError("no codebook file: pass --books or set codec.books");
  auto books = codec::load_codebooks(path);
  if (books.dim != cfg.codec.latent_dim) {
    throw FormatError(path + ": codebook dim " + std::to_string(books.dim) + " does not match codec.latent_dim " +
                      std::to_string(cfg.codec.latent_dim));
  }
  return books;
}

bench::SyntheticTaskSpec task_spec(const RunConfig& cfg, std::uint64_t seed) {
  auto spec = cfg.task;
  spec.n_q = cfg.codec.levels;
  spec.seed = seed;
  return spec;
}

model::ModelConfig model_config(const RunConfig& cfg, const task::Vocabulary& vocab) {
  auto m = cfg.model;
  m.n_q = vocab.audio_levels();
  m.vocab_size = vocab.size();
  return m;
}

// ---- subcommands ------------------------------------------------------------

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run config")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "seed for every random choice (falls back to UNISEQ_SEED, then 1)");
}

struct CodecTrainArgs {
  Common common;
  std::vector<std::string> inputs;
  std::string out;
  std::optional<std::size_t> iters;
};

int codec_train(const CodecTrainArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common.config);
  const std::size_t iters = a.iters.value_or(cfg.codec_iters);
  std::vector<codec::LatentFrames> corpus;
  std::size_t frames = 0;
  for (const auto& path : a.inputs) {
    corpus.push_back(codec::analyze(codec::read_wav(path), cfg.codec));
    frames += corpus.back().frames();
  }
  const auto books = codec::train_codebooks(corpus, cfg.codec, iters, resolve_seed(a.common.seed));
  codec::save_codebooks(a.out, books);
  out << "frames " << frames << "\n";
  for (std::size_t n = 1; n <= books.levels; ++n) {
    double mse = 0.0;
    const auto sub = books.truncated(n);
    for (const auto& f : corpus) mse += codec::quantization_mse(f, sub) * static_cast<double>(f.frames());
    out << "levels " << n << " mse " << std::setprecision(6) << mse / static_cast<double>(frames) << "\n";
  }
  return kExitOk;
}

struct CodecIoArgs {
  Common common;
  std::string books, in, out;
};

int codec_encode(const CodecIoArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common.config);
  const auto books = load_books(cfg, a.books);
  const auto grid = codec::rvq_encode(codec::analyze(codec::read_wav(a.in), cfg.codec), books);
  codec::save_grid(a.out, grid);
  out << "frames " << grid.frames() << " levels " << grid.levels << "\n";
  return kExitOk;
}

int codec_decode(const CodecIoArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common.config);
  const auto books = load_books(cfg, a.books);
  const auto grid = codec::load_grid(a.in);
  if (grid.levels > books.levels) {
    throw FormatError(a.in + ": grid has " + std::to_string(grid.levels) + " levels, codebooks only " +
                      std::to_string(books.levels));
  }
  const auto signal = codec::synthesize(codec::rvq_decode(grid, books.truncated(grid.levels)), cfg.codec);
  codec::write_wav(a.out, signal);
  out << "samples " << signal.samples.size() << "\n";
  return kExitOk;
}

struct TrainArgs {
  Common common;
  std::string out;
  std::optional<std::size_t> steps;
  bool quiet = false;
};

int train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = load_config(a.common.config);
  const std::uint64_t seed = resolve_seed(a.common.seed);
  if (a.steps) cfg.train.steps = *a.steps;
  cfg.train.seed = seed;
  const auto spec = task_spec(cfg, seed);
  const auto corpus = bench::gen_synthetic_task(spec);
  const auto registry = task::TemplateRegistry::defaults();
  auto model = model::MultiScaleModel::init(model_config(cfg, corpus.vocab), seed);
  out << "task " << bench::rule_name(spec.rule) << " params " << model.params.count() << "\n";

  const std::size_t every = cfg.train.check_every == 0 ? 100 : cfg.train.check_every;
  const auto report = bench::train_mixture(
      model, corpus.vocab, registry, {std::span<const task::TaskExample>(corpus.train)}, {1.0}, cfg.train,
      [&](std::size_t step, double loss) {
        if (!a.quiet && (step + 1) % every == 0) out << "step " << step + 1 << " loss " << loss << "\n";
      });
  model::save_model(a.out, model);
  write_text(vocab_path_for(a.out), vocab_json(corpus.vocab));
  const double acc = bench::exact_match_accuracy(model, corpus.vocab, registry, corpus.eval);
  out << "steps " << report.steps << " eval_exact_match " << std::fixed << std::setprecision(4) << acc << "\n";
  return kExitOk;
}

struct GenerateArgs {
  Common common;
  std::string model, prefix, out, wav, books, vocab;
  std::optional<std::size_t> k, max_patches;
  std::optional<double> temperature;
  bool unconstrained = false;
};

int generate(const GenerateArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(a.common.config);
  const auto model = model::load_model(a.model);
  const auto vocab = load_vocab(a.vocab.empty() ? vocab_path_for(a.model) : std::filesystem::path(a.vocab));
  if (vocab.size() != model.cfg.vocab_size) {
    throw FormatError(a.model + ": model vocabulary " + std::to_string(model.cfg.vocab_size) +
                      " does not match vocabulary file size " + std::to_string(vocab.size()));
  }
  task::TaskSequence prefix;
  try {
    prefix = task::load_text(vocab, read_text(a.prefix));
  } catch (const FormatError& e) {
    throw FormatError(a.prefix + ": " + e.what());
  }
  auto sc = cfg.sample;
  sc.seed = resolve_seed(a.common.seed);
  if (a.k) sc.k = *a.k;
  if (a.temperature) sc.temperature = *a.temperature;
  if (a.max_patches) sc.max_patches = *a.max_patches;
  if (a.unconstrained) sc.constrain = false;
  const auto result = inference::generate(model, vocab, prefix, sc);
  codec::save_grid(a.out, result.grid);
  out << "status " << inference::status_name(result.status) << " frames " << result.grid.frames() << " patches "
      << result.patches << "\n";
  if (!a.wav.empty()) {
    const auto books = load_books(cfg, a.books);
    if (result.grid.levels > books.levels) throw FormatError("codebooks have fewer levels than the model");
    codec::write_wav(a.wav, codec::synthesize(codec::rvq_decode(result.grid, books.truncated(result.grid.levels)),
                                              cfg.codec));
  }
  return kExitOk;
}

struct BenchArgs {
  Common common;
  std::string archs, T, nq, out;
  std::optional<std::size_t> iters;
};

int bench_cmd(const BenchArgs& a, std::ostream& out) {
  RunConfig cfg = load_config(a.common.config);
  if (!a.archs.empty()) cfg.bench.archs = split_list(a.archs);
  if (!a.T.empty()) cfg.bench.T = parse_sizes(a.T, "--T");
  if (!a.nq.empty()) cfg.bench.n_q = parse_sizes(a.nq, "--nq");
  if (a.iters) cfg.bench.scale.iters = *a.iters;
  std::vector<baselines::LayoutKind> kinds;
  for (const auto& name : cfg.bench.archs) {
    try {
      kinds.push_back(baselines::layout_from_name(name));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  const auto records = bench::run_benchmark(kinds, cfg.bench.T, cfg.bench.n_q, cfg.bench.scale,
                                            resolve_seed(a.common.seed));
  const std::string csv = bench::bench_csv(records);
  if (a.out.empty()) {
    out << csv;
  } else {
    write_text(a.out, csv);
    out << "records " << records.size() << "\n";
  }
  return kExitOk;
}

struct MultitaskArgs {
  Common common;
  std::string out;
  std::optional<std::size_t> steps;
};

int multitask(const MultitaskArgs& a, std::ostream& out) {
  RunConfig cfg = load_config(a.common.config);
  const std::uint64_t seed = resolve_seed(a.common.seed);
  if (a.steps) cfg.train.steps = *a.steps;
  bench::StudyConfig sc;
  auto tts = task_spec(cfg, seed);
  tts.rule = bench::SyntheticRule::TokenTts;
  auto se = tts;
  se.rule = bench::SyntheticRule::Denoise;
  sc.tasks = {tts, se};
  sc.model = cfg.model;
  sc.loop = cfg.train;
  sc.loop.seed = seed;
  sc.alpha = cfg.alpha;
  sc.seed = seed;
  const auto result = bench::run_multitask_study(sc, [&](const std::string& line) { out << line << "\n"; });
  json doc{{"alpha", cfg.alpha}, {"joint_steps", result.joint_steps}, {"weights", result.weights}};
  for (const auto& t : result.tasks) {
    out << "task " << t.task << " single " << std::fixed << std::setprecision(4) << t.single_accuracy << " joint "
        << t.joint_accuracy << "\n";
    doc["tasks"].push_back({{"task", t.task},
                            {"single_accuracy", t.single_accuracy},
                            {"joint_accuracy", t.joint_accuracy},
                            {"single_steps", t.single_steps}});
  }
  if (!a.out.empty()) write_text(a.out, doc.dump(2) + "\n");
  return kExitOk;
}

struct InspectArgs {
  Common common;
  std::string layout, seq, grid, synthetic, vocab, split = "train";
  std::size_t T = 4, nq = 3, index = 0;
  bool templates = false, prefix = false;
};

int inspect(const InspectArgs& a, std::ostream& out) {
  const int modes = !a.layout.empty() + !a.seq.empty() + !a.grid.empty() + !a.synthetic.empty() + a.templates;
  if (modes != 1) throw UsageError("inspect needs exactly one of --layout, --seq, --grid, --synthetic, --templates");
  const RunConfig cfg = load_config(a.common.config);
  if (!a.layout.empty()) {
    baselines::LayoutKind kind;
    try {
      kind = baselines::layout_from_name(a.layout);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    out << baselines::render_layout(baselines::make_layout(kind, a.T, a.nq));
    return kExitOk;
  }
  if (a.templates) {
    out << task::TemplateRegistry::defaults().to_json();
    return kExitOk;
  }
  if (!a.grid.empty()) {
    const auto grid = codec::load_grid(a.grid);
    out << "frames " << grid.frames() << " levels " << grid.levels << "\n";
    for (std::size_t t = 0; t < grid.frames(); ++t) {
      for (std::size_t k = 0; k < grid.levels; ++k) out << (k ? " " : "") << grid.at(t, k);
      out << "\n";
    }
    return kExitOk;
  }
  if (!a.synthetic.empty()) {
    auto spec = task_spec(cfg, resolve_seed(a.common.seed));
    try {
      spec.rule = bench::rule_from_name(a.synthetic);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (a.split != "train" && a.split != "eval") throw UsageError("--split must be train or eval");
    const auto corpus = bench::gen_synthetic_task(spec);
    const auto& set = a.split == "train" ? corpus.train : corpus.eval;
    if (a.index >= set.size()) throw UsageError("--index out of range (" + std::to_string(set.size()) + " examples)");
    const auto& ex = set[a.index];
    const auto registry = task::TemplateRegistry::defaults();
    const auto& tmpl = registry.get(ex.task);
    const auto seq = a.prefix ? task::serialize_prefix(corpus.vocab, tmpl, ex.conditions)
                              : task::serialize_task(corpus.vocab, tmpl, ex.conditions, ex.target);
    out << task::dump_text(corpus.vocab, seq);
    return kExitOk;
  }
  const auto vocab = a.vocab.empty() ? config_vocab(cfg) : load_vocab(a.vocab);
  task::TaskSequence seq;
  try {
    seq = task::load_text(vocab, read_text(a.seq));
  } catch (const FormatError& e) {
    throw FormatError(a.seq + ": " + e.what());
  }
  const auto task = vocab.task_of(seq.tokens.at(1));
  out << "task " << (task ? std::string(*task) : "?") << " tokens " << seq.tokens.size() << " continuous "
      << seq.continuous.size() << (seq.complete() ? "" : " (prompt)") << "\n";
  for (const auto& s : seq.spans) {
    out << task::span_kind_name(s.kind) << " [" << s.begin << ", " << s.end << ") " << s.end - s.begin
        << (s.target ? " target" : "") << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"uniseq: multi-scale audio token pipeline"};
  app.name("uniseq");
  app.require_subcommand(1);
  app.footer(config_reference() + "\nExit codes: 0 success, 1 usage error, 2 data or format error.");

  CodecTrainArgs ct;
  auto* s_ct = app.add_subcommand("codec-train", "fit RVQ codebooks on WAV files");
  add_common(s_ct, ct.common);
  s_ct->add_option("--in", ct.inputs, "input WAV (repeatable)")->required()->check(CLI::ExistingFile);
  s_ct->add_option("--out", ct.out, "output codebooks (UAC1)")->required();
  s_ct->add_option("--iters", ct.iters, "k-means iterations (overrides codec.iters)");

  CodecIoArgs ce;
  auto* s_ce = app.add_subcommand("codec-encode", "WAV to token grid");
  add_common(s_ce, ce.common);
  s_ce->add_option("--books", ce.books, "codebooks (overrides codec.books)");
  s_ce->add_option("--in", ce.in, "input WAV")->required()->check(CLI::ExistingFile);
  s_ce->add_option("--out", ce.out, "output grid (UAG1)")->required();

  CodecIoArgs cd;
  auto* s_cd = app.add_subcommand("codec-decode", "token grid to WAV");
  add_common(s_cd, cd.common);
  s_cd->add_option("--books", cd.books, "codebooks (overrides codec.books)");
  s_cd->add_option("--in", cd.in, "input grid (UAG1)")->required()->check(CLI::ExistingFile);
  s_cd->add_option("--out", cd.out, "output WAV")->required();

  TrainArgs tr;
  auto* s_tr = app.add_subcommand("train", "train a multi-scale model on the synthetic task of train.task");
  add_common(s_tr, tr.common);
  s_tr->add_option("--out", tr.out, "output weights; <out>.json and <out>.vocab.json are written beside it")
      ->required();
  s_tr->add_option("--steps", tr.steps, "optimizer steps (overrides train.steps)");
  s_tr->add_flag("--quiet", tr.quiet, "no per-step loss lines");

  GenerateArgs ge;
  auto* s_ge = app.add_subcommand("generate", "sample a target grid after a prompt");
  add_common(s_ge, ge.common);
  s_ge->add_option("--model", ge.model, "trained weights")->required()->check(CLI::ExistingFile);
  s_ge->add_option("--vocab", ge.vocab, "vocabulary file (default <model>.vocab.json)");
  s_ge->add_option("--prefix", ge.prefix, "prompt as a token-name text dump")->required()->check(CLI::ExistingFile);
  s_ge->add_option("--out", ge.out, "output grid (UAG1)")->required();
  s_ge->add_option("--wav", ge.wav, "also synthesize a WAV");
  s_ge->add_option("--books", ge.books, "codebooks for --wav (overrides codec.books)");
  s_ge->add_option("--k", ge.k, "top-k (overrides sample.k)");
  s_ge->add_option("--temperature", ge.temperature, "temperature (overrides sample.temperature)");
  s_ge->add_option("--max-patches", ge.max_patches, "patch limit (overrides sample.max_patches)");
  s_ge->add_flag("--unconstrained", ge.unconstrained, "disable range-constrained decoding");

  BenchArgs be;
  auto* s_be = app.add_subcommand("bench", "time training steps of every layout and write CSV");
  add_common(s_be, be.common);
  s_be->add_option("--archs", be.archs, "comma-separated: flatten,coarse,parallel,delay,multiscale");
  s_be->add_option("--T", be.T, "comma-separated frame counts");
  s_be->add_option("--nq", be.nq, "comma-separated level counts");
  s_be->add_option("--iters", be.iters, "timed iterations (overrides bench.iters)");
  s_be->add_option("--out", be.out, "CSV path (default: stdout)");

  MultitaskArgs mt;
  auto* s_mt = app.add_subcommand("multitask", "joint token-TTS + denoise training against single-task models");
  add_common(s_mt, mt.common);
  s_mt->add_option("--steps", mt.steps, "step budget per model (overrides train.steps)");
  s_mt->add_option("--out", mt.out, "JSON summary path");

  InspectArgs in;
  auto* s_in = app.add_subcommand("inspect", "print layouts, sequences, grids, templates or synthetic examples");
  add_common(s_in, in.common);
  s_in->add_option("--layout", in.layout, "render a layout: flatten, coarse, parallel, delay, multiscale");
  s_in->add_option("--T", in.T, "frames for --layout")->check(CLI::PositiveNumber);
  s_in->add_option("--nq", in.nq, "levels for --layout")->check(CLI::PositiveNumber);
  s_in->add_option("--seq", in.seq, "summarize a token-name text dump")->check(CLI::ExistingFile);
  s_in->add_option("--vocab", in.vocab, "vocabulary file for --seq (default: from config)");
  s_in->add_option("--grid", in.grid, "print a UAG1 grid")->check(CLI::ExistingFile);
  s_in->add_flag("--templates", in.templates, "print the task templates as JSON");
  s_in->add_option("--synthetic", in.synthetic, "dump a synthetic example: token-tts or denoise");
  s_in->add_option("--split", in.split, "train or eval");
  s_in->add_option("--index", in.index, "example index");
  s_in->add_flag("--prefix", in.prefix, "dump the generation prompt only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (s_ct->parsed()) return codec_train(ct, out);
    if (s_ce->parsed()) return codec_encode(ce, out);
    if (s_cd->parsed()) return codec_decode(cd, out);
    if (s_tr->parsed()) return train(tr, out);
    if (s_ge->parsed()) return generate(ge, out);
    if (s_be->parsed()) return bench_cmd(be, out);
    if (s_mt->parsed()) return multitask(mt, out);
    if (s_in->parsed()) return inspect(in, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace uniseq::cli
