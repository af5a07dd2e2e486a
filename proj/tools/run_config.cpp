#include "run_config.hpp"

#include <functional>
#include <json.hpp>
#include <sstream>

#include "uniseq/common/binary_io.hpp"
#include "uniseq/common/error.hpp"

namespace uniseq::cli {

using nlohmann::json;

namespace {

struct Key {
  std::string section;
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const json&)> set;
  std::function<json(const RunConfig&)> get;
};

template <class T>
T as(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw FormatError("config: wrong type for '" + key + "': " + j.dump());
  }
}

std::size_t as_size(const json& j, const std::string& key) {
  if (!j.is_number_unsigned()) throw FormatError("config: '" + key + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

#define SIZE_KEY(sec, nm, field, text)                                                          \
  Key {                                                                                         \
    sec, nm, text, [](RunConfig& c, const json& j) { c.field = as_size(j, sec "." nm); },      \
        [](const RunConfig& c) { return json(c.field); }                                       \
  }
#define NUM_KEY(sec, nm, field, text)                                                           \
  Key {                                                                                         \
    sec, nm, text, [](RunConfig& c, const json& j) { c.field = as<double>(j, sec "." nm); },   \
        [](const RunConfig& c) { return json(c.field); }                                       \
  }
#define STACK_KEYS(sec, pre, field)                                                            \
  SIZE_KEY(sec, pre ".layers", field.layers, "transformer blocks"),                            \
      SIZE_KEY(sec, pre ".width", field.width, "model width"),                                 \
      SIZE_KEY(sec, pre ".heads", field.heads, "attention heads"),                             \
      SIZE_KEY(sec, pre ".ff", field.ff, "feed-forward width")

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k = {
      SIZE_KEY("codec", "hop", codec.hop, "samples per frame"),
      SIZE_KEY("codec", "latent_dim", codec.latent_dim, "latent frame dimension (<= hop)"),
      SIZE_KEY("codec", "levels", codec.levels, "RVQ levels n_q"),
      SIZE_KEY("codec", "codebook_size", codec.codebook_size, "codes per level"),
      Key{"codec", "sample_rate", "sample rate in Hz",
          [](RunConfig& c, const json& j) { c.codec.sample_rate = static_cast<std::uint32_t>(as_size(j, "codec.sample_rate")); },
          [](const RunConfig& c) { return json(c.codec.sample_rate); }},
      SIZE_KEY("codec", "transform_seed", codec.transform_seed, "seed of the framing transform"),
      SIZE_KEY("codec", "iters", codec_iters, "k-means iterations per level"),
      Key{"codec", "books", "codebook file (\"UAC1\")",
          [](RunConfig& c, const json& j) { c.books = as<std::string>(j, "codec.books"); },
          [](const RunConfig& c) { return json(c.books); }},
      SIZE_KEY("vocab", "semantic", vocab.semantic, "semantic token range size"),
      SIZE_KEY("vocab", "phoneme", vocab.phoneme, "phoneme range size"),
      SIZE_KEY("vocab", "midi", vocab.midi, "midi range size"),
      STACK_KEYS("model", "global", model.global),
      STACK_KEYS("model", "local", model.local),
      SIZE_KEY("model", "cont_dim", model.cont_dim, "continuous embedding dimension"),
      SIZE_KEY("model", "max_patches", model.max_patches, "maximum patches per sequence"),
      NUM_KEY("model", "init_std", model.init_std, "initialisation standard deviation"),
      SIZE_KEY("train", "steps", train.steps, "optimizer steps"),
      SIZE_KEY("train", "batch", train.batch, "sequences per step"),
      NUM_KEY("train", "peak_lr", train.adam.peak_lr, "peak learning rate"),
      SIZE_KEY("train", "warmup", train.adam.warmup, "warmup steps"),
      NUM_KEY("train", "beta1", train.adam.beta1, "Adam beta1"),
      NUM_KEY("train", "beta2", train.adam.beta2, "Adam beta2"),
      NUM_KEY("train", "eps", train.adam.eps, "Adam epsilon"),
      NUM_KEY("train", "clip_norm", train.adam.clip_norm, "global gradient norm clip (0 = off)"),
      Key{"train", "loss_mode", "all | target-only",
          [](RunConfig& c, const json& j) { c.train.mode = model::loss_mode_from_name(as<std::string>(j, "train.loss_mode")); },
          [](const RunConfig& c) { return json(std::string(model::loss_mode_name(c.train.mode))); }},
      SIZE_KEY("train", "patch_budget", train.patch_budget, "maximum patches per batch"),
      SIZE_KEY("train", "check_every", train.check_every, "steps between early-stop probes (0 = off)"),
      SIZE_KEY("train", "probe", train.probe, "training examples per early-stop probe"),
      NUM_KEY("train", "stop_accuracy", train.stop_accuracy, "probe accuracy that ends training"),
      NUM_KEY("train", "alpha", alpha, "task re-sampling exponent"),
      Key{"train", "task", "synthetic rule: token-tts | denoise",
          [](RunConfig& c, const json& j) { c.task.rule = bench::rule_from_name(as<std::string>(j, "train.task")); },
          [](const RunConfig& c) { return json(std::string(bench::rule_name(c.task.rule))); }},
      SIZE_KEY("train", "train_examples", task.train, "synthetic training examples"),
      SIZE_KEY("train", "eval_examples", task.eval, "synthetic held-out examples"),
      SIZE_KEY("train", "frames", task.T, "synthetic target frames"),
      SIZE_KEY("train", "symbols", task.symbols, "synthetic symbol alphabet"),
      SIZE_KEY("train", "codebook", task.codebook, "synthetic codes per level"),
      SIZE_KEY("train", "prompt_frames", task.prompt_frames, "token-TTS prompt frames"),
      NUM_KEY("train", "noise", task.noise, "denoise substitution fraction"),
      SIZE_KEY("sample", "k", sample.k, "top-k candidates"),
      NUM_KEY("sample", "temperature", sample.temperature, "sampling temperature"),
      SIZE_KEY("sample", "max_patches", sample.max_patches, "generation patch limit"),
      Key{"sample", "constrain", "mask out-of-range tokens inside the target",
          [](RunConfig& c, const json& j) { c.sample.constrain = as<bool>(j, "sample.constrain"); },
          [](const RunConfig& c) { return json(c.sample.constrain); }},
      Key{"bench", "archs", "comma-separated architectures",
          [](RunConfig& c, const json& j) { c.bench.archs = split_csv(as<std::string>(j, "bench.archs")); },
          [](const RunConfig& c) {
            std::string s;
            for (const auto& a : c.bench.archs) s += (s.empty() ? "" : ",") + a;
            return json(s);
          }},
      Key{"bench", "T", "frame counts",
          [](RunConfig& c, const json& j) { c.bench.T = as<std::vector<std::size_t>>(j, "bench.T"); },
          [](const RunConfig& c) { return json(c.bench.T); }},
      Key{"bench", "n_q", "level counts",
          [](RunConfig& c, const json& j) { c.bench.n_q = as<std::vector<std::size_t>>(j, "bench.n_q"); },
          [](const RunConfig& c) { return json(c.bench.n_q); }},
      STACK_KEYS("bench", "global", bench.scale.global),
      STACK_KEYS("bench", "local", bench.scale.local),
      SIZE_KEY("bench", "codebook", bench.scale.codebook, "codes per level"),
      SIZE_KEY("bench", "iters", bench.scale.iters, "timed iterations (median)"),
      SIZE_KEY("bench", "warmup", bench.scale.warmup, "untimed warmup iterations"),
      SIZE_KEY("bench", "batch", bench.scale.batch, "sequences per iteration"),
      NUM_KEY("bench", "param_tolerance", bench.scale.param_tolerance, "allowed parameter budget deviation"),
  };
  return k;
}

// Nested objects ("global": {"layers": 4}) and dotted keys map to the same
// entry.
void apply(RunConfig& cfg, const std::string& section, const std::string& prefix, const json& obj) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string name = prefix.empty() ? it.key() : prefix + "." + it.key();
    const Key* match = nullptr;
    bool is_prefix = false;
    for (const auto& k : keys()) {
      if (k.section != section) continue;
      if (k.name == name) match = &k;
      else if (k.name.rfind(name + ".", 0) == 0) is_prefix = true;
    }
    if (match) {
      match->set(cfg, *it);
    } else if (is_prefix && it->is_object()) {
      apply(cfg, section, name, *it);
    } else {
      throw FormatError("config: unknown key '" + section + "." + name + "'");
    }
  }
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw FormatError(source + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError(source + ": top level must be an object");
  RunConfig cfg;
  try {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string sec = it.key();
      bool known = false;
      for (const auto& k : keys()) known = known || k.section == sec;
      if (!known) throw FormatError("config: unknown section '" + sec + "'");
      if (!it->is_object()) throw FormatError("config: section '" + sec + "' must be an object");
      apply(cfg, sec, "", *it);
    }
  } catch (const FormatError& e) {
    throw FormatError(source + ": " + e.what());
  } catch (const Error& e) {
    throw FormatError(source + ": " + e.what());
  }
  cfg.task.n_q = cfg.codec.levels;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_run_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                          path.string());
}

std::string config_reference() {
  const RunConfig defaults;
  std::ostringstream out;
  out << "Config keys (JSON object per section; all optional):\n";
  std::size_t w = 0;
  for (const auto& k : keys()) w = std::max(w, k.section.size() + k.name.size() + 1);
  for (const auto& k : keys()) {
    const std::string full = k.section + "." + k.name;
    const std::string def = k.get(defaults).dump();
    out << "  " << full << std::string(w - full.size() + 2, ' ') << def << std::string(def.size() < 10 ? 10 - def.size() : 1, ' ')
        << k.help << "\n";
  }
  return out.str();
}

}  // namespace uniseq::cli
