#include "uniseq/model/config.hpp"

#include <json.hpp>

#include "uniseq/common/error.hpp"

namespace uniseq::model {

using nlohmann::json;

void ModelConfig::validate() const {
  require(n_q >= 1, "model: n_q must be >= 1");
  global.validate("global");
  local.validate("local");
  require(vocab_size >= 1, "model: vocab_size must be >= 1");
  require(cont_dim >= 1, "model: cont_dim must be >= 1");
  require(max_patches >= 1, "model: max_patches must be >= 1");
  require(init_std > 0, "model: init_std must be > 0");
}

namespace {

json stack_json(const nn::StackConfig& s) {
  return {{"layers", s.layers}, {"width", s.width}, {"heads", s.heads}, {"ff", s.ff}};
}

nn::StackConfig stack_from(const json& j, const std::string& what) {
  if (!j.is_object()) throw FormatError("model config: '" + what + "' must be an object");
  nn::StackConfig s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (!it->is_number_unsigned()) throw FormatError("model config: " + what + "." + k + " must be a non-negative integer");
    const auto v = it->get<std::size_t>();
    if (k == "layers") s.layers = v;
    else if (k == "width") s.width = v;
    else if (k == "heads") s.heads = v;
    else if (k == "ff") s.ff = v;
    else throw FormatError("model config: unknown key " + what + "." + k);
  }
  return s;
}

}  // namespace

std::string ModelConfig::to_json() const {
  json j{{"n_q", n_q},           {"global", stack_json(global)}, {"local", stack_json(local)},
         {"vocab_size", vocab_size}, {"cont_dim", cont_dim},         {"max_patches", max_patches},
         {"init_std", init_std}};
  return j.dump(2) + "\n";
}

ModelConfig ModelConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("model config: expected an object");
  ModelConfig c;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto& k = it.key();
      if (k == "n_q") c.n_q = it->get<std::size_t>();
      else if (k == "global") c.global = stack_from(*it, k);
      else if (k == "local") c.local = stack_from(*it, k);
      else if (k == "vocab_size") c.vocab_size = it->get<std::size_t>();
      else if (k == "cont_dim") c.cont_dim = it->get<std::size_t>();
      else if (k == "max_patches") c.max_patches = it->get<std::size_t>();
      else if (k == "init_std") c.init_std = it->get<double>();
      else throw FormatError("model config: unknown key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string_view loss_mode_name(LossMode m) { return m == LossMode::All ? "all" : "target-only"; }

LossMode loss_mode_from_name(std::string_view name) {
  if (name == "all") return LossMode::All;
  if (name == "target-only") return LossMode::TargetOnly;
  fail("unknown loss mode '" + std::string(name) + "' (expected all or target-only)");
}

}  // namespace uniseq::model
