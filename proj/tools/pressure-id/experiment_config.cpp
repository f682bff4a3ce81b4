#include "experiment_config.hpp"

#include <charconv>
#include <cstdlib>
#include <set>

#include "json.hpp"
#include "pressure_id/errors.hpp"
#include "pressure_id/evaluation.hpp"
#include "pressure_id/synthetic.hpp"

namespace pressure_id::cli {
namespace {

using Json = nlohmann::ordered_json;

void check_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ValidationError(std::string(where) + " must be a JSON object");
  const std::set<std::string_view> known(allowed);
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ValidationError("unknown key '" + key + "' in " + std::string(where));
}

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Json source_to_json(const DatasetSource& s) {
  Json j;
  if (!s.preset.empty()) {
    j["preset"] = s.preset;
    j["seed"] = s.seed;
  } else {
    j["path"] = s.path.string();
  }
  return j;
}

DatasetSource source_from_json(const Json& j, std::string_view where) {
  if (j.is_string()) return DatasetSource::parse(j.get<std::string>(), 42);
  check_keys(j, where, {"preset", "path", "seed"});
  DatasetSource s;
  read(j, "seed", s.seed);
  if (j.contains("preset") == j.contains("path"))
    throw ValidationError(std::string(where) + " needs exactly one of 'preset' or 'path'");
  if (j.contains("preset")) {
    s.preset = j.at("preset").get<std::string>();
    (void)synthetic_preset(s.preset, s.seed);
  } else {
    s.path = j.at("path").get<std::string>();
  }
  return s;
}

Json model_to_json(const ModelConfig& m) {
  Json j;
  j["encoder"] = std::string(to_string(m.encoder.variant));
  j["embedding_dim"] = m.encoder.embedding_dim;
  j["decoder"] = std::string(to_string(m.decoder_sharing));
  j["class_count"] = m.class_count;
  j["projection_head"] = m.projection_head;
  j["input_scale"] = m.input_scale;
  return j;
}

void model_from_json(const Json& j, ModelConfig& m) {
  check_keys(j, "train.model", {"encoder", "embedding_dim", "decoder", "class_count", "projection_head", "input_scale"});
  if (j.contains("encoder")) m.encoder.variant = encoder_variant_from_string(j.at("encoder").get<std::string>());
  read(j, "embedding_dim", m.encoder.embedding_dim);
  if (j.contains("decoder")) m.decoder_sharing = decoder_sharing_from_string(j.at("decoder").get<std::string>());
  read(j, "class_count", m.class_count);
  read(j, "projection_head", m.projection_head);
  read(j, "input_scale", m.input_scale);
}

Json augment_to_json(const AugmentConfig& a) {
  Json j;
  j["p_flip"] = a.p_flip;
  j["p_rotate"] = a.p_rotate;
  j["p_translate"] = a.p_translate;
  j["max_rotate_deg"] = a.max_rotate_deg;
  j["max_translate_px"] = a.max_translate_px;
  return j;
}

void augment_from_json(const Json& j, AugmentConfig& a) {
  check_keys(j, "train.augment", {"p_flip", "p_rotate", "p_translate", "max_rotate_deg", "max_translate_px"});
  read(j, "p_flip", a.p_flip);
  read(j, "p_rotate", a.p_rotate);
  read(j, "p_translate", a.p_translate);
  read(j, "max_rotate_deg", a.max_rotate_deg);
  read(j, "max_translate_px", a.max_translate_px);
}

Json train_to_json(const TrainConfig& t) {
  Json j;
  j["epochs"] = t.epochs;
  j["batch_size"] = t.batch_size;
  j["learning_rate"] = t.learning_rate;
  j["temperature"] = t.temperature;
  j["weights"] = {{"target_ce", t.weights.target_ce},
                  {"auxiliary_ce", t.weights.auxiliary_ce},
                  {"contrastive", t.weights.contrastive}};
  j["augment_enabled"] = t.augment_enabled;
  j["augment"] = augment_to_json(t.augment);
  j["stop_gradient_auxiliary"] = t.stop_gradient_auxiliary;
  j["model"] = model_to_json(t.model);
  return j;
}

void train_from_json(const Json& j, TrainConfig& t) {
  check_keys(j, "train",
             {"epochs", "batch_size", "learning_rate", "temperature", "weights", "augment_enabled", "augment",
              "stop_gradient_auxiliary", "model"});
  read(j, "epochs", t.epochs);
  read(j, "batch_size", t.batch_size);
  read(j, "learning_rate", t.learning_rate);
  read(j, "temperature", t.temperature);
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    check_keys(w, "train.weights", {"target_ce", "auxiliary_ce", "contrastive"});
    read(w, "target_ce", t.weights.target_ce);
    read(w, "auxiliary_ce", t.weights.auxiliary_ce);
    read(w, "contrastive", t.weights.contrastive);
  }
  read(j, "augment_enabled", t.augment_enabled);
  if (j.contains("augment")) augment_from_json(j.at("augment"), t.augment);
  read(j, "stop_gradient_auxiliary", t.stop_gradient_auxiliary);
  if (j.contains("model")) model_from_json(j.at("model"), t.model);
}

}  // namespace

DatasetSource DatasetSource::parse(std::string_view text, std::uint64_t seed) {
  DatasetSource s;
  s.seed = seed;
  if (text == "chr-syn" || text == "bed-syn")
    s.preset = std::string(text);
  else
    s.path = std::filesystem::path(text);
  return s;
}

std::string DatasetSource::describe() const {
  return preset.empty() ? path.string() : preset + " (seed " + std::to_string(seed) + ")";
}

Dataset DatasetSource::load() const {
  if (!preset.empty()) return generate_synthetic(synthetic_preset(preset, seed));
  if (!std::filesystem::exists(path)) throw IoError("dataset not found: " + path.string());
  return load_dataset(path);
}

void ExperimentConfig::validate() const {
  require(!name.empty() && name.find('/') == std::string::npos, "experiment name must be non-empty without '/'");
  require(!seeds.empty(), "seed list is empty");
  require(split.postures >= 1 && split.samples >= 1, "split needs m >= 1 and n >= 1");
  require(options.knn_k >= 1 && options.knn_k % 2 == 1, "knn_k must be odd and >= 1");
  require(options.pretrain_epochs >= 0, "pretrain_epochs must be >= 0");
  train.validate();
  for (const auto* s : {&target, &auxiliary})
    if (s->preset.empty() && !s->path.empty() && !std::filesystem::exists(s->path))
      throw IoError("dataset not found: " + s->path.string());
}

ExperimentConfig config_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed experiment config: ") + e.what());
  }
  ExperimentConfig c;
  try {
    check_keys(j, "experiment config",
               {"name", "method", "seeds", "target", "auxiliary", "split", "train", "knn_k", "pretrain_epochs"});
    read(j, "name", c.name);
    if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
    read(j, "seeds", c.seeds);
    if (j.contains("target")) c.target = source_from_json(j.at("target"), "target");
    if (j.contains("auxiliary")) c.auxiliary = source_from_json(j.at("auxiliary"), "auxiliary");
    if (j.contains("split")) {
      const auto& s = j.at("split");
      check_keys(s, "split", {"postures", "samples", "val_fraction"});
      read(s, "postures", c.split.postures);
      read(s, "samples", c.split.samples);
      read(s, "val_fraction", c.split.val_fraction);
    }
    if (j.contains("train")) train_from_json(j.at("train"), c.train);
    read(j, "knn_k", c.options.knn_k);
    read(j, "pretrain_epochs", c.options.pretrain_epochs);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad value in experiment config: ") + e.what());
  }
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  j["method"] = std::string(to_string(c.method));
  j["seeds"] = c.seeds;
  j["target"] = source_to_json(c.target);
  j["auxiliary"] = source_to_json(c.auxiliary);
  j["split"] = {{"postures", c.split.postures}, {"samples", c.split.samples}, {"val_fraction", c.split.val_fraction}};
  j["train"] = train_to_json(c.train);
  j["knn_k"] = c.options.knn_k;
  j["pretrain_epochs"] = c.options.pretrain_epochs;
  return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) { return config_from_json(read_text(path)); }

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto item = text.substr(0, comma);
    int v = 0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || end != item.data() + item.size() || item.empty())
      throw ValidationError("not an integer list: '" + std::string(text) + "'");
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ValidationError("empty list");
  return out;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (int v : parse_int_list(text)) {
    if (v < 0) throw ValidationError("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

std::filesystem::path default_output_root() {
  const char* env = std::getenv("PRESSURE_ID_OUT");
  return env && *env ? std::filesystem::path(env) : std::filesystem::path("out");
}

}  // namespace pressure_id::cli
