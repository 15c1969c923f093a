#include "tap/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tap/rng.hpp"

namespace tap {

using nlohmann::json;

void ModelConfig::validate() const {
  if (hidden <= 0 || heads <= 0 || hidden % heads != 0) {
    throw ConfigError("model: hidden must be a positive multiple of heads");
  }
  if (text_layers < 0 || mm_layers <= 0) {
    throw ConfigError("model: need text_layers >= 0 and mm_layers >= 1");
  }
  if (ffn_mult <= 0) throw ConfigError("model: ffn_mult must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("model: dropout must be in [0,1)");
  if (max_positions <= 0 || max_decode_steps <= 0) {
    throw ConfigError("model: table sizes must be positive");
  }
  if (region_classes != 2 && region_classes != kNumRelativePositions) {
    throw ConfigError("model: region_classes must be 2 or 12");
  }
}

void TrainingConfig::validate() const {
  if (batch_size <= 0) throw ConfigError("training: batch_size must be positive");
  if (base_lr <= 0.0) throw ConfigError("training: base_lr must be positive");
  if (warmup_factor < 0.0 || warmup_factor > 1.0) {
    throw ConfigError("training: warmup_factor must be in [0,1]");
  }
  if (warmup_iters < 0 || max_iters <= 0) {
    throw ConfigError("training: iteration counts must be positive");
  }
  for (size_t i = 0; i < decay_steps.size(); ++i) {
    if (decay_steps[i] >= max_iters || (i > 0 && decay_steps[i] <= decay_steps[i - 1])) {
      throw ConfigError("training: decay_steps must be strictly increasing and below max_iters");
    }
  }
  if (decay_factor <= 0.0 || decay_factor > 1.0) {
    throw ConfigError("training: decay_factor must be in (0,1]");
  }
  if (clip_norm <= 0.0) throw ConfigError("training: clip_norm must be positive");
  if (pretrain_fraction < 0.0 || pretrain_fraction > 1.0) {
    throw ConfigError("training: pretrain_fraction must be in [0,1]");
  }
  if (eval_interval <= 0 || checkpoint_interval <= 0 || log_interval <= 0) {
    throw ConfigError("training: intervals must be positive");
  }
  if (eval_samples <= 0) throw ConfigError("training: eval_samples must be positive");
  if (precision != "float32" && precision != "float64") {
    throw ConfigError("training: precision must be float32 or float64");
  }
}

void RunConfig::validate() const {
  model.validate();
  training.validate();
  if (features.visual_dim <= 0 || features.word_vector_dim <= 0) {
    throw ConfigError("features: dimensions must be positive");
  }
  if (features.caps.max_question < 0 || features.caps.max_object_labels < 0 ||
      features.caps.max_scene_text < 0) {
    throw ConfigError("features: caps must be non-negative");
  }
  const int total = features.caps.max_question + features.caps.max_object_labels +
                    features.caps.max_scene_text;
  if (total > model.max_positions) {
    throw ConfigError("features: caps exceed model.max_positions");
  }
  const auto& m = tasks.masking;
  if (m.mask_prob < 0.0 || m.mask_prob > 1.0 || m.mask_token_frac < 0.0 ||
      m.random_token_frac < 0.0 || m.mask_token_frac + m.random_token_frac > 1.0) {
    throw ConfigError("tasks: masking fractions out of range");
  }
  if (tasks.pollution.pollute_prob < 0.0 || tasks.pollution.pollute_prob > 1.0) {
    throw ConfigError("tasks: pollute_prob must be in [0,1]");
  }
  if (tasks.region_prediction.classes != model.region_classes) {
    throw ConfigError("tasks: region classes must match model.region_classes");
  }
}

namespace {

json to_json_tree(const RunConfig& c) {
  return json{
      {"features",
       {{"visual_dim", c.features.visual_dim},
        {"word_vector_dim", c.features.word_vector_dim},
        {"word_vector_provider", c.features.word_vector_provider},
        {"caps",
         {{"max_question", c.features.caps.max_question},
          {"max_object_labels", c.features.caps.max_object_labels},
          {"max_scene_text", c.features.caps.max_scene_text}}}}},
      {"model",
       {{"text_layers", c.model.text_layers},
        {"mm_layers", c.model.mm_layers},
        {"hidden", c.model.hidden},
        {"heads", c.model.heads},
        {"ffn_mult", c.model.ffn_mult},
        {"dropout", c.model.dropout},
        {"max_positions", c.model.max_positions},
        {"max_decode_steps", c.model.max_decode_steps},
        {"region_classes", c.model.region_classes}}},
      {"tasks",
       {{"mask_prob", c.tasks.masking.mask_prob},
        {"mask_token_frac", c.tasks.masking.mask_token_frac},
        {"random_token_frac", c.tasks.masking.random_token_frac},
        {"pollute_prob", c.tasks.pollution.pollute_prob}}},
      {"loss_weights",
       {{"masked_token", c.loss_weights.masked_token},
        {"contrastive", c.loss_weights.contrastive},
        {"region", c.loss_weights.region},
        {"answer", c.loss_weights.answer}}},
      {"relations",
       {{"on_containment", c.relations.on_containment},
        {"cover_containment", c.relations.cover_containment},
        {"overlap_iou", c.relations.overlap_iou},
        {"unrelated_distance", c.relations.unrelated_distance}}},
      {"training",
       {{"batch_size", c.training.batch_size},
        {"base_lr", c.training.base_lr},
        {"warmup_factor", c.training.warmup_factor},
        {"warmup_iters", c.training.warmup_iters},
        {"decay_steps", c.training.decay_steps},
        {"decay_factor", c.training.decay_factor},
        {"max_iters", c.training.max_iters},
        {"clip_norm", c.training.clip_norm},
        {"adam_beta1", c.training.adam_beta1},
        {"adam_beta2", c.training.adam_beta2},
        {"adam_eps", c.training.adam_eps},
        {"eval_interval", c.training.eval_interval},
        {"checkpoint_interval", c.training.checkpoint_interval},
        {"log_interval", c.training.log_interval},
        {"pretrain_fraction", c.training.pretrain_fraction},
        {"eval_samples", c.training.eval_samples},
        {"seed", c.training.seed},
        {"precision", c.training.precision}}},
  };
}

void apply_overrides(RunConfig& c, const json& root);

// Merges `node` into the config, complaining about keys that name nothing.
void apply_section(RunConfig& c, const std::string& section, const json& node) {
  auto expect_object = [&](const json& j) {
    if (!j.is_object()) throw ConfigError("config: section '" + section + "' must be an object");
  };
  auto unknown = [&](const std::string& key) {
    throw ConfigError("config: unknown key '" + section + "." + key + "'");
  };

  expect_object(node);
  if (section == "features") {
    for (const auto& [key, value] : node.items()) {
      if (key == "visual_dim") c.features.visual_dim = value.get<int>();
      else if (key == "word_vector_dim") c.features.word_vector_dim = value.get<int>();
      else if (key == "word_vector_provider") c.features.word_vector_provider = value.get<std::string>();
      else if (key == "caps") {
        if (!value.is_object()) throw ConfigError("config: features.caps must be an object");
        for (const auto& [ck, cv] : value.items()) {
          if (ck == "max_question") c.features.caps.max_question = cv.get<int>();
          else if (ck == "max_object_labels") c.features.caps.max_object_labels = cv.get<int>();
          else if (ck == "max_scene_text") c.features.caps.max_scene_text = cv.get<int>();
          else throw ConfigError("config: unknown key 'features.caps." + ck + "'");
        }
      } else unknown(key);
    }
  } else if (section == "model") {
    for (const auto& [key, value] : node.items()) {
      if (key == "text_layers") c.model.text_layers = value.get<int>();
      else if (key == "mm_layers") c.model.mm_layers = value.get<int>();
      else if (key == "hidden") c.model.hidden = value.get<int>();
      else if (key == "heads") c.model.heads = value.get<int>();
      else if (key == "ffn_mult") c.model.ffn_mult = value.get<int>();
      else if (key == "dropout") c.model.dropout = value.get<double>();
      else if (key == "max_positions") c.model.max_positions = value.get<int>();
      else if (key == "max_decode_steps") c.model.max_decode_steps = value.get<int>();
      else if (key == "region_classes") {
        c.model.region_classes = value.get<int>();
        c.tasks.region_prediction.classes = c.model.region_classes;
      } else unknown(key);
    }
  } else if (section == "tasks") {
    for (const auto& [key, value] : node.items()) {
      if (key == "mask_prob") c.tasks.masking.mask_prob = value.get<double>();
      else if (key == "mask_token_frac") c.tasks.masking.mask_token_frac = value.get<double>();
      else if (key == "random_token_frac") c.tasks.masking.random_token_frac = value.get<double>();
      else if (key == "pollute_prob") c.tasks.pollution.pollute_prob = value.get<double>();
      else unknown(key);
    }
  } else if (section == "loss_weights") {
    for (const auto& [key, value] : node.items()) {
      if (key == "masked_token") c.loss_weights.masked_token = value.get<double>();
      else if (key == "contrastive") c.loss_weights.contrastive = value.get<double>();
      else if (key == "region") c.loss_weights.region = value.get<double>();
      else if (key == "answer") c.loss_weights.answer = value.get<double>();
      else unknown(key);
    }
  } else if (section == "relations") {
    for (const auto& [key, value] : node.items()) {
      if (key == "on_containment") c.relations.on_containment = value.get<double>();
      else if (key == "cover_containment") c.relations.cover_containment = value.get<double>();
      else if (key == "overlap_iou") c.relations.overlap_iou = value.get<double>();
      else if (key == "unrelated_distance") c.relations.unrelated_distance = value.get<double>();
      else unknown(key);
    }
    c.tasks.region_prediction.thresholds = c.relations;
  } else if (section == "training") {
    for (const auto& [key, value] : node.items()) {
      if (key == "batch_size") c.training.batch_size = value.get<int>();
      else if (key == "base_lr") c.training.base_lr = value.get<double>();
      else if (key == "warmup_factor") c.training.warmup_factor = value.get<double>();
      else if (key == "warmup_iters") c.training.warmup_iters = value.get<int>();
      else if (key == "decay_steps") c.training.decay_steps = value.get<std::vector<int>>();
      else if (key == "decay_factor") c.training.decay_factor = value.get<double>();
      else if (key == "max_iters") c.training.max_iters = value.get<int>();
      else if (key == "clip_norm") c.training.clip_norm = value.get<double>();
      else if (key == "adam_beta1") c.training.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") c.training.adam_beta2 = value.get<double>();
      else if (key == "adam_eps") c.training.adam_eps = value.get<double>();
      else if (key == "eval_interval") c.training.eval_interval = value.get<int>();
      else if (key == "checkpoint_interval") c.training.checkpoint_interval = value.get<int>();
      else if (key == "log_interval") c.training.log_interval = value.get<int>();
      else if (key == "pretrain_fraction") c.training.pretrain_fraction = value.get<double>();
      else if (key == "eval_samples") c.training.eval_samples = value.get<int>();
      else if (key == "seed") c.training.seed = value.get<std::uint64_t>();
      else if (key == "precision") c.training.precision = value.get<std::string>();
      else unknown(key);
    }
  } else {
    throw ConfigError("config: unknown section '" + section + "'");
  }
}

void apply_overrides(RunConfig& c, const json& root) {
  if (!root.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [section, node] : root.items()) {
    apply_section(c, section, node);
  }
}

}  // namespace

std::string RunConfig::to_json() const { return to_json_tree(*this).dump(2); }

std::uint64_t RunConfig::digest() const { return fnv1a64(to_json_tree(*this).dump()); }

RunConfig RunConfig::from_json_text(const std::string& text) {
  RunConfig c;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    apply_overrides(c, root);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << to_json() << '\n';
}

double lr_at(const TrainingConfig& config, int iteration) {
  double lr = config.base_lr;
  if (iteration < config.warmup_iters) {
    const double progress = static_cast<double>(iteration) /
                            static_cast<double>(config.warmup_iters);
    lr *= config.warmup_factor + (1.0 - config.warmup_factor) * progress;
  }
  for (int step : config.decay_steps) {
    if (iteration >= step) lr *= config.decay_factor;
  }
  return lr;
}

}  // namespace tap
