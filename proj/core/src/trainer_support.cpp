#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tap/trainer.hpp"

namespace tap {

using nlohmann::json;

const char* to_string(TrainTask task) {
  switch (task) {
    case TrainTask::Pretrain: return "pretrain";
    case TrainTask::Answer: return "finetune";
    case TrainTask::Joint: return "joint";
  }
  throw std::invalid_argument("unknown training task");
}

Vocabulary build_text_vocabulary(const std::vector<Sample>& samples) {
  Vocabulary v;
  for (const auto& s : samples) {
    for (const auto& token : s.extended_text.tokens) {
      if (!token.text.empty()) v.add(token.text);
    }
  }
  v.freeze();
  return v;
}

Vocabulary build_answer_vocabulary(const std::vector<Sample>& samples) {
  Vocabulary v;
  for (const auto& s : samples) {
    if (s.answers) {
      for (const auto& answer : *s.answers) {
        for (const auto& token : tokenize(answer)) v.add(token);
      }
    }
    if (s.caption) {
      for (const auto& token : tokenize(*s.caption)) v.add(token);
    }
  }
  v.freeze();
  return v;
}

namespace detail {

std::vector<std::string> vocab_tail(const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (int i = Vocabulary::kReservedCount; i < vocab.size(); ++i) {
    out.push_back(vocab.token(i));
  }
  return out;
}

std::string render_iteration_record(int iter, double total,
                                    const std::map<std::string, double>& components,
                                    double lr, double grad_norm) {
  json row;
  row["kind"] = "iteration";
  row["iter"] = iter;
  row["loss"] = total;
  for (const auto& [name, value] : components) row[name] = value;
  row["lr"] = lr;
  row["grad_norm"] = grad_norm;
  return row.dump();
}

std::string render_eval_record(int iter, double metric) {
  json row;
  row["kind"] = "eval";
  row["iter"] = iter;
  row["metric"] = metric;
  return row.dump();
}

std::string render_checkpoint_meta(const RunConfig& config, const Vocabulary& vocab,
                                   const Vocabulary& answer_vocab, int iteration,
                                   long adam_step, const std::string& task,
                                   double metric) {
  json meta;
  meta["config"] = json::parse(config.to_json());
  meta["config_digest"] = config.digest();
  meta["task"] = task;
  meta["iteration"] = iteration;
  meta["adam_step"] = adam_step;
  meta["metric"] = metric;
  meta["vocab"] = vocab_tail(vocab);
  meta["answer_vocab"] = vocab_tail(answer_vocab);
  return meta.dump();
}

void render_manifest(const std::string& path, const RunConfig& config,
                     const std::string& task, const std::string& status,
                     int start_iter, int max_iters, int iterations_done,
                     double best_metric, const std::string& best_ckpt,
                     const std::string& last_ckpt) {
  json m;
  m["task"] = task;
  m["status"] = status;
  m["config_digest"] = config.digest();
  m["seed"] = config.training.seed;
  m["precision"] = config.training.precision;
  m["start_iteration"] = start_iter;
  m["max_iterations"] = max_iters;
  m["iterations_done"] = iterations_done;
  if (best_metric >= 0.0) m["best_metric"] = best_metric;
  if (!best_ckpt.empty()) m["best_checkpoint"] = best_ckpt;
  if (!last_ckpt.empty()) m["last_checkpoint"] = last_ckpt;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("manifest: cannot write " + path);
  out << m.dump(2) << '\n';
}

}  // namespace detail

CheckpointDescription describe_checkpoint(const Checkpoint& ckpt) {
  json meta;
  try {
    meta = json::parse(ckpt.meta_json);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint: bad metadata: ") + e.what());
  }
  CheckpointDescription d;
  d.config = RunConfig::from_json_text(meta.at("config").dump());
  d.vocab_tokens = meta.at("vocab").get<std::vector<std::string>>();
  d.answer_vocab_tokens = meta.at("answer_vocab").get<std::vector<std::string>>();
  d.task = meta.value("task", std::string());
  d.iteration = meta.value("iteration", 0);
  d.adam_step = meta.value("adam_step", 0L);
  d.metric = meta.value("metric", 0.0);
  return d;
}

void verify_checkpoint_compatible(const Checkpoint& ckpt, const RunConfig& current,
                                  const Vocabulary& vocab,
                                  const Vocabulary& answer_vocab) {
  const CheckpointDescription d = describe_checkpoint(ckpt);
  if (!(d.config.model == current.model)) {
    throw ConfigError("checkpoint: model configuration mismatch");
  }
  if (d.config.features.visual_dim != current.features.visual_dim ||
      d.config.features.word_vector_dim != current.features.word_vector_dim) {
    throw ConfigError("checkpoint: feature dimension mismatch");
  }
  if (d.config.training.precision != current.training.precision) {
    throw ConfigError("checkpoint: precision mismatch (" +
                      d.config.training.precision + " vs " +
                      current.training.precision + ")");
  }
  if (d.vocab_tokens != detail::vocab_tail(vocab)) {
    throw ConfigError("checkpoint: text vocabulary mismatch");
  }
  if (d.answer_vocab_tokens != detail::vocab_tail(answer_vocab)) {
    throw ConfigError("checkpoint: answer vocabulary mismatch");
  }
}

}  // namespace tap
