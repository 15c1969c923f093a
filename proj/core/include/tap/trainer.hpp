#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tap/checkpoint.hpp"
#include "tap/metrics.hpp"
#include "tap/model.hpp"
#include "tap/pretrain_instance.hpp"
#include "tap/run_config.hpp"

namespace tap {

// Adam with global-norm gradient clipping. Moment tensors parallel the
// parameter store's registration order.
template <typename S>
class AdamOptimizer {
 public:
  explicit AdamOptimizer(const TrainingConfig& config)
      : beta1_(static_cast<S>(config.adam_beta1)),
        beta2_(static_cast<S>(config.adam_beta2)),
        eps_(static_cast<S>(config.adam_eps)),
        clip_(static_cast<S>(config.clip_norm)) {}

  // Clips, applies one update, zeroes gradients. Returns the pre-clip norm.
  double step(ParamStore<S>& params, double lr) {
    const auto& entries = params.entries();
    if (m_.empty()) {
      for (const auto& [name, p] : entries) {
        m_.push_back(ag::Mat<S>::Zero(p->value.rows(), p->value.cols()));
        v_.push_back(ag::Mat<S>::Zero(p->value.rows(), p->value.cols()));
      }
    }

    double norm_sq = 0.0;
    for (const auto& [name, p] : entries) {
      if (p->grad.size() > 0) norm_sq += static_cast<double>(p->grad.squaredNorm());
    }
    const double norm = std::sqrt(norm_sq);
    const S rescale =
        (norm > static_cast<double>(clip_)) ? static_cast<S>(static_cast<double>(clip_) / norm) : S(1);

    ++t_;
    const S correction1 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta1_), t_));
    const S correction2 = S(1) - static_cast<S>(std::pow(static_cast<double>(beta2_), t_));
    for (size_t i = 0; i < entries.size(); ++i) {
      auto& p = entries[i].second;
      ag::Mat<S> g = (p->grad.size() > 0)
                         ? ag::Mat<S>(p->grad * rescale)
                         : ag::Mat<S>(ag::Mat<S>::Zero(p->value.rows(), p->value.cols()));
      m_[i] = beta1_ * m_[i] + (S(1) - beta1_) * g;
      v_[i] = (beta2_ * v_[i].array() + (S(1) - beta2_) * g.array().square()).matrix();
      const auto m_hat = m_[i].array() / correction1;
      const auto v_hat = v_[i].array() / correction2;
      p->value.array() -= static_cast<S>(lr) * m_hat / (v_hat.sqrt() + eps_);
      p->zero_grad();
    }
    return norm;
  }

  long step_count() const { return t_; }
  void set_step_count(long t) { t_ = t; }
  std::vector<ag::Mat<S>>& first_moments() { return m_; }
  std::vector<ag::Mat<S>>& second_moments() { return v_; }

  void ensure_states(const ParamStore<S>& params) {
    if (!m_.empty()) return;
    for (const auto& [name, p] : params.entries()) {
      m_.push_back(ag::Mat<S>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(ag::Mat<S>::Zero(p->value.rows(), p->value.cols()));
    }
  }

 private:
  S beta1_, beta2_, eps_, clip_;
  long t_ = 0;
  std::vector<ag::Mat<S>> m_, v_;
};

enum class TrainTask { Pretrain, Answer, Joint };
enum class AnswerMode { QuestionAnswering, Captioning };

const char* to_string(TrainTask task);

struct TrainOptions {
  TrainTask task = TrainTask::Pretrain;
  AnswerMode answer_mode = AnswerMode::QuestionAnswering;
  std::string run_dir;             // empty: no files written
  std::string init_checkpoint;     // load parameters, start fresh
  std::string resume_checkpoint;   // load parameters + optimizer + iteration
  bool reinit_decoder = false;     // answer head fresh after init_checkpoint
  int max_iters_override = 0;      // > 0: replaces config.training.max_iters
};

struct LossTrace {
  std::vector<double> total;
  std::map<std::string, std::vector<double>> components;  // aligned with total
};

struct TrainOutcome {
  LossTrace trace;
  int iterations = 0;
  double best_metric = 0.0;
  double final_metric = 0.0;
  std::string best_checkpoint;
  std::string last_checkpoint;
};

struct PretrainEvalResult {
  double masked_token_accuracy = 0.0;
  double contrastive_accuracy = 0.0;
  double region_accuracy = 0.0;
  double mean() const {
    return (masked_token_accuracy + contrastive_accuracy + region_accuracy) / 3.0;
  }
};

// Builds the token table from every extended-text token in dataset order.
Vocabulary build_text_vocabulary(const std::vector<Sample>& samples);

// Builds the answer table from answer and caption tokens in dataset order.
Vocabulary build_answer_vocabulary(const std::vector<Sample>& samples);

template <typename S>
class Trainer {
 public:
  Trainer(const RunConfig& config, std::vector<Sample> train,
          std::vector<Sample> eval, Vocabulary vocab, Vocabulary answer_vocab)
      : config_(config),
        train_(std::move(train)),
        eval_(std::move(eval)),
        vocab_(std::move(vocab)),
        answer_vocab_(std::move(answer_vocab)),
        model_(config.model, vocab_.size(), answer_vocab_.size(),
               config.features.visual_dim, config.features.word_vector_dim,
               config.training.seed),
        optimizer_(config.training) {
    config_.validate();
    if (train_.empty()) throw std::invalid_argument("trainer: empty training set");
    if (eval_.empty()) {
      // Deterministic holdout: the tail of the dataset.
      const int n = std::min(config_.training.eval_samples,
                             static_cast<int>(train_.size()) / 2);
      if (n > 0) {
        eval_.assign(train_.end() - n, train_.end());
        train_.resize(train_.size() - static_cast<size_t>(n));
      } else {
        eval_ = train_;
      }
    }
  }

  FusionModel<S>& model() { return model_; }
  const Vocabulary& vocab() const { return vocab_; }
  const Vocabulary& answer_vocab() const { return answer_vocab_; }
  const std::vector<Sample>& train_samples() const { return train_; }
  const std::vector<Sample>& eval_samples() const { return eval_; }

  TrainOutcome run(const TrainOptions& options) {
    const double fraction = task_fraction(options.task);
    int start_iter = 0;
    if (!options.resume_checkpoint.empty()) {
      start_iter = restore(options.resume_checkpoint);
    } else if (!options.init_checkpoint.empty()) {
      load_parameters(options.init_checkpoint);
      if (options.reinit_decoder) model_.reinit_decoder(config_.training.seed + 1);
    }
    optimizer_.ensure_states(model_.params());

    const int max_iters = options.max_iters_override > 0 ? options.max_iters_override
                                                         : config_.training.max_iters;
    const bool writing = !options.run_dir.empty();
    std::ofstream metrics_out;
    if (writing) {
      std::filesystem::create_directories(options.run_dir + "/checkpoints");
      write_manifest(options, max_iters, start_iter, "running", -1);
      config_.save(options.run_dir + "/config.json");
      metrics_out.open(options.run_dir + "/metrics.jsonl",
                       start_iter > 0 ? std::ios::app : std::ios::out);
    }

    TrainOutcome outcome;
    outcome.best_metric = -1.0;
    int failed_iter = -1;
    try {
      for (int iter = start_iter; iter < max_iters; ++iter) {
        IterationStats stats = train_iteration(iter, fraction, options.answer_mode);
        outcome.trace.total.push_back(stats.total);
        for (const auto& [key, value] : stats.components) {
          outcome.trace.components[key].push_back(value);
        }
        if (metrics_out.is_open()) {
          metrics_out << iteration_record(iter, stats) << '\n';
        }

        const bool last = iter + 1 == max_iters;
        if ((iter + 1) % config_.training.eval_interval == 0 || last) {
          const double metric = evaluate(options);
          outcome.final_metric = metric;
          if (writing && metric > outcome.best_metric) {
            outcome.best_checkpoint = options.run_dir + "/checkpoints/best.ckpt";
            save(outcome.best_checkpoint, iter + 1, options, metric);
          }
          outcome.best_metric = std::max(outcome.best_metric, metric);
          if (metrics_out.is_open()) {
            metrics_out << eval_record(iter, metric) << '\n';
          }
        }
        if (writing &&
            ((iter + 1) % config_.training.checkpoint_interval == 0 || last)) {
          outcome.last_checkpoint = options.run_dir + "/checkpoints/last.ckpt";
          save(outcome.last_checkpoint, iter + 1, options, outcome.final_metric);
        }
        outcome.iterations = iter + 1;
      }
    } catch (const std::exception&) {
      if (writing) {
        write_manifest(options, max_iters, start_iter, "failed", outcome.iterations);
      }
      throw;
    }
    (void)failed_iter;
    if (writing) {
      write_manifest(options, max_iters, start_iter, "finished", outcome.iterations,
                     outcome.best_metric, outcome.best_checkpoint,
                     outcome.last_checkpoint);
    }
    return outcome;
  }

  // Held-out accuracy of the three pre-training heads on deterministic
  // instances built from the eval set.
  PretrainEvalResult evaluate_pretrain() {
    PretrainEvalResult r;
    long mlm_hits = 0, mlm_total = 0;
    long itm_hits = 0, itm_total = 0;
    long region_hits = 0, region_total = 0;
    for (size_t i = 0; i < eval_.size(); ++i) {
      auto rng = derive_rng(config_.training.seed, "eval_instance", i);
      PretrainInstance instance =
          build_pretrain_instance(eval_[i], eval_pool(), vocab_, config_.tasks, rng);
      ag::Graph<S> g;
      auto in = encode_instance(instance);
      auto f = model_.forward(g, in, /*training=*/false, nullptr);

      if (!instance.mask_positions.empty()) {
        auto logits = model_.masked_token_logits(g, f, instance.mask_positions);
        for (size_t k = 0; k < instance.mask_targets.size(); ++k) {
          Eigen::Index best = 0;
          logits->value.row(static_cast<Eigen::Index>(k)).maxCoeff(&best);
          mlm_hits += (static_cast<int>(best) == vocab_.id(instance.mask_targets[k])) ? 1 : 0;
          ++mlm_total;
        }
      }
      auto itm = model_.contrastive_logit(g, f);
      const bool said_polluted = itm->value(0, 0) > S(0);
      itm_hits += (said_polluted ==
                   (instance.contrastive_label == ContrastiveLabel::Polluted))
                      ? 1
                      : 0;
      ++itm_total;
      if (instance.region_pair.valid) {
        auto logits = model_.region_logits(g, f, instance.region_pair.object_index,
                                           instance.region_pair.scene_text_index);
        Eigen::Index best = 0;
        logits->value.row(0).maxCoeff(&best);
        region_hits += (static_cast<int>(best) == instance.region_pair.label) ? 1 : 0;
        ++region_total;
      }
    }
    r.masked_token_accuracy = mlm_total ? static_cast<double>(mlm_hits) / mlm_total : 0.0;
    r.contrastive_accuracy = itm_total ? static_cast<double>(itm_hits) / itm_total : 0.0;
    r.region_accuracy = region_total ? static_cast<double>(region_hits) / region_total : 0.0;
    return r;
  }

  // Greedy predictions for the eval set.
  std::vector<std::string> predict_eval() {
    std::vector<std::string> out;
    out.reserve(eval_.size());
    for (const auto& sample : eval_) {
      out.push_back(decode_answer(model_, sample, vocab_, answer_vocab_,
                                  config_.model.max_decode_steps));
    }
    return out;
  }

  double evaluate_answer_metric(AnswerMode mode) {
    const auto predictions = predict_eval();
    if (mode == AnswerMode::QuestionAnswering) {
      double total = 0.0;
      int counted = 0;
      for (size_t i = 0; i < eval_.size(); ++i) {
        if (!eval_[i].answers) continue;
        total += vqa_accuracy(predictions[i], *eval_[i].answers);
        ++counted;
      }
      return counted ? total / counted : 0.0;
    }
    std::vector<CiderInput> corpus;
    for (size_t i = 0; i < eval_.size(); ++i) {
      if (!eval_[i].caption) continue;
      corpus.push_back({predictions[i], {*eval_[i].caption}});
    }
    return corpus.empty() ? 0.0 : cider_d(corpus);
  }

  void save(const std::string& path, int iteration, const TrainOptions& options,
            double metric) {
    Checkpoint ckpt;
    ckpt.dtype = config_.training.precision;
    for (const auto& [name, p] : model_.params().entries()) {
      ckpt.tensors.push_back({name, p->value.template cast<double>()});
    }
    optimizer_.ensure_states(model_.params());
    const auto& entries = model_.params().entries();
    for (size_t i = 0; i < entries.size(); ++i) {
      ckpt.tensors.push_back(
          {"adam.m." + entries[i].first,
           optimizer_.first_moments()[i].template cast<double>()});
      ckpt.tensors.push_back(
          {"adam.v." + entries[i].first,
           optimizer_.second_moments()[i].template cast<double>()});
    }
    ckpt.meta_json = checkpoint_meta(iteration, options, metric);
    save_checkpoint(ckpt, path);
  }

  std::string checkpoint_meta(int iteration, const TrainOptions& options,
                              double metric) const;

  // Loads parameters only (for fine-tuning on top of pre-trained weights).
  void load_parameters(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    verify_compatible(ckpt);
    for (const auto& [name, p] : model_.params().entries()) {
      const auto& t = ckpt.find(name);
      if (t.values.rows() != p->value.rows() || t.values.cols() != p->value.cols()) {
        throw std::runtime_error("checkpoint: shape mismatch for " + name);
      }
      p->value = t.values.template cast<S>();
    }
  }

  // Loads parameters + optimizer + iteration for exact resume.
  int restore(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    verify_compatible(ckpt);
    optimizer_.ensure_states(model_.params());
    const auto& entries = model_.params().entries();
    for (size_t i = 0; i < entries.size(); ++i) {
      const auto& [name, p] = entries[i];
      p->value = ckpt.find(name).values.template cast<S>();
      optimizer_.first_moments()[i] = ckpt.find("adam.m." + name).values.template cast<S>();
      optimizer_.second_moments()[i] = ckpt.find("adam.v." + name).values.template cast<S>();
    }
    const auto meta = checkpoint_meta_parsed(ckpt);
    optimizer_.set_step_count(meta.adam_step);
    return meta.iteration;
  }

  void verify_compatible(const Checkpoint& ckpt) const;

 private:
  struct IterationStats {
    double total = 0.0;
    std::map<std::string, double> components;
    double grad_norm = 0.0;
    double lr = 0.0;
  };

  struct MetaFields {
    int iteration = 0;
    long adam_step = 0;
  };
  static MetaFields checkpoint_meta_parsed(const Checkpoint& ckpt);

  double task_fraction(TrainTask task) const {
    switch (task) {
      case TrainTask::Pretrain: return 1.0;
      case TrainTask::Answer: return 0.0;
      case TrainTask::Joint: return config_.training.pretrain_fraction;
    }
    throw std::invalid_argument("unknown task");
  }

  const std::vector<Sample>& eval_pool() const {
    // Pollution donors for eval instances come from the eval set itself
    // unless it is a single image, in which case fall back to training.
    return eval_.size() > 1 ? eval_ : train_;
  }

  EncodedInput<S> encode_instance(const PretrainInstance& instance) {
    return encode_sample<S>(instance.sample, vocab_, config_.features.visual_dim,
                            config_.features.word_vector_dim);
  }

  IterationStats train_iteration(int iter, double fraction, AnswerMode answer_mode) {
    ag::Graph<S> g;
    const std::uint64_t seed = config_.training.seed;
    const int batch = config_.training.batch_size;

    std::vector<ag::VarPtr<S>> mlm_logit_parts;
    std::vector<int> mlm_targets;
    std::vector<ag::VarPtr<S>> itm_logits;
    std::vector<S> itm_targets;
    std::vector<ag::VarPtr<S>> region_logit_parts;
    std::vector<int> region_targets;
    std::vector<ag::VarPtr<S>> answer_losses;

    auto batch_rng = derive_rng(seed, "batch", static_cast<std::uint64_t>(iter));
    for (int slot = 0; slot < batch; ++slot) {
      const size_t index = uniform_index(batch_rng, train_.size());
      const Sample& sample = train_[index];

      auto route_rng = derive_rng(seed, "route", static_cast<std::uint64_t>(iter),
                                  static_cast<std::uint64_t>(slot));
      const bool pretrain_slot = uniform_double(route_rng) < fraction;
      auto dropout_rng = derive_rng(seed, "dropout", static_cast<std::uint64_t>(iter),
                                    static_cast<std::uint64_t>(slot));

      if (pretrain_slot) {
        auto instance_rng = derive_rng(seed, "instance", static_cast<std::uint64_t>(iter),
                                       static_cast<std::uint64_t>(slot));
        PretrainInstance instance =
            build_pretrain_instance(sample, train_, vocab_, config_.tasks, instance_rng);
        auto in = encode_instance(instance);
        auto f = model_.forward(g, in, /*training=*/true, &dropout_rng);

        if (!instance.mask_positions.empty()) {
          mlm_logit_parts.push_back(
              model_.masked_token_logits(g, f, instance.mask_positions));
          for (const auto& target : instance.mask_targets) {
            mlm_targets.push_back(vocab_.id(target));
          }
        }
        itm_logits.push_back(model_.contrastive_logit(g, f));
        itm_targets.push_back(
            instance.contrastive_label == ContrastiveLabel::Polluted ? S(1) : S(0));
        if (instance.region_pair.valid) {
          region_logit_parts.push_back(
              model_.region_logits(g, f, instance.region_pair.object_index,
                                   instance.region_pair.scene_text_index));
          region_targets.push_back(instance.region_pair.label);
        }
      } else {
        const std::string gold =
            answer_mode == AnswerMode::QuestionAnswering
                ? (sample.answers ? consensus_answer(*sample.answers) : std::string())
                : sample.caption.value_or(std::string());
        if (gold.empty()) continue;
        auto sup = build_decode_supervision<S>(sample, gold, answer_vocab_,
                                               config_.model.max_decode_steps);
        auto in = encode_sample<S>(sample, vocab_, config_.features.visual_dim,
                                   config_.features.word_vector_dim);
        in.decode = sup.inputs;
        auto f = model_.forward(g, in, /*training=*/true, &dropout_rng);
        auto scores = model_.decode_scores(g, f);
        auto supervised = g.slice_rows(scores, 0, sup.steps);
        answer_losses.push_back(
            g.bce_logits_mean(supervised, sup.targets.topRows(sup.steps)));
      }
    }

    IterationStats stats;
    std::vector<ag::VarPtr<S>> weighted_terms;
    auto add_term = [&](const char* name, const ag::VarPtr<S>& loss, double weight) {
      stats.components[name] = static_cast<double>(loss->value(0, 0));
      weighted_terms.push_back(g.scale(loss, static_cast<S>(weight)));
    };

    if (!mlm_logit_parts.empty()) {
      auto logits = mlm_logit_parts.size() == 1 ? mlm_logit_parts[0]
                                                : g.concat_rows(mlm_logit_parts);
      add_term("masked_token", g.softmax_xent_mean(logits, mlm_targets),
               config_.loss_weights.masked_token);
    }
    if (!itm_logits.empty()) {
      auto logits = itm_logits.size() == 1 ? itm_logits[0] : g.concat_rows(itm_logits);
      ag::Mat<S> targets(static_cast<Eigen::Index>(itm_targets.size()), 1);
      for (size_t i = 0; i < itm_targets.size(); ++i) {
        targets(static_cast<Eigen::Index>(i), 0) = itm_targets[i];
      }
      add_term("contrastive", g.bce_logits_mean(logits, std::move(targets)),
               config_.loss_weights.contrastive);
    }
    if (!region_logit_parts.empty()) {
      auto logits = region_logit_parts.size() == 1 ? region_logit_parts[0]
                                                   : g.concat_rows(region_logit_parts);
      add_term("region", g.softmax_xent_mean(logits, region_targets),
               config_.loss_weights.region);
    }
    if (!answer_losses.empty()) {
      ag::VarPtr<S> sum = answer_losses[0];
      for (size_t i = 1; i < answer_losses.size(); ++i) {
        sum = g.add(sum, answer_losses[i]);
      }
      add_term("answer", g.scale(sum, S(1) / static_cast<S>(answer_losses.size())),
               config_.loss_weights.answer);
    }
    if (weighted_terms.empty()) {
      throw std::runtime_error("training: iteration " + std::to_string(iter) +
                               " produced no loss terms");
    }

    ag::VarPtr<S> total = weighted_terms[0];
    for (size_t i = 1; i < weighted_terms.size(); ++i) {
      total = g.add(total, weighted_terms[i]);
    }
    stats.total = static_cast<double>(total->value(0, 0));
    if (!std::isfinite(stats.total)) {
      throw std::runtime_error("numeric divergence: non-finite loss at iteration " +
                               std::to_string(iter));
    }

    g.backward(total);
    stats.lr = lr_at(config_.training, iter);
    stats.grad_norm = optimizer_.step(model_.params(), stats.lr);
    return stats;
  }

  double evaluate(const TrainOptions& options) {
    if (options.task == TrainTask::Pretrain) return evaluate_pretrain().mean();
    return evaluate_answer_metric(options.answer_mode);
  }

  std::string iteration_record(int iter, const IterationStats& stats) const;
  std::string eval_record(int iter, double metric) const;
  void write_manifest(const TrainOptions& options, int max_iters, int start_iter,
                      const std::string& status, int iterations_done,
                      double best_metric = -1.0, const std::string& best_ckpt = "",
                      const std::string& last_ckpt = "") const;

  RunConfig config_;
  std::vector<Sample> train_;
  std::vector<Sample> eval_;
  Vocabulary vocab_;
  Vocabulary answer_vocab_;
  FusionModel<S> model_;
  AdamOptimizer<S> optimizer_;
};

// Non-template plumbing, defined in trainer_support.cpp.
namespace detail {

std::string render_iteration_record(int iter, double total,
                                    const std::map<std::string, double>& components,
                                    double lr, double grad_norm);
std::string render_eval_record(int iter, double metric);
std::string render_checkpoint_meta(const RunConfig& config,
                                   const Vocabulary& vocab,
                                   const Vocabulary& answer_vocab, int iteration,
                                   long adam_step, const std::string& task,
                                   double metric);
void render_manifest(const std::string& path, const RunConfig& config,
                     const std::string& task, const std::string& status,
                     int start_iter, int max_iters, int iterations_done,
                     double best_metric, const std::string& best_ckpt,
                     const std::string& last_ckpt);
std::vector<std::string> vocab_tail(const Vocabulary& vocab);

}  // namespace detail

// Everything needed to rebuild a model from a checkpoint file.
struct CheckpointDescription {
  RunConfig config;
  std::vector<std::string> vocab_tokens;         // non-reserved, in id order
  std::vector<std::string> answer_vocab_tokens;  // non-reserved, in id order
  std::string task;
  int iteration = 0;
  long adam_step = 0;
  double metric = 0.0;
};

CheckpointDescription describe_checkpoint(const Checkpoint& ckpt);

// Throws ConfigError when the checkpoint's model shape, feature dims,
// precision, or vocabularies disagree with the current configuration.
void verify_checkpoint_compatible(const Checkpoint& ckpt, const RunConfig& current,
                                  const Vocabulary& vocab,
                                  const Vocabulary& answer_vocab);

template <typename S>
std::string Trainer<S>::checkpoint_meta(int iteration, const TrainOptions& options,
                                        double metric) const {
  return detail::render_checkpoint_meta(config_, vocab_, answer_vocab_, iteration,
                                        optimizer_.step_count(),
                                        to_string(options.task), metric);
}

template <typename S>
void Trainer<S>::verify_compatible(const Checkpoint& ckpt) const {
  verify_checkpoint_compatible(ckpt, config_, vocab_, answer_vocab_);
}

template <typename S>
typename Trainer<S>::MetaFields Trainer<S>::checkpoint_meta_parsed(const Checkpoint& ckpt) {
  const CheckpointDescription d = describe_checkpoint(ckpt);
  return MetaFields{d.iteration, d.adam_step};
}

template <typename S>
std::string Trainer<S>::iteration_record(int iter, const IterationStats& stats) const {
  return detail::render_iteration_record(iter, stats.total, stats.components, stats.lr,
                                         stats.grad_norm);
}

template <typename S>
std::string Trainer<S>::eval_record(int iter, double metric) const {
  return detail::render_eval_record(iter, metric);
}

template <typename S>
void Trainer<S>::write_manifest(const TrainOptions& options, int max_iters,
                                int start_iter, const std::string& status,
                                int iterations_done, double best_metric,
                                const std::string& best_ckpt,
                                const std::string& last_ckpt) const {
  detail::render_manifest(options.run_dir + "/manifest.json", config_,
                          to_string(options.task), status, start_iter, max_iters,
                          iterations_done, best_metric, best_ckpt, last_ckpt);
}

}  // namespace tap
