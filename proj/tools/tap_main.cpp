// Command-line entry point: corpus building, training, evaluation, analysis.
//
// Exit codes: 0 success, 1 runtime failure, 2 input/config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "tap/checkpoint.hpp"
#include "tap/coref.hpp"
#include "tap/corpus.hpp"
#include "tap/metrics.hpp"
#include "tap/model.hpp"
#include "tap/run_config.hpp"
#include "tap/run_dir.hpp"
#include "tap/sample.hpp"
#include "tap/synth.hpp"
#include "tap/tokenize.hpp"
#include "tap/trainer.hpp"

namespace tap {
namespace {

using nlohmann::json;

// --------------------------------------------------------------------------
// Shared plumbing

int resolve_workers(int flag_value) {
  int workers = flag_value;
  if (workers <= 0) {
    if (const char* env = std::getenv("TAP_WORKERS")) workers = std::atoi(env);
  }
  if (workers == 0) workers = 1;
  if (workers < 1) throw ConfigError("workers must be at least 1");
  return workers;
}

AnswerMode answer_mode_from(const std::string& mode) {
  if (mode == "qa") return AnswerMode::QuestionAnswering;
  if (mode == "caption") return AnswerMode::Captioning;
  throw ConfigError("unknown mode: " + mode + " (expected qa or caption)");
}

RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) {
    RunConfig config;
    config.validate();
    return config;
  }
  return RunConfig::load(path);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

FilterRules load_filter_rules(const std::string& path) {
  FilterRules rules;
  if (path.empty()) return rules;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read rules file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("rules file " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("rules file must hold a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "watermark_patterns") {
      rules.watermark_patterns = value.get<std::vector<std::string>>();
    } else if (key == "tiny_height") {
      rules.tiny_height = value.get<double>();
    } else {
      throw ConfigError("rules file: unknown key " + key);
    }
  }
  return rules;
}

// Copies checkpoint tensors into a freshly built model, strictly by name.
template <typename S>
void load_model_parameters(FusionModel<S>& model, const Checkpoint& ckpt) {
  for (const auto& tensor : ckpt.tensors) {
    if (tensor.name.rfind("adam.", 0) == 0) continue;
    ag::VarPtr<S> p;
    try {
      p = model.params().at(tensor.name);
    } catch (const std::out_of_range&) {
      throw ConfigError("checkpoint holds unknown parameter: " + tensor.name);
    }
    if (p->value.rows() != tensor.values.rows() || p->value.cols() != tensor.values.cols()) {
      throw ConfigError("checkpoint parameter shape mismatch: " + tensor.name);
    }
    p->value = tensor.values.cast<S>();
  }
}

struct PredictionRecord {
  std::string sample_id;
  std::string prediction;
};

std::vector<PredictionRecord> read_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read predictions file: " + path);
  std::vector<PredictionRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!row.contains("sample_id") || !row.contains("prediction")) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": record needs sample_id and prediction");
    }
    records.push_back({row["sample_id"].get<std::string>(),
                       row["prediction"].get<std::string>()});
  }
  return records;
}

// Grayscale image of one attention grid, peak-normalized.
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P2\n" << m.cols() << ' ' << m.rows() << "\n255\n";
  const double peak = std::max(m.maxCoeff(), 1e-12);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ' ';
      out << static_cast<int>(std::lround(255.0 * std::max(m(r, c), 0.0) / peak));
    }
    out << '\n';
  }
}

// --------------------------------------------------------------------------
// synth-corpus

struct SynthArgs {
  std::uint64_t seed = 1;
  int count = 100;
  std::string task = "qa";
  std::string out;
  bool raw = false;
};

int cmd_synth_corpus(const SynthArgs& a) {
  if (a.count <= 0) throw ConfigError("count must be positive");
  if (a.raw) {
    const auto records = synth_raw_records(a.seed, a.count);
    save_raw_records(records, a.out);
    std::cout << json{{"records", records.size()}, {"path", a.out}}.dump(2) << '\n';
    return 0;
  }
  const SynthTask task = (a.task == "caption") ? SynthTask::Captioning
                         : (a.task == "qa")
                             ? SynthTask::QuestionAnswering
                             : throw ConfigError("unknown task: " + a.task);
  FeatureConfig features;
  const auto samples = synth_corpus(a.seed, a.count, task, features);
  save_dataset(samples, a.out);
  std::cout << json{{"samples", samples.size()}, {"task", a.task}, {"path", a.out}}.dump(2)
            << '\n';
  return 0;
}

// --------------------------------------------------------------------------
// build-corpus

struct BuildArgs {
  std::string records;
  std::string rules;
  std::string out;
  std::string stats;
};

int cmd_build_corpus(const BuildArgs& a) {
  const FilterRules rules = load_filter_rules(a.rules);
  FeatureConfig features;
  CorpusBuildResult result;
  try {
    result = build_corpus(a.records, rules, features);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("records file: ") + e.what());
  }
  if (!a.out.empty()) save_dataset(result.samples, a.out);
  if (!a.stats.empty()) {
    write_text_file(a.stats, stats_to_json(corpus_stats(result.samples)) + "\n");
  }
  json reasons;
  for (const auto& [reason, count] : result.reason_counts) {
    reasons[to_string(reason)] = count;
  }
  std::cout << json{{"kept", result.samples.size()},
                    {"reasons", reasons},
                    {"malformed", result.malformed}}
                   .dump(2)
            << '\n';
  return 0;
}

// --------------------------------------------------------------------------
// pretrain / finetune / joint-train

struct TrainArgs {
  std::string config_path;
  std::string train_path;
  std::string eval_path;
  std::string run_dir;
  std::string init_checkpoint;
  std::string resume_checkpoint;
  std::string mode = "qa";
  std::string precision;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool force = false;
  bool keep_decoder = false;
  int iters = 0;
};

template <typename S>
int run_train_typed(const RunConfig& config, std::vector<Sample> train,
                    std::vector<Sample> eval, const TrainOptions& options) {
  Vocabulary vocab = build_text_vocabulary(train);
  Vocabulary answer_vocab = build_answer_vocabulary(train);
  Trainer<S> trainer(config, std::move(train), std::move(eval), std::move(vocab),
                     std::move(answer_vocab));
  const TrainOutcome outcome = trainer.run(options);
  json summary{{"task", to_string(options.task)},
               {"iterations", outcome.iterations},
               {"final_metric", outcome.final_metric}};
  if (outcome.best_metric >= 0.0) summary["best_metric"] = outcome.best_metric;
  if (!outcome.best_checkpoint.empty()) summary["best_checkpoint"] = outcome.best_checkpoint;
  if (!outcome.last_checkpoint.empty()) summary["last_checkpoint"] = outcome.last_checkpoint;
  if (!outcome.trace.total.empty()) summary["final_loss"] = outcome.trace.total.back();
  std::cout << summary.dump(2) << '\n';
  return 0;
}

int cmd_train(const TrainArgs& a, TrainTask task) {
  RunConfig config = load_config_or_default(a.config_path);
  if (a.seed_set) config.training.seed = a.seed;
  if (!a.precision.empty()) config.training.precision = a.precision;
  config.validate();

  auto train = load_dataset(a.train_path, config.features);
  std::vector<Sample> eval;
  if (!a.eval_path.empty()) eval = load_dataset(a.eval_path, config.features);

  TrainOptions options;
  options.task = task;
  options.answer_mode = answer_mode_from(a.mode);
  options.init_checkpoint = a.init_checkpoint;
  options.resume_checkpoint = a.resume_checkpoint;
  options.reinit_decoder =
      !a.init_checkpoint.empty() && task != TrainTask::Pretrain && !a.keep_decoder;
  options.max_iters_override = a.iters;

  const auto run_dir = resolve_run_dir(a.run_dir, "");
  if (!run_dir.empty()) options.run_dir = prepare_run_dir(run_dir, a.force).string();

  if (config.training.precision == "float64") {
    return run_train_typed<double>(config, std::move(train), std::move(eval), options);
  }
  return run_train_typed<float>(config, std::move(train), std::move(eval), options);
}

// --------------------------------------------------------------------------
// evaluate

struct EvalArgs {
  std::string dataset;
  std::string checkpoint;
  std::string predictions;
  std::string predictions_out;
  std::string report;
  std::string out;
  std::string mode = "qa";
};

const Sample& sample_by_id(const std::map<std::string, const Sample*>& index,
                           const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw ConfigError("prediction references unknown sample: " + id);
  return *it->second;
}

int score_predictions(const std::vector<Sample>& samples,
                      const std::vector<PredictionRecord>& predictions,
                      const EvalArgs& a) {
  const AnswerMode mode = answer_mode_from(a.mode);
  std::map<std::string, const Sample*> index;
  for (const auto& s : samples) index[s.image_id] = &s;

  json summary{{"mode", a.mode}, {"count", predictions.size()}};
  std::vector<json> lines;
  lines.reserve(predictions.size());

  if (mode == AnswerMode::QuestionAnswering) {
    double acc_sum = 0.0;
    double anls_sum = 0.0;
    for (const auto& p : predictions) {
      const Sample& s = sample_by_id(index, p.sample_id);
      if (!s.answers) throw ConfigError("sample has no reference answers: " + p.sample_id);
      const double acc = vqa_accuracy(p.prediction, *s.answers);
      const double similarity = anls(p.prediction, *s.answers);
      acc_sum += acc;
      anls_sum += similarity;
      lines.push_back({{"sample_id", p.sample_id},
                       {"prediction", p.prediction},
                       {"accuracy", acc},
                       {"anls", similarity}});
    }
    const double n = predictions.empty() ? 1.0 : static_cast<double>(predictions.size());
    summary["accuracy"] = acc_sum / n;
    summary["anls"] = anls_sum / n;
  } else {
    std::vector<CiderInput> corpus;
    corpus.reserve(predictions.size());
    for (const auto& p : predictions) {
      const Sample& s = sample_by_id(index, p.sample_id);
      if (!s.caption) throw ConfigError("sample has no reference caption: " + p.sample_id);
      corpus.push_back({p.prediction, {*s.caption}});
      lines.push_back({{"sample_id", p.sample_id}, {"prediction", p.prediction}});
    }
    summary["cider"] = corpus.empty() ? 0.0 : cider_d(corpus);
  }

  if (!a.report.empty()) {
    std::string text;
    for (const auto& line : lines) text += line.dump() + "\n";
    write_text_file(a.report, text);
    summary["report"] = a.report;
  }
  const std::string rendered = summary.dump(2) + "\n";
  if (!a.out.empty()) write_text_file(a.out, rendered);
  std::cout << rendered;
  return 0;
}

template <typename S>
std::vector<PredictionRecord> model_predictions(const Checkpoint& ckpt,
                                                const CheckpointDescription& desc,
                                                const std::vector<Sample>& samples) {
  Vocabulary vocab = Vocabulary::from_tokens(desc.vocab_tokens);
  Vocabulary answer_vocab = Vocabulary::from_tokens(desc.answer_vocab_tokens);
  FusionModel<S> model(desc.config.model, vocab.size(), answer_vocab.size(),
                       desc.config.features.visual_dim,
                       desc.config.features.word_vector_dim, desc.config.training.seed);
  load_model_parameters(model, ckpt);
  std::vector<PredictionRecord> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back({s.image_id, decode_answer(model, s, vocab, answer_vocab,
                                             desc.config.model.max_decode_steps)});
  }
  return out;
}

int cmd_evaluate(const EvalArgs& a) {
  if (a.checkpoint.empty() == a.predictions.empty()) {
    throw ConfigError("pass exactly one of --checkpoint or --predictions");
  }
  if (!a.predictions.empty()) {
    FeatureConfig features;  // scoring only reads text fields
    const auto samples = load_dataset(a.dataset, features);
    return score_predictions(samples, read_predictions(a.predictions), a);
  }

  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const CheckpointDescription desc = describe_checkpoint(ckpt);
  const auto samples = load_dataset(a.dataset, desc.config.features);
  const auto predictions = (desc.config.training.precision == "float64")
                               ? model_predictions<double>(ckpt, desc, samples)
                               : model_predictions<float>(ckpt, desc, samples);
  if (!a.predictions_out.empty()) {
    std::string text;
    for (const auto& p : predictions) {
      text += json{{"sample_id", p.sample_id}, {"prediction", p.prediction}}.dump() + "\n";
    }
    write_text_file(a.predictions_out, text);
  }
  return score_predictions(samples, predictions, a);
}

// --------------------------------------------------------------------------
// analyze-coref

struct CorefArgs {
  std::string dataset;
  std::string checkpoint;
  std::string config_path;
  std::string out;
  std::string dump_dir;
  int limit = 0;
  std::uint64_t seed = 7;
};

template <typename S>
int run_coref_typed(const RunConfig& config, const Checkpoint* ckpt,
                    const std::vector<Sample>& samples, const Vocabulary& vocab,
                    const Vocabulary& answer_vocab, const CorefArgs& a) {
  FusionModel<S> model(config.model, vocab.size(), answer_vocab.size(),
                       config.features.visual_dim, config.features.word_vector_dim,
                       ckpt ? config.training.seed : a.seed);
  if (ckpt) load_model_parameters(model, *ckpt);

  if (!a.dump_dir.empty()) std::filesystem::create_directories(a.dump_dir);

  CorefAccumulator acc;
  long analyzed = 0;
  for (const auto& sample : samples) {
    if (a.limit > 0 && analyzed >= a.limit) break;
    const auto pairs = find_corresponded_pairs(sample, config.relations);
    EncodedInput<S> in = encode_sample<S>(sample, vocab, config.features.visual_dim,
                                          config.features.word_vector_dim);
    ag::Graph<S> g;
    auto f = model.forward(g, in, /*training=*/false, nullptr, /*collect_attention=*/true);
    AttentionMaps maps(f.attention.size());
    for (size_t layer = 0; layer < f.attention.size(); ++layer) {
      for (const auto& head : f.attention[layer]) {
        maps[layer].push_back(head.template cast<double>());
      }
    }
    RowLayout layout{f.question_rows, f.object_rows, f.scene_text_rows};
    acc.add(maps, layout, pairs);
    if (!a.dump_dir.empty()) {
      for (size_t layer = 0; layer < maps.size(); ++layer) {
        for (size_t head = 0; head < maps[layer].size(); ++head) {
          const auto name = "attn_" + sample.image_id + "_l" + std::to_string(layer) +
                            "h" + std::to_string(head) + ".pgm";
          write_pgm(std::filesystem::path(a.dump_dir) / name, maps[layer][head]);
        }
      }
    }
    ++analyzed;
  }

  json kinds;
  for (int k = 0; k < kNumCorefKinds; ++k) {
    const auto kind = static_cast<CorefKind>(k);
    kinds[to_string(kind)] = {{"pairs", acc.count[k]},
                              {"mean", acc.has(kind) ? acc.mean(kind) : 0.0}};
  }
  const json report{{"samples", analyzed},
                    {"source", ckpt ? "checkpoint" : "random_init"},
                    {"kinds", kinds}};
  const std::string rendered = report.dump(2) + "\n";
  if (!a.out.empty()) write_text_file(a.out, rendered);
  std::cout << rendered;
  return 0;
}

int cmd_analyze_coref(const CorefArgs& a) {
  if (!a.checkpoint.empty()) {
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    const CheckpointDescription desc = describe_checkpoint(ckpt);
    const auto samples = load_dataset(a.dataset, desc.config.features);
    Vocabulary vocab = Vocabulary::from_tokens(desc.vocab_tokens);
    Vocabulary answer_vocab = Vocabulary::from_tokens(desc.answer_vocab_tokens);
    if (desc.config.training.precision == "float64") {
      return run_coref_typed<double>(desc.config, &ckpt, samples, vocab, answer_vocab, a);
    }
    return run_coref_typed<float>(desc.config, &ckpt, samples, vocab, answer_vocab, a);
  }

  const RunConfig config = load_config_or_default(a.config_path);
  const auto samples = load_dataset(a.dataset, config.features);
  Vocabulary vocab = build_text_vocabulary(samples);
  Vocabulary answer_vocab = build_answer_vocabulary(samples);
  if (config.training.precision == "float64") {
    return run_coref_typed<double>(config, nullptr, samples, vocab, answer_vocab, a);
  }
  return run_coref_typed<float>(config, nullptr, samples, vocab, answer_vocab, a);
}

}  // namespace
}  // namespace tap

int main(int argc, char** argv) {
  CLI::App app{"Scene-text VQA/captioning pipeline: corpora, training, evaluation, analysis"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers,
                 "Worker count (or TAP_WORKERS); execution is sequential and results do "
                 "not depend on it")
      ->capture_default_str();

  tap::SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth-corpus", "Generate a synthetic dataset");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--count", synth.count, "Number of images")->capture_default_str();
  synth_cmd->add_option("--task", synth.task, "qa or caption")
      ->capture_default_str()
      ->check(CLI::IsMember({"qa", "caption"}));
  synth_cmd->add_option("--out", synth.out, "Output JSONL path")->required();
  synth_cmd->add_flag("--raw", synth.raw,
                      "Emit raw captioned-image records (corpus-builder input) instead of "
                      "assembled samples");

  tap::BuildArgs build;
  auto* build_cmd =
      app.add_subcommand("build-corpus", "Filter raw captioned-image records into a dataset");
  build_cmd->add_option("--records", build.records, "Raw records JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--rules", build.rules,
                        "Filter rules JSON (watermark_patterns, tiny_height)")
      ->check(CLI::ExistingFile);
  build_cmd->add_option("--out", build.out, "Output dataset JSONL path");
  build_cmd->add_option("--stats", build.stats, "Corpus statistics JSON path");

  tap::TrainArgs train_args[3];
  const char* train_names[3] = {"pretrain", "finetune", "joint-train"};
  const char* train_help[3] = {"Train the fusion model on the self-supervised objectives",
                               "Train the answer decoder from a dataset's supervision",
                               "Alternate the self-supervised and answer objectives"};
  const tap::TrainTask train_tasks[3] = {tap::TrainTask::Pretrain, tap::TrainTask::Answer,
                                         tap::TrainTask::Joint};
  CLI::App* train_cmds[3];
  for (int i = 0; i < 3; ++i) {
    auto& a = train_args[i];
    auto* cmd = app.add_subcommand(train_names[i], train_help[i]);
    train_cmds[i] = cmd;
    cmd->add_option("--config", a.config_path, "Run config JSON (defaults when absent)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--train", a.train_path, "Training dataset JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--eval", a.eval_path, "Eval dataset JSONL (default: tail holdout)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--run-dir", a.run_dir,
                    "Run directory (or TAP_RUN_DIR); nothing is written when unset");
    cmd->add_flag("--force", a.force, "Reuse a non-empty run directory");
    cmd->add_option("--resume", a.resume_checkpoint,
                    "Checkpoint to resume (parameters, optimizer, iteration)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--iters", a.iters, "Override the config's max iterations")
        ->capture_default_str();
    cmd->add_option_function<std::uint64_t>(
           "--seed", [&a](const std::uint64_t& v) { a.seed = v; a.seed_set = true; },
           "Override the config's seed");
    cmd->add_option("--precision", a.precision, "Override the config's precision")
        ->check(CLI::IsMember({"float32", "float64"}));
    if (train_tasks[i] != tap::TrainTask::Pretrain) {
      cmd->add_option("--mode", a.mode, "Answer supervision: qa or caption")
          ->capture_default_str()
          ->check(CLI::IsMember({"qa", "caption"}));
      cmd->add_option("--init-checkpoint", a.init_checkpoint,
                      "Load parameters from a checkpoint, then start fresh")
          ->check(CLI::ExistingFile);
      cmd->add_flag("--keep-decoder", a.keep_decoder,
                    "Keep the loaded answer-head parameters instead of re-drawing them");
    }
  }

  tap::EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against a dataset");
  eval_cmd->add_option("--dataset", eval_args.dataset, "Reference dataset JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint,
                       "Decode predictions from this model checkpoint")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--predictions", eval_args.predictions,
                       "Score this predictions JSONL instead of running a model")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--predictions-out", eval_args.predictions_out,
                       "Write decoded predictions JSONL here (checkpoint mode)");
  eval_cmd->add_option("--report", eval_args.report,
                       "Write a per-sample score report JSONL here");
  eval_cmd->add_option("--out", eval_args.out, "Write the summary JSON here too");
  eval_cmd->add_option("--mode", eval_args.mode, "qa or caption")
      ->capture_default_str()
      ->check(CLI::IsMember({"qa", "caption"}));

  tap::CorefArgs coref;
  auto* coref_cmd = app.add_subcommand(
      "analyze-coref", "Measure attention on corresponded text/region pairs");
  coref_cmd->add_option("--dataset", coref.dataset, "Dataset JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  coref_cmd->add_option("--checkpoint", coref.checkpoint,
                        "Model checkpoint (omit for a randomly initialized model)")
      ->check(CLI::ExistingFile);
  coref_cmd->add_option("--config", coref.config_path,
                        "Run config JSON for the random-init model")
      ->check(CLI::ExistingFile);
  coref_cmd->add_option("--out", coref.out, "Write the report JSON here too");
  coref_cmd->add_option("--dump-attention", coref.dump_dir,
                        "Write per-layer/head attention grids (PGM) into this directory");
  coref_cmd->add_option("--limit", coref.limit, "Analyze at most this many samples (0: all)")
      ->capture_default_str();
  coref_cmd->add_option("--seed", coref.seed, "Seed for the random-init model")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    tap::resolve_workers(workers);  // validated; execution stays sequential
    if (synth_cmd->parsed()) return tap::cmd_synth_corpus(synth);
    if (build_cmd->parsed()) return tap::cmd_build_corpus(build);
    for (int i = 0; i < 3; ++i) {
      if (train_cmds[i]->parsed()) return tap::cmd_train(train_args[i], train_tasks[i]);
    }
    if (eval_cmd->parsed()) return tap::cmd_evaluate(eval_args);
    if (coref_cmd->parsed()) return tap::cmd_analyze_coref(coref);
    std::cerr << "no command\n";
    return 2;
  } catch (const tap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
