#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tap/autograd.hpp"
#include "tap/run_config.hpp"
#include "tap/sample.hpp"
#include "tap/tokenize.hpp"

namespace tap {

// Named trainable parameters in registration order. Initialization draws are
// keyed by (seed, name), so parameter values do not depend on creation order.
template <typename S>
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed) : seed_(seed) {}

  enum class Init { TruncNormal, Zero, One };

  ag::VarPtr<S> create(const std::string& name, int rows, int cols, Init init) {
    if (index_.count(name)) throw std::logic_error("param exists: " + name);
    ag::Mat<S> value(rows, cols);
    fill(value, name, init);
    auto p = ag::make_param<S>(std::move(value));
    index_[name] = entries_.size();
    entries_.emplace_back(name, p);
    return p;
  }

  void reinit(const std::string& name, std::uint64_t salt) {
    auto& p = at(name);
    ag::Mat<S> value(p->value.rows(), p->value.cols());
    fill(value, name + "#" + std::to_string(salt), init_of_.at(name));
    p->value = std::move(value);
    p->zero_grad();
  }

  ag::VarPtr<S>& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("no param: " + name);
    return entries_[it->second].second;
  }

  const std::vector<std::pair<std::string, ag::VarPtr<S>>>& entries() const {
    return entries_;
  }

  std::size_t count_scalars() const {
    std::size_t n = 0;
    for (const auto& [name, p] : entries_) n += static_cast<std::size_t>(p->value.size());
    return n;
  }

  void zero_grads() {
    for (auto& [name, p] : entries_) p->zero_grad();
  }

 private:
  void fill(ag::Mat<S>& value, const std::string& key, Init init) {
    init_of_.emplace(key.substr(0, key.find('#')), init);
    switch (init) {
      case Init::Zero:
        value.setZero();
        return;
      case Init::One:
        value.setOnes();
        return;
      case Init::TruncNormal: {
        auto rng = derive_rng(seed_, "param_init", fnv1a64(key));
        for (Eigen::Index j = 0; j < value.cols(); ++j) {
          for (Eigen::Index i = 0; i < value.rows(); ++i) {
            double z;
            do {
              z = normal_double(rng);
            } while (std::abs(z) > 2.0);
            value(i, j) = static_cast<S>(0.02 * z);
          }
        }
        return;
      }
    }
  }

  std::uint64_t seed_;
  std::vector<std::pair<std::string, ag::VarPtr<S>>> entries_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, Init> init_of_;
};

// What fed a decode slot: the begin marker, a fixed-vocabulary answer token,
// or a copied scene-text region.
struct DecodeInput {
  enum class Kind { Begin, VocabToken, SceneTextCopy };
  Kind kind = Kind::Begin;
  int index = 0;  // vocab id or region index

  static DecodeInput begin() { return {Kind::Begin, 0}; }
  static DecodeInput vocab(int id) { return {Kind::VocabToken, id}; }
  static DecodeInput copy(int region) { return {Kind::SceneTextCopy, region}; }
};

// A sample lowered to model inputs.
template <typename S>
struct EncodedInput {
  std::vector<int> token_ids;
  std::vector<int> token_positions;
  std::vector<int> token_segments;
  ag::Mat<S> object_visual;       // M x visual_dim
  ag::Mat<S> object_boxes;        // M x 4
  ag::Mat<S> scene_text_features; // N x (visual_dim + wordvec_dim + phoc)
  ag::Mat<S> scene_text_boxes;    // N x 4
  std::vector<DecodeInput> decode;  // at least the begin slot
};

template <typename S>
EncodedInput<S> encode_sample(const Sample& sample, const Vocabulary& vocab,
                              int visual_dim, int wordvec_dim) {
  EncodedInput<S> in;
  const auto& text = sample.extended_text;
  in.token_ids.reserve(static_cast<size_t>(text.size()));
  for (int pos = 0; pos < text.size(); ++pos) {
    const auto& token = text.tokens[static_cast<size_t>(pos)];
    in.token_ids.push_back(vocab.id(token.text));
    in.token_positions.push_back(pos);
    in.token_segments.push_back(static_cast<int>(token.segment));
  }

  const int object_count = static_cast<int>(sample.objects.size());
  if (object_count > 0 &&
      static_cast<int>(sample.objects[0].visual.size()) != visual_dim) {
    throw std::invalid_argument("encode_sample: object feature dim mismatch");
  }
  if (!sample.scene_text.empty() &&
      (static_cast<int>(sample.scene_text[0].visual.size()) != visual_dim ||
       static_cast<int>(sample.scene_text[0].word_vec.size()) != wordvec_dim)) {
    throw std::invalid_argument("encode_sample: scene-text feature dim mismatch");
  }
  in.object_visual.resize(object_count, visual_dim);
  in.object_boxes.resize(object_count, 4);
  for (int i = 0; i < object_count; ++i) {
    const auto& o = sample.objects[static_cast<size_t>(i)];
    in.object_visual.row(i) = o.visual.cast<S>().transpose();
    in.object_boxes.row(i) << static_cast<S>(o.box.x1), static_cast<S>(o.box.y1),
        static_cast<S>(o.box.x2), static_cast<S>(o.box.y2);
  }

  const int text_count = static_cast<int>(sample.scene_text.size());
  in.scene_text_features.resize(text_count, visual_dim + wordvec_dim + kPhocDim);
  in.scene_text_boxes.resize(text_count, 4);
  for (int i = 0; i < text_count; ++i) {
    const auto& r = sample.scene_text[static_cast<size_t>(i)];
    in.scene_text_features.block(i, 0, 1, visual_dim) = r.visual.cast<S>().transpose();
    in.scene_text_features.block(i, visual_dim, 1, wordvec_dim) =
        r.word_vec.cast<S>().transpose();
    for (int d = 0; d < kPhocDim; ++d) {
      in.scene_text_features(i, visual_dim + wordvec_dim + d) =
          static_cast<S>(r.phoc[static_cast<size_t>(d)]);
    }
    in.scene_text_boxes.row(i) << static_cast<S>(r.box.x1), static_cast<S>(r.box.y1),
        static_cast<S>(r.box.x2), static_cast<S>(r.box.y2);
  }

  in.decode.push_back(DecodeInput::begin());
  return in;
}

// The fusion transformer plus its task heads. One instance owns the
// parameters; forward() records a fresh graph per sample, sized to that
// sample's regions (no padding anywhere).
template <typename S>
class FusionModel {
 public:
  FusionModel(const ModelConfig& config, int vocab_size, int answer_vocab_size,
              int visual_dim, int wordvec_dim, std::uint64_t seed)
      : config_(config),
        vocab_size_(vocab_size),
        answer_vocab_size_(answer_vocab_size),
        visual_dim_(visual_dim),
        wordvec_dim_(wordvec_dim),
        params_(seed) {
    config_.validate();
    if (vocab_size_ <= Vocabulary::kReservedCount) {
      throw std::invalid_argument("model: text vocabulary is empty");
    }
    if (answer_vocab_size_ < Vocabulary::kReservedCount) {
      throw std::invalid_argument("model: answer vocabulary too small");
    }
    build_params();
  }

  const ModelConfig& config() const { return config_; }
  int vocab_size() const { return vocab_size_; }
  int answer_vocab_size() const { return answer_vocab_size_; }
  int visual_dim() const { return visual_dim_; }
  int wordvec_dim() const { return wordvec_dim_; }
  ParamStore<S>& params() { return params_; }
  const ParamStore<S>& params() const { return params_; }

  struct Forward {
    ag::VarPtr<S> fused;  // (K + M + N + T) x hidden
    int question_rows = 0;     // K: extended-text rows
    int object_rows = 0;       // M
    int scene_text_rows = 0;   // N
    int decode_rows = 0;       // T
    ag::VarPtr<S> scene_text_embed;  // N x hidden input embedding (copy source)
    // Fusion-stack attention maps, [layer][head], each (K+M+N+T)^2,
    // recorded when requested.
    std::vector<std::vector<ag::Mat<S>>> attention;

    int entity_rows() const { return question_rows + object_rows + scene_text_rows; }
    int text_offset() const { return 0; }
    int object_offset() const { return question_rows; }
    int scene_text_offset() const { return question_rows + object_rows; }
    int decode_offset() const { return entity_rows(); }
  };

  Forward forward(ag::Graph<S>& g, const EncodedInput<S>& in, bool training,
                  std::mt19937_64* dropout_rng, bool collect_attention = false) {
    Forward f;
    f.question_rows = static_cast<int>(in.token_ids.size());
    f.object_rows = static_cast<int>(in.object_visual.rows());
    f.scene_text_rows = static_cast<int>(in.scene_text_features.rows());
    f.decode_rows = static_cast<int>(in.decode.size());
    if (f.decode_rows < 1) throw std::invalid_argument("forward: need a begin slot");
    if (f.decode_rows > config_.max_decode_steps) {
      throw std::invalid_argument("forward: decode slots exceed max_decode_steps");
    }

    auto text = embed_text(g, in, training, dropout_rng);
    for (int l = 0; l < config_.text_layers; ++l) {
      if (f.question_rows == 0) break;
      text = transformer_layer(g, text, nullptr, "text_stack." + std::to_string(l),
                               training, dropout_rng, nullptr);
      check_finite(text, "text_stack", l);
    }

    auto objects = embed_objects(g, in, training, dropout_rng);
    auto scene_text_full = embed_scene_text(g, in);
    f.scene_text_embed = scene_text_full;
    auto scene_text = g.dropout(scene_text_full, config_.dropout, training, dropout_rng);
    auto decode = embed_decode(g, in, scene_text_full, training, dropout_rng);

    std::vector<ag::VarPtr<S>> blocks;
    if (f.question_rows > 0) blocks.push_back(text);
    if (f.object_rows > 0) blocks.push_back(objects);
    if (f.scene_text_rows > 0) blocks.push_back(scene_text);
    blocks.push_back(decode);
    auto x = blocks.size() == 1 ? blocks[0] : g.concat_rows(blocks);

    const ag::Mat<S> mask = fusion_mask(f);
    for (int l = 0; l < config_.mm_layers; ++l) {
      x = transformer_layer(g, x, &mask, "fusion_stack." + std::to_string(l), training,
                            dropout_rng, collect_attention ? &f.attention : nullptr);
      check_finite(x, "fusion_stack", l);
    }
    f.fused = x;
    return f;
  }

  // Logits over the text vocabulary for the given extended-text positions.
  // The output projection is tied to the word-embedding table.
  ag::VarPtr<S> masked_token_logits(ag::Graph<S>& g, const Forward& f,
                                    const std::vector<int>& positions) {
    for (int p : positions) {
      if (p < 0 || p >= f.question_rows) {
        throw std::out_of_range("masked_token_logits: position outside text rows");
      }
    }
    auto rows = g.gather_rows(f.fused, positions);
    auto h1 = g.gelu(g.add_rowvec(g.matmul(rows, params_.at("masked_token.dense.weight")),
                                  params_.at("masked_token.dense.bias")));
    return g.add_rowvec(g.matmul_nt(h1, params_.at("embed.word")),
                        params_.at("masked_token.out_bias"));
  }

  // Single logit scoring text-image agreement, read at the first decode slot.
  ag::VarPtr<S> contrastive_logit(ag::Graph<S>& g, const Forward& f) {
    auto row = g.slice_rows(f.fused, f.decode_offset(), 1);
    auto h1 = g.gelu(g.add_rowvec(g.matmul(row, params_.at("contrastive.dense.weight")),
                                  params_.at("contrastive.dense.bias")));
    return g.add_rowvec(g.matmul(h1, params_.at("contrastive.out.weight")),
                        params_.at("contrastive.out.bias"));
  }

  // Relative-position logits for one (object, scene text) pair.
  ag::VarPtr<S> region_logits(ag::Graph<S>& g, const Forward& f, int object_index,
                              int scene_text_index) {
    if (object_index < 0 || object_index >= f.object_rows ||
        scene_text_index < 0 || scene_text_index >= f.scene_text_rows) {
      throw std::out_of_range("region_logits: region index out of range");
    }
    auto obj = g.slice_rows(f.fused, f.object_offset() + object_index, 1);
    auto text = g.slice_rows(f.fused, f.scene_text_offset() + scene_text_index, 1);
    auto pair = g.concat_cols({obj, text});
    auto h1 = g.gelu(g.add_rowvec(g.matmul(pair, params_.at("region.dense.weight")),
                                  params_.at("region.dense.bias")));
    return g.add_rowvec(g.matmul(h1, params_.at("region.out.weight")),
                        params_.at("region.out.bias"));
  }

  // Per-step scores over [answer vocabulary | scene-text regions]: the fixed
  // part reuses the answer-classifier rows, the copy part is a bilinear match
  // between decode slots and fused scene-text rows.
  ag::VarPtr<S> decode_scores(ag::Graph<S>& g, const Forward& f) {
    auto slots = g.slice_rows(f.fused, f.decode_offset(), f.decode_rows);
    auto vocab_scores =
        g.add_rowvec(g.matmul_nt(slots, params_.at("answer_classifier.weight")),
                     params_.at("answer_classifier.bias"));
    if (f.scene_text_rows == 0) return vocab_scores;
    auto q = g.add_rowvec(g.matmul(slots, params_.at("pointer.query.weight")),
                          params_.at("pointer.query.bias"));
    auto fused_text = g.slice_rows(f.fused, f.scene_text_offset(), f.scene_text_rows);
    auto k = g.add_rowvec(g.matmul(fused_text, params_.at("pointer.key.weight")),
                          params_.at("pointer.key.bias"));
    auto copy_scores =
        g.scale(g.matmul_nt(q, k), S(1) / std::sqrt(static_cast<S>(config_.hidden)));
    return g.concat_cols({vocab_scores, copy_scores});
  }

  // Re-draws the answer-emission parameters (classifier + pointer); used when
  // fine-tuning starts its answer head fresh on top of pre-trained fusion.
  void reinit_decoder(std::uint64_t salt) {
    for (const char* name :
         {"answer_classifier.weight", "answer_classifier.bias", "pointer.query.weight",
          "pointer.query.bias", "pointer.key.weight", "pointer.key.bias"}) {
      params_.reinit(name, salt);
    }
  }

 private:
  void check_finite(const ag::VarPtr<S>& x, const char* stack, int layer) const {
    if (!x->value.allFinite()) {
      throw std::runtime_error("numeric divergence at " + std::string(stack) +
                               " layer " + std::to_string(layer));
    }
  }

  void build_params() {
    using Init = typename ParamStore<S>::Init;
    const int h = config_.hidden;
    auto dense = [&](const std::string& name, int in, int out) {
      params_.create(name + ".weight", in, out, Init::TruncNormal);
      params_.create(name + ".bias", 1, out, Init::Zero);
    };
    auto norm = [&](const std::string& name) {
      params_.create(name + ".gain", 1, h, Init::One);
      params_.create(name + ".bias", 1, h, Init::Zero);
    };

    params_.create("embed.word", vocab_size_, h, Init::TruncNormal);
    params_.create("embed.position", config_.max_positions, h, Init::TruncNormal);
    params_.create("embed.segment", kNumSegments, h, Init::TruncNormal);
    norm("embed.text_ln");

    dense("embed.object.visual", visual_dim_, h);
    norm("embed.object.visual_ln");
    dense("embed.object.box", 4, h);
    norm("embed.object.box_ln");

    dense("embed.scene_text.feature", visual_dim_ + wordvec_dim_ + kPhocDim, h);
    norm("embed.scene_text.feature_ln");
    dense("embed.scene_text.box", 4, h);
    norm("embed.scene_text.box_ln");

    params_.create("decode.begin", 1, h, Init::TruncNormal);
    params_.create("decode.step", config_.max_decode_steps, h, Init::TruncNormal);
    norm("decode.ln");

    auto stack = [&](const std::string& prefix, int layers) {
      for (int l = 0; l < layers; ++l) {
        const std::string base = prefix + "." + std::to_string(l);
        dense(base + ".attn.q", h, h);
        dense(base + ".attn.k", h, h);
        dense(base + ".attn.v", h, h);
        dense(base + ".attn.out", h, h);
        norm(base + ".attn_ln");
        dense(base + ".ffn.in", h, h * config_.ffn_mult);
        dense(base + ".ffn.out", h * config_.ffn_mult, h);
        norm(base + ".ffn_ln");
      }
    };
    stack("text_stack", config_.text_layers);
    stack("fusion_stack", config_.mm_layers);

    dense("masked_token.dense", h, h);
    params_.create("masked_token.out_bias", 1, vocab_size_, Init::Zero);
    dense("contrastive.dense", h, h);
    dense("contrastive.out", h, 1);
    dense("region.dense", 2 * h, h);
    dense("region.out", h, config_.region_classes);

    params_.create("answer_classifier.weight", answer_vocab_size_, h, Init::TruncNormal);
    params_.create("answer_classifier.bias", 1, answer_vocab_size_, Init::Zero);
    dense("pointer.query", h, h);
    dense("pointer.key", h, h);
  }

  ag::VarPtr<S> embed_text(ag::Graph<S>& g, const EncodedInput<S>& in, bool training,
                           std::mt19937_64* rng) {
    if (in.token_ids.empty()) return g.input(ag::Mat<S>(0, config_.hidden));
    for (int pos : in.token_positions) {
      if (pos >= config_.max_positions) {
        throw std::out_of_range("embed_text: position beyond table");
      }
    }
    auto words = g.gather_rows(params_.at("embed.word"), in.token_ids);
    auto positions = g.gather_rows(params_.at("embed.position"), in.token_positions);
    auto segments = g.gather_rows(params_.at("embed.segment"), in.token_segments);
    auto sum = g.add(g.add(words, positions), segments);
    auto normed = g.layer_norm(sum, params_.at("embed.text_ln.gain"),
                               params_.at("embed.text_ln.bias"));
    return g.dropout(normed, config_.dropout, training, rng);
  }

  ag::VarPtr<S> embed_objects(ag::Graph<S>& g, const EncodedInput<S>& in, bool training,
                              std::mt19937_64* rng) {
    auto visual = g.layer_norm(
        g.add_rowvec(g.matmul(g.input(in.object_visual),
                              params_.at("embed.object.visual.weight")),
                     params_.at("embed.object.visual.bias")),
        params_.at("embed.object.visual_ln.gain"), params_.at("embed.object.visual_ln.bias"));
    auto box = g.layer_norm(
        g.add_rowvec(g.matmul(g.input(in.object_boxes),
                              params_.at("embed.object.box.weight")),
                     params_.at("embed.object.box.bias")),
        params_.at("embed.object.box_ln.gain"), params_.at("embed.object.box_ln.bias"));
    return g.dropout(g.add(visual, box), config_.dropout, training, rng);
  }

  // Pre-dropout embedding; doubles as the copy-source representation for
  // decode inputs.
  ag::VarPtr<S> embed_scene_text(ag::Graph<S>& g, const EncodedInput<S>& in) {
    auto feature = g.layer_norm(
        g.add_rowvec(g.matmul(g.input(in.scene_text_features),
                              params_.at("embed.scene_text.feature.weight")),
                     params_.at("embed.scene_text.feature.bias")),
        params_.at("embed.scene_text.feature_ln.gain"),
        params_.at("embed.scene_text.feature_ln.bias"));
    auto box = g.layer_norm(
        g.add_rowvec(g.matmul(g.input(in.scene_text_boxes),
                              params_.at("embed.scene_text.box.weight")),
                     params_.at("embed.scene_text.box.bias")),
        params_.at("embed.scene_text.box_ln.gain"),
        params_.at("embed.scene_text.box_ln.bias"));
    return g.add(feature, box);
  }

  ag::VarPtr<S> embed_decode(ag::Graph<S>& g, const EncodedInput<S>& in,
                             const ag::VarPtr<S>& scene_text_embed, bool training,
                             std::mt19937_64* rng) {
    std::vector<ag::VarPtr<S>> rows;
    rows.reserve(in.decode.size());
    for (size_t t = 0; t < in.decode.size(); ++t) {
      const DecodeInput& d = in.decode[t];
      ag::VarPtr<S> base;
      switch (d.kind) {
        case DecodeInput::Kind::Begin:
          base = params_.at("decode.begin");
          break;
        case DecodeInput::Kind::VocabToken:
          base = g.gather_rows(params_.at("answer_classifier.weight"), {d.index});
          break;
        case DecodeInput::Kind::SceneTextCopy:
          base = g.slice_rows(scene_text_embed, d.index, 1);
          break;
      }
      auto step = g.gather_rows(params_.at("decode.step"), {static_cast<int>(t)});
      rows.push_back(g.add(base, step));
    }
    auto stacked = rows.size() == 1 ? rows[0] : g.concat_rows(rows);
    auto normed = g.layer_norm(stacked, params_.at("decode.ln.gain"),
                               params_.at("decode.ln.bias"));
    return g.dropout(normed, config_.dropout, training, rng);
  }

  // Entity rows attend to all entity rows; decode slot t additionally sees
  // slots 0..t. No entity ever attends forward into decode slots, so emitted
  // answers cannot leak back into the entities.
  ag::Mat<S> fusion_mask(const Forward& f) const {
    const int entities = f.entity_rows();
    const int total = entities + f.decode_rows;
    const S blocked = -std::numeric_limits<S>::infinity();
    ag::Mat<S> mask = ag::Mat<S>::Zero(total, total);
    for (int r = 0; r < total; ++r) {
      for (int c = entities; c < total; ++c) {
        const bool allowed = r >= entities && c <= r;
        if (!allowed) mask(r, c) = blocked;
      }
    }
    return mask;
  }

  ag::VarPtr<S> transformer_layer(ag::Graph<S>& g, const ag::VarPtr<S>& x,
                                  const ag::Mat<S>* mask, const std::string& base,
                                  bool training, std::mt19937_64* rng,
                                  std::vector<std::vector<ag::Mat<S>>>* attention_sink) {
    const int h = config_.hidden;
    const int heads = config_.heads;
    const int dh = h / heads;
    auto q = g.add_rowvec(g.matmul(x, params_.at(base + ".attn.q.weight")),
                          params_.at(base + ".attn.q.bias"));
    auto k = g.add_rowvec(g.matmul(x, params_.at(base + ".attn.k.weight")),
                          params_.at(base + ".attn.k.bias"));
    auto v = g.add_rowvec(g.matmul(x, params_.at(base + ".attn.v.weight")),
                          params_.at(base + ".attn.v.bias"));

    std::vector<ag::VarPtr<S>> contexts;
    contexts.reserve(static_cast<size_t>(heads));
    std::vector<ag::Mat<S>> layer_maps;
    for (int head = 0; head < heads; ++head) {
      auto qh = g.slice_cols(q, head * dh, dh);
      auto kh = g.slice_cols(k, head * dh, dh);
      auto vh = g.slice_cols(v, head * dh, dh);
      auto scores = g.scale(g.matmul_nt(qh, kh), S(1) / std::sqrt(static_cast<S>(dh)));
      auto probs = g.softmax_rows(scores, mask);
      if (attention_sink) layer_maps.push_back(probs->value);
      contexts.push_back(g.matmul(probs, vh));
    }
    if (attention_sink) attention_sink->push_back(std::move(layer_maps));

    auto context = contexts.size() == 1 ? contexts[0] : g.concat_cols(contexts);
    auto projected = g.add_rowvec(g.matmul(context, params_.at(base + ".attn.out.weight")),
                                  params_.at(base + ".attn.out.bias"));
    projected = g.dropout(projected, config_.dropout, training, rng);
    auto attn_out = g.layer_norm(g.add(x, projected), params_.at(base + ".attn_ln.gain"),
                                 params_.at(base + ".attn_ln.bias"));

    auto inner = g.gelu(g.add_rowvec(g.matmul(attn_out, params_.at(base + ".ffn.in.weight")),
                                     params_.at(base + ".ffn.in.bias")));
    auto outer = g.add_rowvec(g.matmul(inner, params_.at(base + ".ffn.out.weight")),
                              params_.at(base + ".ffn.out.bias"));
    outer = g.dropout(outer, config_.dropout, training, rng);
    return g.layer_norm(g.add(attn_out, outer), params_.at(base + ".ffn_ln.gain"),
                        params_.at(base + ".ffn_ln.bias"));
  }

  ModelConfig config_;
  int vocab_size_;
  int answer_vocab_size_;
  int visual_dim_;
  int wordvec_dim_;
  ParamStore<S> params_;
};

// Teacher-forcing supervision for answer decoding.
template <typename S>
struct DecodeSupervision {
  std::vector<DecodeInput> inputs;  // begin + gold prefix
  ag::Mat<S> targets;               // steps x (answer_vocab + regions), multi-hot
  int steps = 0;                    // supervised rows (gold tokens + end)
};

// Picks the consensus answer: most frequent, ties to the lexicographically
// smallest (counted over raw strings).
inline std::string consensus_answer(const std::vector<std::string>& answers) {
  if (answers.empty()) throw std::invalid_argument("consensus_answer: no answers");
  std::map<std::string, int> counts;
  for (const auto& a : answers) ++counts[a];
  std::string best;
  int best_count = 0;
  for (const auto& [answer, count] : counts) {
    if (count > best_count) {
      best = answer;
      best_count = count;
    }
  }
  return best;
}

// Builds decode inputs/targets for a gold answer string. A token that matches
// a scene-text word is supervised at every matching copy slot as well as at
// its vocabulary slot (if any); a token absent from both maps to the unknown
// id. The previous-token input prefers the copy embedding, as copied words
// carry richer features than vocabulary rows.
template <typename S>
DecodeSupervision<S> build_decode_supervision(const Sample& sample,
                                              const std::string& answer,
                                              const Vocabulary& answer_vocab,
                                              int max_steps) {
  DecodeSupervision<S> sup;
  std::vector<std::string> tokens = tokenize(answer);
  const int regions = static_cast<int>(sample.scene_text.size());
  const int width = answer_vocab.size() + regions;
  const int gold = std::min(static_cast<int>(tokens.size()), max_steps - 1);
  sup.steps = gold + 1;
  sup.targets = ag::Mat<S>::Zero(sup.steps, width);
  sup.inputs.push_back(DecodeInput::begin());

  for (int t = 0; t < gold; ++t) {
    const std::string& token = tokens[static_cast<size_t>(t)];
    std::vector<int> copy_slots;
    for (int r = 0; r < regions; ++r) {
      if (normalize_token(sample.scene_text[static_cast<size_t>(r)].word) == token) {
        copy_slots.push_back(r);
      }
    }
    const bool in_vocab = answer_vocab.contains(token);
    if (in_vocab) sup.targets(t, answer_vocab.id(token)) = S(1);
    for (int r : copy_slots) sup.targets(t, answer_vocab.size() + r) = S(1);
    if (!in_vocab && copy_slots.empty()) {
      sup.targets(t, Vocabulary::kUnknownId) = S(1);
    }

    // Input for the next step mirrors the target preference order.
    if (!copy_slots.empty()) {
      sup.inputs.push_back(DecodeInput::copy(copy_slots.front()));
    } else if (in_vocab) {
      sup.inputs.push_back(DecodeInput::vocab(answer_vocab.id(token)));
    } else {
      sup.inputs.push_back(DecodeInput::vocab(Vocabulary::kUnknownId));
    }
  }
  sup.targets(gold, Vocabulary::kEndId) = S(1);
  return sup;
}

// Greedy decoding. Runs one forward per emitted token; stops at the end
// marker or after max_steps tokens. Returns the emitted words joined by
// single spaces.
template <typename S>
std::string decode_answer(FusionModel<S>& model, const Sample& sample,
                          const Vocabulary& vocab, const Vocabulary& answer_vocab,
                          int max_steps) {
  EncodedInput<S> in =
      encode_sample<S>(sample, vocab, model.visual_dim(), model.wordvec_dim());
  std::vector<std::string> words;
  for (int step = 0; step < max_steps; ++step) {
    ag::Graph<S> g;
    auto f = model.forward(g, in, /*training=*/false, nullptr);
    auto scores = model.decode_scores(g, f);
    const auto row = scores->value.row(step);
    const int width = static_cast<int>(row.size());
    int best = -1;
    S best_score = S(0);
    for (int j = 0; j < width; ++j) {
      // The pad/mask/begin/unknown slots are never valid emissions.
      if (j < Vocabulary::kReservedCount && j != Vocabulary::kEndId) continue;
      if (best < 0 || row[j] > best_score) {
        best = j;
        best_score = row[j];
      }
    }
    if (best == Vocabulary::kEndId) break;
    if (best < answer_vocab.size()) {
      words.push_back(answer_vocab.token(best));
      in.decode.push_back(DecodeInput::vocab(best));
    } else {
      const int region = best - answer_vocab.size();
      words.push_back(normalize_token(
          sample.scene_text[static_cast<size_t>(region)].word));
      in.decode.push_back(DecodeInput::copy(region));
    }
  }
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace tap
