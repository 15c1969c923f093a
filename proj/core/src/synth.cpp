#include "tap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tap/rng.hpp"
#include "tap/word_vectors.hpp"

namespace tap {

namespace {

const std::vector<std::string>& object_labels() {
  static const std::vector<std::string> kLabels = {
      "sign", "box",    "car",   "door",  "shirt",  "cup",   "truck", "bag",
      "wall", "book",   "screen", "board", "bottle", "train", "jacket", "poster",
  };
  return kLabels;
}

const std::vector<std::string>& scene_lexicon() {
  static const std::vector<std::string> kWords = {
      "alpha",  "bravo",   "charlie", "delta",   "echo",    "foxtrot", "golf",
      "hotel",  "india",   "juliet",  "kilo",    "lima",    "mike",    "november",
      "oscar",  "papa",    "quebec",  "romeo",   "sierra",  "tango",   "uniform",
      "victor", "whiskey", "xray",    "yankee",  "zulu",    "amber",   "cobalt",
      "crimson", "indigo", "maroon",  "ochre",   "sepia",   "teal",    "umber",
      "violet", "fuchsia", "scarlet", "cyan",    "magenta",
  };
  return kWords;
}

double jitter(std::mt19937_64& rng, double amount) {
  return (uniform_double(rng) * 2.0 - 1.0) * amount;
}

double clamp01(double v) { return std::clamp(v, 0.001, 0.999); }

BoundingBox box_around(double cx, double cy, double w, double h) {
  double x1 = clamp01(cx - 0.5 * w);
  double y1 = clamp01(cy - 0.5 * h);
  double x2 = clamp01(cx + 0.5 * w);
  double y2 = clamp01(cy + 0.5 * h);
  if (x2 - x1 < 0.01) x2 = clamp01(x1 + 0.01);
  if (y2 - y1 < 0.01) y2 = clamp01(y1 + 0.01);
  return BoundingBox(x1, y1, x2, y2);
}

struct Layout {
  std::vector<std::string> labels;
  std::vector<BoundingBox> object_boxes;
  std::vector<std::string> words;
  std::vector<BoundingBox> word_boxes;
  int cued_object = 0;
  std::string cued_word;
};

// One attempt at a scene; the caller validates the On-uniqueness invariant.
Layout propose_layout(std::mt19937_64& rng, std::uint64_t variant) {
  Layout layout;
  const int object_count = 2 + static_cast<int>(uniform_index(rng, 2));

  std::vector<int> label_ids;
  while (static_cast<int>(label_ids.size()) < object_count) {
    const int id = static_cast<int>(uniform_index(rng, object_labels().size()));
    if (std::find(label_ids.begin(), label_ids.end(), id) == label_ids.end()) {
      label_ids.push_back(id);
    }
  }

  // Objects occupy distinct quadrants, jittered.
  std::vector<int> cells = {0, 1, 2, 3};
  for (size_t i = cells.size(); i > 1; --i) {
    std::swap(cells[i - 1], cells[uniform_index(rng, i)]);
  }
  static constexpr double kCellX[4] = {0.28, 0.72, 0.28, 0.72};
  static constexpr double kCellY[4] = {0.28, 0.28, 0.72, 0.72};
  for (int i = 0; i < object_count; ++i) {
    layout.labels.push_back(object_labels()[static_cast<size_t>(label_ids[static_cast<size_t>(i)])]);
    const int cell = cells[static_cast<size_t>(i)];
    const double cx = kCellX[cell] + jitter(rng, 0.03);
    const double cy = kCellY[cell] + jitter(rng, 0.03);
    const double w = 0.22 + uniform_double(rng) * 0.08;
    const double h = 0.22 + uniform_double(rng) * 0.08;
    layout.object_boxes.push_back(box_around(cx, cy, w, h));
  }

  layout.cued_object = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(object_count)));

  std::vector<int> word_ids;
  auto draw_word = [&]() {
    while (true) {
      const int id = static_cast<int>(uniform_index(rng, scene_lexicon().size()));
      if (std::find(word_ids.begin(), word_ids.end(), id) == word_ids.end()) {
        word_ids.push_back(id);
        return scene_lexicon()[static_cast<size_t>(id)];
      }
    }
  };

  auto inside_box = [&](const BoundingBox& outer) {
    const double w = outer.width() * (0.45 + uniform_double(rng) * 0.15);
    const double h = outer.height() * (0.28 + uniform_double(rng) * 0.12);
    const double cx = outer.center_x() + jitter(rng, 0.06 * outer.width());
    const double cy = outer.center_y() + jitter(rng, 0.06 * outer.height());
    const double x1 = std::max(outer.x1 + 0.005, cx - 0.5 * w);
    const double y1 = std::max(outer.y1 + 0.005, cy - 0.5 * h);
    const double x2 = std::min(outer.x2 - 0.005, cx + 0.5 * w);
    const double y2 = std::min(outer.y2 - 0.005, cy + 0.5 * h);
    return BoundingBox(x1, y1, std::max(x2, x1 + 0.01), std::max(y2, y1 + 0.01));
  };

  // The answer word sits inside the cued object.
  layout.cued_word = draw_word();
  layout.words.push_back(layout.cued_word);
  layout.word_boxes.push_back(
      inside_box(layout.object_boxes[static_cast<size_t>(layout.cued_object)]));

  const int distractors = 2 + static_cast<int>(uniform_index(rng, 3));
  for (int d = 0; d < distractors; ++d) {
    const std::string word = draw_word();
    const std::uint64_t mode = (variant + static_cast<std::uint64_t>(d)) % 5;
    BoundingBox box(0.4, 0.4, 0.6, 0.6);
    switch (mode) {
      case 0: {
        // Inside a non-cued object when one exists.
        const int other = (layout.cued_object + 1) % static_cast<int>(layout.object_boxes.size());
        box = inside_box(layout.object_boxes[static_cast<size_t>(other)]);
        break;
      }
      case 1: {
        // Far corner, small but not tiny.
        const double cx = uniform_double(rng) < 0.5 ? 0.06 : 0.94;
        const double cy = uniform_double(rng) < 0.5 ? 0.06 : 0.94;
        box = box_around(cx + jitter(rng, 0.02), cy + jitter(rng, 0.02), 0.07, 0.05);
        break;
      }
      case 2: {
        // Beside an object, direction cycling through all eight bearings.
        const int target = static_cast<int>(uniform_index(rng, layout.object_boxes.size()));
        const BoundingBox& t = layout.object_boxes[static_cast<size_t>(target)];
        const double bearing = 0.785398163397448 * static_cast<double>((variant + static_cast<std::uint64_t>(d)) % 8);
        const double reach = 1.2 * t.diagonal();
        const double cx = t.center_x() + reach * std::cos(bearing);
        const double cy = t.center_y() - reach * std::sin(bearing);
        box = box_around(clamp01(cx), clamp01(cy), 0.09, 0.06);
        break;
      }
      case 3: {
        // Straddling an object's right edge, big enough to overlap properly.
        const int target = static_cast<int>(uniform_index(rng, layout.object_boxes.size()));
        const BoundingBox& t = layout.object_boxes[static_cast<size_t>(target)];
        box = box_around(t.x2, t.center_y(), t.width() * 0.9, t.height() * 0.9);
        break;
      }
      case 4: {
        // Enclosing an object entirely.
        const int target = static_cast<int>(uniform_index(rng, layout.object_boxes.size()));
        const BoundingBox& t = layout.object_boxes[static_cast<size_t>(target)];
        box = BoundingBox(clamp01(t.x1 - 0.04), clamp01(t.y1 - 0.04),
                          clamp01(t.x2 + 0.04), clamp01(t.y2 + 0.04));
        break;
      }
    }
    layout.words.push_back(word);
    layout.word_boxes.push_back(box);
  }
  return layout;
}

bool layout_valid(const Layout& layout) {
  // Exactly one word On the cued object, and it is the cued word.
  int on_cued = 0;
  for (size_t i = 0; i < layout.word_boxes.size(); ++i) {
    if (is_on(layout.object_boxes[static_cast<size_t>(layout.cued_object)],
              layout.word_boxes[i])) {
      ++on_cued;
      if (layout.words[i] != layout.cued_word) return false;
    }
  }
  return on_cued == 1;
}

}  // namespace

std::vector<std::string> synth_answer_tokens() {
  std::vector<std::string> tokens = {"what", "is", "on", "the", "reads", "near"};
  for (const auto& label : object_labels()) tokens.push_back(label);
  return tokens;
}

std::vector<Sample> synth_corpus(std::uint64_t seed, int count, SynthTask task,
                                 const FeatureConfig& features) {
  auto word_vectors = make_word_vector_provider(features.word_vector_provider,
                                                features.word_vector_dim);
  std::vector<Sample> samples;
  samples.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    auto rng = derive_rng(seed, "synth_scene", static_cast<std::uint64_t>(i));
    Layout layout;
    do {
      layout = propose_layout(rng, static_cast<std::uint64_t>(i));
    } while (!layout_valid(layout));

    std::vector<ObjectRegion> objects;
    for (size_t k = 0; k < layout.labels.size(); ++k) {
      ObjectRegion o;
      o.label = layout.labels[k];
      o.box = layout.object_boxes[k];
      o.feature_tag = "obj:" + o.label;
      o.visual = synthesize_visual_feature(o.feature_tag, features.visual_dim);
      objects.push_back(std::move(o));
    }
    std::vector<SceneTextRegion> regions;
    for (size_t k = 0; k < layout.words.size(); ++k) {
      SceneTextRegion r;
      r.word = layout.words[k];
      r.box = layout.word_boxes[k];
      r.feature_tag = "ocr:" + r.word;
      r.visual = synthesize_visual_feature(r.feature_tag, features.visual_dim);
      r.word_vec = word_vectors->vector(r.word);
      r.phoc = phoc_encode(r.word);
      regions.push_back(std::move(r));
    }

    const std::string& cued_label = layout.labels[static_cast<size_t>(layout.cued_object)];
    const std::string question = "what is on the " + cued_label;
    const std::string caption = "the " + cued_label + " reads " + layout.cued_word;

    std::optional<std::vector<std::string>> answers;
    std::optional<std::string> caption_field;
    std::string question_field;
    if (task == SynthTask::QuestionAnswering) {
      answers = std::vector<std::string>(10, layout.cued_word);
      question_field = question;
    } else {
      caption_field = caption;
    }

    samples.push_back(make_sample("synth" + std::to_string(i), question_field,
                                  std::move(objects), std::move(regions),
                                  std::move(answers), std::move(caption_field),
                                  features.caps));
  }
  return samples;
}

std::vector<RawImageRecord> synth_raw_records(std::uint64_t seed, int count) {
  std::vector<RawImageRecord> records;
  records.reserve(static_cast<size_t>(count));
  const FeatureConfig features;  // boxes/labels only; features stay tags
  auto kept = synth_corpus(seed, count, SynthTask::Captioning, features);
  for (int i = 0; i < count; ++i) {
    auto rng = derive_rng(seed, "synth_raw", static_cast<std::uint64_t>(i));
    RawImageRecord r;
    r.image_id = "raw" + std::to_string(i);
    const Sample& s = kept[static_cast<size_t>(i)];
    r.caption = s.caption.value_or("a scene");
    for (const auto& o : s.objects) {
      r.objects.push_back({o.label, o.box, o.feature_tag});
    }
    // Cycle the planted category: usable, no text, watermark-only, tiny-only.
    const int category = i % 4;
    if (category == 0) {
      for (const auto& t : s.scene_text) r.scene_text.push_back({t.word, t.box, false});
    } else if (category == 2) {
      r.scene_text.push_back({"shutterstock", BoundingBox(0.2, 0.45, 0.8, 0.55), false});
      r.scene_text.push_back({"alamy", BoundingBox(0.3, 0.8, 0.6, 0.9), true});
    } else if (category == 3) {
      const double x = 0.1 + uniform_double(rng) * 0.5;
      r.scene_text.push_back({"fine", BoundingBox(x, 0.5, x + 0.08, 0.512), false});
      r.scene_text.push_back({"print", BoundingBox(x, 0.55, x + 0.06, 0.565), false});
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace tap
