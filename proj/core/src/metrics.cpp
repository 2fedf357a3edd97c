#include "crossguard/metrics.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "crossguard/error.hpp"
#include "crossguard/geometry.hpp"

namespace crossguard {

namespace {

void check_single_frame(std::span<const Detection> preds,
                        std::span<const GroundTruthObject> truths) {
  std::optional<std::uint64_t> frame;
  const auto check = [&](std::uint64_t f) {
    if (frame && *frame != f) throw Error("heterogeneous frame");
    frame = f;
  };
  for (const auto& p : preds) check(p.frame_id);
  for (const auto& t : truths) check(t.frame_id);
}

std::vector<std::size_t> canonical_indices(std::span<const Detection> preds) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return canonical_before(preds[a], preds[b]);
                   });
  return order;
}

}  // namespace

std::vector<Match> match_detections(std::span<const Detection> preds,
                                    std::span<const GroundTruthObject> truths,
                                    double iou_threshold) {
  check_single_frame(preds, truths);
  std::vector<Match> matches(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) matches[i].pred_index = i;
  std::vector<bool> taken(truths.size(), false);
  const auto order = canonical_indices(preds);

  const auto sweep = [&](bool same_class) {
    for (std::size_t pi : order) {
      if (matches[pi].truth_index) continue;
      const auto& p = preds[pi];
      std::optional<std::size_t> best;
      double best_iou = 0.0;
      for (std::size_t ti = 0; ti < truths.size(); ++ti) {
        if (taken[ti]) continue;
        if (same_class && truths[ti].class_label != p.class_label) continue;
        const double v = iou(p.box, truths[ti].box);
        if (v >= iou_threshold && (!best || v > best_iou)) {
          best = ti;
          best_iou = v;
        }
      }
      if (best) {
        taken[*best] = true;
        matches[pi].truth_index = best;
        matches[pi].is_tp = same_class;
      }
    }
  };
  sweep(true);
  sweep(false);
  return matches;
}

ConfusionMatrix::ConfusionMatrix(const ClassRegistry& registry)
    : labels_(registry.labels().begin(), registry.labels().end()) {
  labels_.emplace_back(kBackgroundLabel);
  counts_.assign(labels_.size() * labels_.size(), 0.0);
}

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> labels,
                                 std::vector<double> counts)
    : labels_(std::move(labels)), counts_(std::move(counts)) {
  if (labels_.empty() || labels_.back() != kBackgroundLabel) {
    throw Error("confusion labels must end with 'background'");
  }
  for (std::size_t i = 0; i + 1 < labels_.size(); ++i) {
    if (labels_[i] == kBackgroundLabel) {
      throw Error("'background' may appear only once");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (labels_[i] == labels_[j]) throw Error("duplicate label " + labels_[i]);
    }
  }
  if (counts_.size() != labels_.size() * labels_.size()) {
    throw Error("confusion counts do not form a square grid");
  }
  for (double c : counts_) {
    if (!(c >= 0.0)) throw Error("confusion counts must be non-negative");
  }
}

std::size_t ConfusionMatrix::index_of(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw Error("unknown label '" + std::string(label) + "'");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

void ConfusionMatrix::add(std::size_t truth, std::size_t pred, double amount) {
  counts_.at(truth * labels_.size() + pred) += amount;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (labels_ != other.labels_) throw Error("confusion label mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

void accumulate_confusion(ConfusionMatrix& cm, std::span<const Match> matches,
                          std::span<const Detection> preds,
                          std::span<const GroundTruthObject> truths) {
  const std::size_t bg = cm.background_index();
  std::vector<bool> matched(truths.size(), false);
  for (const auto& m : matches) {
    const std::size_t pred_c = cm.index_of(preds[m.pred_index].class_label);
    if (m.truth_index) {
      matched[*m.truth_index] = true;
      cm.add(cm.index_of(truths[*m.truth_index].class_label), pred_c);
    } else {
      cm.add(bg, pred_c);
    }
  }
  for (std::size_t t = 0; t < truths.size(); ++t) {
    if (!matched[t]) cm.add(cm.index_of(truths[t].class_label), bg);
  }
}

ConfusionMatrix build_confusion_matrix(std::span<const Match> matches,
                                       std::span<const Detection> preds,
                                       std::span<const GroundTruthObject> truths,
                                       const ClassRegistry& registry) {
  ConfusionMatrix cm(registry);
  accumulate_confusion(cm, matches, preds, truths);
  return cm;
}

ClassMetrics metrics_from_counts(std::string class_label, double tp, double fp,
                                 double fn) {
  ClassMetrics m;
  m.class_label = std::move(class_label);
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  if (tp + fp > 0.0) {
    m.precision = tp / (tp + fp);
  } else {
    m.precision_undefined = true;
  }
  if (tp + fn > 0.0) {
    m.recall = tp / (tp + fn);
  } else {
    m.recall_undefined = true;
  }
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1_undefined = true;
  }
  return m;
}

ClassMetrics class_metrics(const ConfusionMatrix& cm, std::string_view label) {
  if (label == kBackgroundLabel) {
    throw Error("metrics are not defined for 'background'");
  }
  const std::size_t c = cm.index_of(label);
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t i = 0; i < cm.size(); ++i) {
    if (i == c) continue;
    fp += cm.at(i, c);
    fn += cm.at(c, i);
  }
  return metrics_from_counts(std::string(label), cm.at(c, c), fp, fn);
}

AggregateMetrics aggregate_metrics(std::span<const ClassMetrics> per_class) {
  AggregateMetrics agg;
  agg.macro.class_label = "macro";
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (const auto& m : per_class) {
    agg.macro.tp += m.tp;
    agg.macro.fp += m.fp;
    agg.macro.fn += m.fn;
    agg.macro.precision += m.precision;
    agg.macro.recall += m.recall;
    agg.macro.f1 += m.f1;
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
  }
  if (!per_class.empty()) {
    const auto n = static_cast<double>(per_class.size());
    agg.macro.precision /= n;
    agg.macro.recall /= n;
    agg.macro.f1 /= n;
  } else {
    agg.macro.precision_undefined = agg.macro.recall_undefined =
        agg.macro.f1_undefined = true;
  }
  agg.micro = metrics_from_counts("micro", tp, fp, fn);
  return agg;
}

namespace {

template <class T>
std::map<std::uint64_t, std::vector<T>> by_frame(std::span<const T> items) {
  std::map<std::uint64_t, std::vector<T>> out;
  for (const auto& item : items) out[item.frame_id].push_back(item);
  return out;
}

}  // namespace

std::vector<PrPoint> pr_curve(std::span<const Detection> preds,
                              std::span<const GroundTruthObject> truths,
                              std::string_view label, double iou_threshold) {
  const auto n_truth = static_cast<double>(
      std::count_if(truths.begin(), truths.end(), [&](const auto& t) {
        return t.class_label == label;
      }));
  if (n_truth == 0.0) throw Error("undefined recall");

  std::vector<Detection> mine;
  for (const auto& p : preds) {
    if (p.class_label == label) mine.push_back(p);
  }
  if (mine.empty()) return {PrPoint{0.0, 0.0}};

  // Cutting at a confidence keeps a prefix of each frame's canonical order,
  // and same-class matching of a prefix agrees with the full run, so one
  // matching pass per frame labels every prediction for all cutoffs.
  struct Scored {
    Detection det;
    bool tp;
  };
  std::vector<Scored> scored;
  const auto truth_frames = by_frame<GroundTruthObject>(truths);
  for (auto& [frame, dets] : by_frame<Detection>(mine)) {
    const auto it = truth_frames.find(frame);
    const std::vector<GroundTruthObject> none;
    const auto& frame_truths = it == truth_frames.end() ? none : it->second;
    const auto matches = match_detections(dets, frame_truths, iou_threshold);
    for (const auto& m : matches) {
      scored.push_back({dets[m.pred_index], m.is_tp});
    }
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return canonical_before(a.det, b.det);
  });

  std::vector<PrPoint> curve;
  double tp = 0.0;
  for (std::size_t i = 0; i < scored.size(); ++i) {
    tp += scored[i].tp ? 1.0 : 0.0;
    const bool last_of_cutoff =
        i + 1 == scored.size() ||
        scored[i + 1].det.confidence != scored[i].det.confidence;
    if (last_of_cutoff) {
      curve.push_back({tp / n_truth, tp / static_cast<double>(i + 1)});
    }
  }
  return curve;
}

double average_precision(std::span<const PrPoint> curve) {
  if (curve.empty()) throw Error("empty precision-recall curve");
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (!(curve[k].recall >= 0.0 && curve[k].recall <= 1.0 &&
          curve[k].precision >= 0.0 && curve[k].precision <= 1.0)) {
      throw Error("precision-recall point out of [0, 1]");
    }
    if (k > 0 && curve[k].recall < curve[k - 1].recall) {
      throw Error("precision-recall curve recall must be non-decreasing");
    }
  }
  // Recall is non-decreasing, so "recall >= r_k" is a suffix starting at the
  // first point whose recall equals r_k.
  std::vector<double> suffix_max(curve.size() + 1, 0.0);
  for (std::size_t k = curve.size(); k-- > 0;) {
    suffix_max[k] = std::max(suffix_max[k + 1], curve[k].precision);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t group_start = 0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    if (k > 0 && curve[k].recall != curve[k - 1].recall) group_start = k;
    ap += (curve[k].recall - prev_recall) * suffix_max[group_start];
    prev_recall = curve[k].recall;
  }
  return ap;
}

Evaluation evaluate(std::span<const Detection> preds,
                    std::span<const GroundTruthObject> truths,
                    double iou_threshold, const ClassRegistry& registry) {
  Evaluation ev{ConfusionMatrix(registry), {}, {}, {}};
  for (const auto& p : preds) validate(p, registry);
  for (const auto& t : truths) validate(t, registry);

  auto pred_frames = by_frame<Detection>(preds);
  auto truth_frames = by_frame<GroundTruthObject>(truths);
  std::vector<std::uint64_t> frames;
  for (const auto& [f, _] : pred_frames) frames.push_back(f);
  for (const auto& [f, _] : truth_frames) frames.push_back(f);
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());

  for (std::uint64_t f : frames) {
    const auto& fp = pred_frames[f];
    const auto& ft = truth_frames[f];
    const auto matches = match_detections(fp, ft, iou_threshold);
    accumulate_confusion(ev.confusion, matches, fp, ft);
  }

  for (const auto& label : registry.labels()) {
    const auto present = [&](const auto& xs) {
      return std::any_of(xs.begin(), xs.end(), [&](const auto& x) {
        return x.class_label == label;
      });
    };
    const bool in_truth = present(truths);
    if (!in_truth && !present(preds)) continue;
    ev.per_class.push_back(class_metrics(ev.confusion, label));
    if (in_truth) {
      ev.pr_curves.emplace_back(label,
                                pr_curve(preds, truths, label, iou_threshold));
    }
  }
  ev.aggregate = aggregate_metrics(ev.per_class);
  return ev;
}

}  // namespace crossguard
