#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crossguard/classes.hpp"
#include "crossguard/detection.hpp"

namespace crossguard {

inline constexpr double kDefaultMatchIou = 0.5;

struct Match {
  std::size_t pred_index = 0;
  std::optional<std::size_t> truth_index;
  bool is_tp = false;

  friend bool operator==(const Match&, const Match&) = default;
};

/// Greedy one-to-one matching for a single frame, in two stages.
///
/// Stage one visits predictions in canonical order (confidence descending)
/// and pairs each with the unmatched same-class truth of highest IoU at or
/// above the threshold; these pairs are true positives. Stage two repeats
/// the sweep for predictions still unmatched, now against any unmatched
/// truth, producing class-confusion pairs. Remaining predictions are false
/// positives against background; unmatched truths are misses.
///
/// Returns one Match per prediction, indexed as in `preds`. IoU ties go to
/// the lower truth index. Throws Error if the inputs span several frames.
std::vector<Match> match_detections(std::span<const Detection> preds,
                                    std::span<const GroundTruthObject> truths,
                                    double iou_threshold = kDefaultMatchIou);

/// Square count grid over the registered labels plus a trailing
/// `background` label. counts[i][j] accumulates true label i predicted as j.
/// Counts are reals so normalized rates can be stored directly.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(const ClassRegistry& registry);
  /// Labels must end with `background`.
  ConfusionMatrix(std::vector<std::string> labels, std::vector<double> counts);

  std::span<const std::string> labels() const noexcept { return labels_; }
  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t background_index() const noexcept { return labels_.size() - 1; }
  /// Throws for an unknown label.
  std::size_t index_of(std::string_view label) const;

  double at(std::size_t truth, std::size_t pred) const {
    return counts_[truth * labels_.size() + pred];
  }
  double at(std::string_view truth, std::string_view pred) const {
    return at(index_of(truth), index_of(pred));
  }
  void add(std::size_t truth, std::size_t pred, double amount = 1.0);

  /// Cell-wise sum; label lists must match.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) =
      default;

 private:
  std::vector<std::string> labels_;
  std::vector<double> counts_;
};

/// Accumulates one frame's matching result into `cm`.
void accumulate_confusion(ConfusionMatrix& cm, std::span<const Match> matches,
                          std::span<const Detection> preds,
                          std::span<const GroundTruthObject> truths);

/// Matching result for a single frame, fresh matrix.
ConfusionMatrix build_confusion_matrix(std::span<const Match> matches,
                                       std::span<const Detection> preds,
                                       std::span<const GroundTruthObject> truths,
                                       const ClassRegistry& registry =
                                           ClassRegistry::standard());

struct ClassMetrics {
  std::string class_label;
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the corresponding denominator was zero and the value was
  // defined as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

/// Precision, recall and F1 from raw tp/fp/fn; zero denominators yield 0.
ClassMetrics metrics_from_counts(std::string class_label, double tp, double fp,
                                 double fn);

/// Throws Error for `background` or an unknown label.
ClassMetrics class_metrics(const ConfusionMatrix& cm, std::string_view label);

struct AggregateMetrics {
  ClassMetrics macro;  // unweighted mean over the listed classes
  ClassMetrics micro;  // from pooled tp/fp/fn
};

AggregateMetrics aggregate_metrics(std::span<const ClassMetrics> per_class);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;

  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

/// Precision/recall swept over each distinct confidence of class `label`
/// predictions, highest first. Inputs may span many frames; matching runs
/// per frame. Zero predictions give the single point (0, 0). Throws
/// Error("undefined recall") if no truth has class `label`.
std::vector<PrPoint> pr_curve(std::span<const Detection> preds,
                              std::span<const GroundTruthObject> truths,
                              std::string_view label,
                              double iou_threshold = kDefaultMatchIou);

/// All-points interpolated AP: sum of recall increments times the maximum
/// precision at or beyond each recall. Throws on an empty curve.
double average_precision(std::span<const PrPoint> curve);

/// Multi-frame evaluation: matches every frame and accumulates one matrix.
struct Evaluation {
  ConfusionMatrix confusion;
  std::vector<ClassMetrics> per_class;  // classes present in preds or truths
  AggregateMetrics aggregate;
  std::vector<std::pair<std::string, std::vector<PrPoint>>> pr_curves;
};

Evaluation evaluate(std::span<const Detection> preds,
                    std::span<const GroundTruthObject> truths,
                    double iou_threshold = kDefaultMatchIou,
                    const ClassRegistry& registry = ClassRegistry::standard());

}  // namespace crossguard
