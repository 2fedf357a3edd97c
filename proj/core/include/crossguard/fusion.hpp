#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "crossguard/detection.hpp"

namespace crossguard {

inline constexpr double kDefaultFusionIou = 0.5;

/// Per-source multiplicative confidence calibration. Sources absent from
/// the map have weight 1.0.
struct ModelWeights {
  std::map<std::string, double> weights;
  double alpha = 0.1;

  double weight_of(const std::string& source_id) const;

  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

/// Scales the confidence by the source weight and clamps to [0, 1].
Detection calibrate_confidence(Detection d, const ModelWeights& w);

/// Merges one frame's detections from up to `num_models` sources.
///
/// Same-class detections are clustered greedily in canonical order: the
/// first remaining detection seeds a cluster and absorbs every remaining
/// detection with IoU against the seed at or above `iou_threshold`. Each
/// cluster yields one box whose corners are the confidence-weighted mean of
/// its members, with confidence
///
///   mean(member confidence) * |distinct sources| / num_models.
///
/// If two fused boxes of one class still overlap at or above the threshold,
/// their clusters are merged and recomputed until no such pair remains, so
/// the output never contains a same-class pair with IoU >= threshold.
///
/// Output is sorted by confidence descending, then class ascending.
/// Throws Error("heterogeneous frame") or Error("K underestimates ensemble").
std::vector<FusedDetection> fuse_frame(std::span<const Detection> dets,
                                       std::size_t num_models,
                                       double iou_threshold = kDefaultFusionIou);

/// One observation for the calibration update: `y` is 1 when the detection
/// matched ground truth, 0 otherwise.
struct WeightObservation {
  std::string source_id;
  double confidence = 0.0;
  int y = 0;
};

/// Applies w[s] <- max(0, w[s] + alpha * (y - confidence)) for each
/// observation in order. Throws Error for y outside {0, 1}.
ModelWeights update_model_weights(ModelWeights w,
                                  std::span<const WeightObservation> matches);

struct LabeledPrediction {
  int y = 0;
  double prediction = 0.0;
};

/// Sum of squared residuals. Throws Error("no instances") on empty input.
double ensemble_loss(std::span<const LabeledPrediction> pairs);

}  // namespace crossguard
