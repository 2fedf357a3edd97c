#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crossguard/geometry.hpp"

namespace crossguard {

/// Row-major per-pixel object probabilities.
class ProbMask {
 public:
  ProbMask(std::size_t width, std::size_t height, std::vector<double> values);
  /// Every pixel set to `fill`.
  ProbMask(std::size_t width, std::size_t height, double fill);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::span<const double> values() const noexcept { return values_; }
  double at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }

  friend bool operator==(const ProbMask&, const ProbMask&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
};

/// Row-major bits; 1 is object (rail/train), 0 is background.
class BinaryMask {
 public:
  BinaryMask(std::size_t width, std::size_t height,
             std::vector<std::uint8_t> bits);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  bool at(std::size_t x, std::size_t y) const { return bits_[y * width_ + x] != 0; }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> bits_;
};

/// Bit-to-probability embedding (0 -> 0.0, 1 -> 1.0).
ProbMask to_prob_mask(const BinaryMask& m);

/// Object iff value > 0.5; exactly 0.5 is background.
BinaryMask threshold_mask(const ProbMask& m);

/// Mean of object and background IoU. A class absent from both masks
/// scores 1. Throws on dimension mismatch.
double mask_mean_iou(const BinaryMask& pred, const BinaryMask& truth);

inline constexpr double kBceEpsilon = 1e-7;

/// Pixel-averaged binary cross-entropy with predictions clamped to
/// [eps, 1 - eps]. Throws on dimension mismatch.
double bce_loss(const BinaryMask& truth, const ProbMask& pred);

/// Fraction of pixels whose centers lie in `track_region` (half-open on the
/// right and bottom edges) that threshold to object. Throws if the region
/// covers no pixel center of the mask.
double train_presence_score(const ProbMask& m, const BBox& track_region);

struct SignalConfig {
  double score_threshold = 0.10;
  std::uint32_t n_on = 3;
  std::uint32_t n_off = 5;

  friend bool operator==(const SignalConfig&, const SignalConfig&) = default;
};

void validate(const SignalConfig& config);

/// Debounced two-camera train-approach signal.
struct TrainSignalState {
  std::uint64_t on_count = 0;
  std::uint64_t off_count = 0;
  bool asserted = false;

  friend bool operator==(const TrainSignalState&,
                         const TrainSignalState&) = default;
};

/// Raw signal is (cam1 >= threshold) || (cam2 >= threshold). The asserted
/// flag rises after n_on consecutive raw-true frames and falls after n_off
/// consecutive raw-false frames.
TrainSignalState update_train_signal(TrainSignalState state, double score_cam1,
                                     double score_cam2,
                                     const SignalConfig& config);

}  // namespace crossguard
