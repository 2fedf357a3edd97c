#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crossguard/classes.hpp"
#include "crossguard/controller.hpp"
#include "crossguard/detection.hpp"
#include "crossguard/fusion.hpp"
#include "crossguard/metrics.hpp"
#include "crossguard/segmentation.hpp"

// Line-oriented ASCII formats. Reals are written with 6 decimal digits;
// readers skip blank lines and lines whose first non-blank character is '#',
// and report failures as ParseError with the 1-based line number.

namespace crossguard {

/// Fixed 6-decimal rendering; never prints "-0.000000".
std::string format_real(double v);

// Detection log:  frame_id source_id class confidence x1 y1 x2 y2
// Fused log adds: n_sources n_members
// Truth log:      frame_id gt class x1 y1 x2 y2
std::string format_detection(const Detection& d);
std::string format_fused(const FusedDetection& f);
std::string format_truth(const GroundTruthObject& g);

void write_detection_log(std::ostream& out, std::span<const Detection> dets);
void write_fused_log(std::ostream& out, std::span<const FusedDetection> fused);
void write_truth_log(std::ostream& out,
                     std::span<const GroundTruthObject> truths);

/// Accepts plain (8-field) and fused (10-field) lines.
std::vector<Detection> read_detection_log(
    std::istream& in, const ClassRegistry& registry = ClassRegistry::standard());
std::vector<GroundTruthObject> read_truth_log(
    std::istream& in, const ClassRegistry& registry = ClassRegistry::standard());

// Weights file: `<source_id> <weight>` per line.
void write_weights(std::ostream& out, const ModelWeights& w);
ModelWeights read_weights(std::istream& in, double alpha = 0.1);

// Mask file: `PMASK <width> <height>`, then `height` rows of `width` values.
void write_mask(std::ostream& out, const ProbMask& m);
void write_mask(std::ostream& out, const BinaryMask& m);
ProbMask read_prob_mask(std::istream& in);
/// Like read_prob_mask but every value must be exactly 0 or 1.
BinaryMask read_binary_mask(std::istream& in);

// Signal file: `tick score_cam1 score_cam2` per line.
struct SignalRecord {
  std::uint64_t tick = 0;
  double score_cam1 = 0.0;
  double score_cam2 = 0.0;

  friend bool operator==(const SignalRecord&, const SignalRecord&) = default;
};
void write_signals(std::ostream& out, std::span<const SignalRecord> signals);
std::vector<SignalRecord> read_signals(std::istream& in);

void write_event_log(std::ostream& out, std::span<const ControlEvent> events);

// Confusion block:
//   labels <l1> ... <ln> background
//   <label> <count> ... <count>        (one row per label, same order)
void write_confusion_matrix(std::ostream& out, const ConfusionMatrix& cm);
ConfusionMatrix read_confusion_matrix(std::istream& in);

}  // namespace crossguard
