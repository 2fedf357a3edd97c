#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crossguard/controller.hpp"
#include "crossguard/detection.hpp"
#include "crossguard/error.hpp"
#include "crossguard/fusion.hpp"
#include "crossguard/metrics.hpp"
#include "crossguard/segmentation.hpp"
#include "crossguard/text_format.hpp"

namespace crossguard {

/// Linear trajectory, present on ticks start_tick..end_tick inclusive.
struct ObjectTrack {
  std::string class_label;
  std::uint64_t start_tick = 0;
  BBox start_box{0, 0, 1, 1};
  std::uint64_t end_tick = 0;
  BBox end_box{0, 0, 1, 1};

  std::optional<BBox> box_at(std::uint64_t tick) const;

  friend bool operator==(const ObjectTrack&, const ObjectTrack&) = default;
};

struct SourceSpec {
  std::string id;
  double p_detect = 1.0;

  friend bool operator==(const SourceSpec&, const SourceSpec&) = default;
};

struct DetectorNoise {
  std::vector<SourceSpec> sources;
  double box_jitter_sigma = 0.0;
  std::pair<double, double> tp_conf{0.6, 0.95};
  double fp_rate_lambda = 0.0;
  std::pair<double, double> fp_conf{0.05, 0.4};

  friend bool operator==(const DetectorNoise&, const DetectorNoise&) = default;
};

struct MaskNoise {
  double object_mean = 0.9;
  double object_sigma = 0.05;
  double background_mean = 0.1;
  double background_sigma = 0.05;

  friend bool operator==(const MaskNoise&, const MaskNoise&) = default;
};

struct TrainWindow {
  std::uint64_t start = 0;  // inclusive
  std::uint64_t end = 0;    // exclusive

  friend bool operator==(const TrainWindow&, const TrainWindow&) = default;
};

struct Scenario {
  std::size_t frame_width = 640;
  std::size_t frame_height = 480;
  BBox roi{0, 0, 1, 1};
  BBox track_region{0, 0, 1, 1};
  std::uint64_t num_frames = 1;
  std::vector<ObjectTrack> objects;
  std::vector<TrainWindow> train_windows;
  DetectorNoise detector;
  MaskNoise mask;
  std::uint64_t seed = 1;
  std::size_t mask_width = 64;
  std::size_t mask_height = 64;
  double iou_threshold = kDefaultFusionIou;
  ControllerConfig controller;

  bool train_active(std::uint64_t tick) const noexcept;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Scenario error that names the offending key.
class ScenarioError : public Error {
 public:
  ScenarioError(std::string key, const std::string& what)
      : Error("scenario key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Throws ScenarioError for any violated invariant.
void validate(const Scenario& s);

/// `key = value` lines; lists repeat their key. Required keys: frame, roi,
/// track_region, frames, source. Throws ScenarioError.
Scenario parse_scenario(std::istream& in);
void write_scenario(std::ostream& out, const Scenario& s);

/// Deterministic generator for one (seed, tick, stream) triple.
std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t tick,
                           std::string_view stream);

/// Rounds to the 6-decimal grid used by every artifact file.
double quantize(double v);

/// Track region expressed in mask pixel coordinates.
BBox mask_track_region(const Scenario& s);

std::vector<GroundTruthObject> ground_truth_at(const Scenario& s,
                                               std::uint64_t tick);

std::vector<Detection> simulate_detections(const Scenario& s,
                                           std::uint64_t tick);

/// Camera 1 and camera 2 probability masks.
std::pair<ProbMask, ProbMask> simulate_masks(const Scenario& s,
                                             std::uint64_t tick);

struct SimulationOptions {
  ModelWeights weights;
  /// When set, artifacts are written under this directory.
  std::optional<std::filesystem::path> out_dir;
  /// Write masks every N ticks (0 disables mask files).
  std::uint64_t mask_every = 1;
};

struct EpisodeArtifacts {
  std::vector<GroundTruthObject> ground_truth;
  std::vector<Detection> detections;
  std::vector<FusedDetection> fused;
  std::vector<SignalRecord> signals;
  std::vector<ControlEvent> events;
  std::vector<CrossingState> states;  // post-step state, one per tick
  CrossingState final_state;
  Evaluation evaluation{ConfusionMatrix(ClassRegistry::standard()), {}, {}, {}};
};

/// Full loop per tick: ground truth, per-source detections, calibration,
/// fusion, masks and scores, one controller step.
EpisodeArtifacts run_simulation(const Scenario& s,
                                const SimulationOptions& options = {});

/// gt.log, detections.log, fused.log, signals.txt, events.log, report.txt.
void write_artifacts(const EpisodeArtifacts& a,
                     const std::filesystem::path& dir);

}  // namespace crossguard
