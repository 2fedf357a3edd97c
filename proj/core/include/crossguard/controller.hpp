#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crossguard/detection.hpp"
#include "crossguard/segmentation.hpp"

namespace crossguard {

enum class Mode { kNormal, kWarning, kLowered };
enum class Bar { kUp, kDown };
enum class Action { kLowerBar, kRaiseBar, kBroadcastWarning, kClearWarning, kNone };

std::string_view to_string(Mode m) noexcept;
std::string_view to_string(Bar b) noexcept;
std::string_view to_string(Action a) noexcept;

/// Controller ticks at 10 Hz; every count below is in ticks.
inline constexpr double kTickRateHz = 10.0;

struct ControllerConfig {
  SignalConfig signal;
  double min_confidence = 0.25;

  friend bool operator==(const ControllerConfig&,
                         const ControllerConfig&) = default;
};

void validate(const ControllerConfig& config);

struct CrossingState {
  Mode mode = Mode::kNormal;
  Bar bar = Bar::kUp;
  bool cms_active = false;
  TrainSignalState train_signal;
  std::uint64_t tick = 0;

  friend bool operator==(const CrossingState&, const CrossingState&) = default;
};

/// NORMAL: bar up, CMS off. WARNING: bar up, CMS on. LOWERED: bar down,
/// CMS off.
bool mode_consistent(const CrossingState& s) noexcept;

struct TickInput {
  double score_cam1 = 0.0;
  double score_cam2 = 0.0;
  std::vector<Detection> roi_detections;
  BBox roi;
};

/// One log line. mode/bar/cms are the state after the tick.
struct ControlEvent {
  std::uint64_t tick = 0;
  Action action = Action::kNone;
  Mode mode = Mode::kNormal;
  Bar bar = Bar::kUp;
  bool cms_active = false;

  friend bool operator==(const ControlEvent&, const ControlEvent&) = default;
};

/// True iff no non-train detection with confidence >= min_confidence
/// overlaps the ROI.
bool roi_is_clear(std::span<const Detection> dets, const BBox& roi,
                  double min_confidence = 0.25);

struct StepResult {
  CrossingState state;
  std::vector<ControlEvent> events;  // a single kNone event on a quiet tick
};

/// Advances one tick. Transition table, with near = debounced train signal
/// and clear = roi_is_clear:
///
///   NORMAL   near & clear  -> LOWERED  LOWER_BAR
///            near & !clear -> WARNING  BROADCAST_WARNING
///   WARNING  near & clear  -> LOWERED  CLEAR_WARNING, LOWER_BAR
///            !near         -> NORMAL   CLEAR_WARNING
///   LOWERED  !near         -> NORMAL   RAISE_BAR
///            near & !clear -> WARNING  RAISE_BAR, BROADCAST_WARNING
///
/// All other combinations keep the mode and emit NONE.
StepResult step(const CrossingState& state, const TickInput& input,
                const ControllerConfig& config);

struct Episode {
  std::vector<ControlEvent> events;
  CrossingState final_state;
};

Episode run_episode(std::span<const TickInput> inputs,
                    const ControllerConfig& config);

/// `tick=<n> mode=<MODE> bar=<UP|DOWN> cms=<0|1> action=<ACTION>`
std::string format_event(const ControlEvent& e);

}  // namespace crossguard
