#include "crossguard/controller.hpp"

#include "crossguard/error.hpp"

namespace crossguard {

std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::kNormal: return "NORMAL";
    case Mode::kWarning: return "WARNING";
    case Mode::kLowered: return "LOWERED";
  }
  return "?";
}

std::string_view to_string(Bar b) noexcept {
  return b == Bar::kUp ? "UP" : "DOWN";
}

std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::kLowerBar: return "LOWER_BAR";
    case Action::kRaiseBar: return "RAISE_BAR";
    case Action::kBroadcastWarning: return "BROADCAST_WARNING";
    case Action::kClearWarning: return "CLEAR_WARNING";
    case Action::kNone: return "NONE";
  }
  return "?";
}

void validate(const ControllerConfig& config) {
  validate(config.signal);
  if (!(config.min_confidence >= 0.0 && config.min_confidence <= 1.0)) {
    throw Error("min confidence out of [0, 1]");
  }
}

bool mode_consistent(const CrossingState& s) noexcept {
  switch (s.mode) {
    case Mode::kNormal: return s.bar == Bar::kUp && !s.cms_active;
    case Mode::kWarning: return s.bar == Bar::kUp && s.cms_active;
    case Mode::kLowered: return s.bar == Bar::kDown && !s.cms_active;
  }
  return false;
}

bool roi_is_clear(std::span<const Detection> dets, const BBox& roi,
                  double min_confidence) {
  for (const auto& d : dets) {
    // An arriving train must not hold its own crossing open.
    if (d.class_label == kTrainLabel) continue;
    if (d.confidence >= min_confidence && overlaps_roi(d.box, roi)) return false;
  }
  return true;
}

namespace {

void enter(CrossingState& s, Mode m) {
  s.mode = m;
  s.bar = m == Mode::kLowered ? Bar::kDown : Bar::kUp;
  s.cms_active = m == Mode::kWarning;
}

}  // namespace

StepResult step(const CrossingState& state, const TickInput& input,
                const ControllerConfig& config) {
  StepResult r{state, {}};
  CrossingState& s = r.state;
  s.train_signal = update_train_signal(state.train_signal, input.score_cam1,
                                       input.score_cam2, config.signal);
  const bool near = s.train_signal.asserted;
  const bool clear =
      roi_is_clear(input.roi_detections, input.roi, config.min_confidence);

  std::vector<Action> actions;
  switch (state.mode) {
    case Mode::kNormal:
      if (near && clear) {
        enter(s, Mode::kLowered);
        actions = {Action::kLowerBar};
      } else if (near) {
        enter(s, Mode::kWarning);
        actions = {Action::kBroadcastWarning};
      }
      break;
    case Mode::kWarning:
      if (near && clear) {
        enter(s, Mode::kLowered);
        actions = {Action::kClearWarning, Action::kLowerBar};
      } else if (!near) {
        enter(s, Mode::kNormal);
        actions = {Action::kClearWarning};
      }
      break;
    case Mode::kLowered:
      if (!near) {
        enter(s, Mode::kNormal);
        actions = {Action::kRaiseBar};
      } else if (!clear) {
        enter(s, Mode::kWarning);
        actions = {Action::kRaiseBar, Action::kBroadcastWarning};
      }
      break;
  }
  if (actions.empty()) actions = {Action::kNone};
  for (Action a : actions) {
    r.events.push_back({state.tick, a, s.mode, s.bar, s.cms_active});
  }
  s.tick = state.tick + 1;
  return r;
}

Episode run_episode(std::span<const TickInput> inputs,
                    const ControllerConfig& config) {
  Episode ep;
  for (const auto& in : inputs) {
    auto r = step(ep.final_state, in, config);
    ep.events.insert(ep.events.end(), r.events.begin(), r.events.end());
    ep.final_state = r.state;
  }
  return ep;
}

std::string format_event(const ControlEvent& e) {
  std::string line = "tick=" + std::to_string(e.tick);
  line += " mode=";
  line += to_string(e.mode);
  line += " bar=";
  line += to_string(e.bar);
  line += " cms=";
  line += e.cms_active ? '1' : '0';
  line += " action=";
  line += to_string(e.action);
  return line;
}

}  // namespace crossguard
