#include "crossguard/controller.hpp"

#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

namespace crossguard {
namespace {

const BBox kRoi(100, 100, 200, 200);

Detection car(double conf, BBox box) {
  return Detection{0, "ensemble", "car", conf, box};
}

TickInput input(bool train, std::vector<Detection> dets = {}) {
  return TickInput{train ? 0.8 : 0.0, 0.0, std::move(dets), kRoi};
}

std::vector<Action> actions(const std::vector<ControlEvent>& events) {
  std::vector<Action> out;
  for (const auto& e : events)
    if (e.action != Action::kNone) out.push_back(e.action);
  return out;
}

CrossingState asserted_state(Mode mode) {
  CrossingState s;
  s.mode = mode;
  s.bar = mode == Mode::kLowered ? Bar::kDown : Bar::kUp;
  s.cms_active = mode == Mode::kWarning;
  s.train_signal.asserted = true;
  return s;
}

TEST(RoiIsClearTest, Examples) {
  EXPECT_TRUE(roi_is_clear(std::vector<Detection>{}, kRoi));
  EXPECT_FALSE(roi_is_clear(std::vector{car(0.9, BBox(150, 150, 250, 250))}, kRoi));
  EXPECT_TRUE(roi_is_clear(std::vector{car(0.1, BBox(150, 150, 250, 250))}, kRoi));
  // Touching the edge is not overlap.
  EXPECT_TRUE(roi_is_clear(std::vector{car(0.9, BBox(200, 100, 250, 200))}, kRoi));
  auto train = car(0.9, BBox(150, 150, 250, 250));
  train.class_label = "train";
  EXPECT_TRUE(roi_is_clear(std::vector{train}, kRoi));
}

TEST(StepTest, TransitionTable) {
  const ControllerConfig cfg{SignalConfig{0.1, 1, 1}, 0.25};
  const auto blocked = std::vector{car(0.9, BBox(150, 150, 160, 160))};

  auto r = step(CrossingState{}, input(false), cfg);
  EXPECT_EQ(r.state.mode, Mode::kNormal);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0], (ControlEvent{0, Action::kNone, Mode::kNormal, Bar::kUp, false}));
  EXPECT_EQ(r.state.tick, 1u);

  r = step(CrossingState{}, input(true), cfg);
  EXPECT_EQ(r.state.mode, Mode::kLowered);
  EXPECT_EQ(actions(r.events), std::vector{Action::kLowerBar});

  r = step(CrossingState{}, input(true, blocked), cfg);
  EXPECT_EQ(r.state.mode, Mode::kWarning);
  EXPECT_TRUE(r.state.cms_active);
  EXPECT_EQ(actions(r.events), std::vector{Action::kBroadcastWarning});

  r = step(asserted_state(Mode::kWarning), input(true), cfg);
  EXPECT_EQ(r.state.mode, Mode::kLowered);
  EXPECT_EQ(actions(r.events),
            (std::vector{Action::kClearWarning, Action::kLowerBar}));

  r = step(asserted_state(Mode::kWarning), input(true, blocked), cfg);
  EXPECT_EQ(r.state.mode, Mode::kWarning);
  EXPECT_TRUE(actions(r.events).empty());

  r = step(asserted_state(Mode::kWarning), input(false), cfg);
  EXPECT_EQ(r.state.mode, Mode::kNormal);
  EXPECT_EQ(actions(r.events), std::vector{Action::kClearWarning});

  r = step(asserted_state(Mode::kLowered), input(false), cfg);
  EXPECT_EQ(r.state.mode, Mode::kNormal);
  EXPECT_EQ(actions(r.events), std::vector{Action::kRaiseBar});

  r = step(asserted_state(Mode::kLowered), input(true, blocked), cfg);
  EXPECT_EQ(r.state.mode, Mode::kWarning);
  EXPECT_EQ(r.state.bar, Bar::kUp);
  EXPECT_EQ(actions(r.events),
            (std::vector{Action::kRaiseBar, Action::kBroadcastWarning}));

  r = step(asserted_state(Mode::kLowered), input(true), cfg);
  EXPECT_EQ(r.state.mode, Mode::kLowered);
  EXPECT_TRUE(actions(r.events).empty());
}

TEST(RunEpisodeTest, Examples) {
  const ControllerConfig cfg;
  EXPECT_TRUE(run_episode(std::vector<TickInput>{}, cfg).events.empty());

  std::vector<TickInput> clear, occupied;
  const auto blocked = std::vector{car(0.9, BBox(150, 150, 160, 160))};
  for (int t = 0; t < 60; ++t) {
    clear.push_back(input(t >= 10 && t < 30));
    occupied.push_back(input(t >= 10 && t < 30, blocked));
  }
  auto ep = run_episode(clear, cfg);
  EXPECT_EQ(ep.events.size(), 60u);
  std::vector<ControlEvent> acted;
  for (const auto& e : ep.events)
    if (e.action != Action::kNone) acted.push_back(e);
  ASSERT_EQ(acted.size(), 2u);
  EXPECT_EQ(acted[0], (ControlEvent{12, Action::kLowerBar, Mode::kLowered, Bar::kDown, false}));
  EXPECT_EQ(acted[1], (ControlEvent{34, Action::kRaiseBar, Mode::kNormal, Bar::kUp, false}));
  EXPECT_EQ(format_event(acted[0]),
            "tick=12 mode=LOWERED bar=DOWN cms=0 action=LOWER_BAR");

  ep = run_episode(occupied, cfg);
  EXPECT_EQ(actions(ep.events),
            (std::vector{Action::kBroadcastWarning, Action::kClearWarning}));
  EXPECT_EQ(ep.final_state.tick, 60u);
}

TEST(ControllerProperty, SafetyAndConsistency) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0, 1);
  for (int run = 0; run < 200; ++run) {
    const ControllerConfig cfg{
        SignalConfig{u(gen), static_cast<std::uint32_t>(1 + gen() % 4),
                     static_cast<std::uint32_t>(1 + gen() % 6)},
        0.25};
    CrossingState s;
    bool train = false, occupied = false;
    std::vector<ControlEvent> log_a;
    std::vector<TickInput> inputs;
    for (int t = 0; t < 300; ++t) {
      if (gen() % 10 == 0) train = !train;
      if (gen() % 7 == 0) occupied = !occupied;
      std::vector<Detection> dets;
      if (occupied) dets.push_back(car(0.3 + 0.7 * u(gen), BBox(120, 120, 180, 180)));
      if (gen() % 3 == 0) dets.push_back(car(u(gen) * 0.2, BBox(150, 150, 160, 160)));
      TickInput in{train ? u(gen) : 0.0, train ? u(gen) : 0.0, dets, kRoi};
      inputs.push_back(in);
      const auto r = step(s, in, cfg);
      // Independent occupancy check against the raw boxes.
      bool blocked = false;
      for (const auto& d : dets) {
        blocked |= d.confidence >= 0.25 &&
                   testing::boxes_overlap(d.box.x1(), d.box.y1(), d.box.x2(),
                                          d.box.y2(), kRoi.x1(), kRoi.y1(),
                                          kRoi.x2(), kRoi.y2());
      }
      for (const auto& e : r.events) {
        if (e.action == Action::kLowerBar) EXPECT_FALSE(blocked);
      }
      if (r.state.train_signal.asserted && blocked) EXPECT_TRUE(r.state.cms_active);
      EXPECT_TRUE(mode_consistent(r.state));
      EXPECT_EQ(r.state.tick, s.tick + 1);
      // Liveness: asserted on a clear tick means the bar is down.
      if (r.state.train_signal.asserted && !blocked) {
        EXPECT_EQ(r.state.bar, Bar::kDown);
      }
      log_a.insert(log_a.end(), r.events.begin(), r.events.end());
      s = r.state;
    }
    EXPECT_EQ(run_episode(inputs, cfg).events, log_a);
  }
}

}  // namespace
}  // namespace crossguard
