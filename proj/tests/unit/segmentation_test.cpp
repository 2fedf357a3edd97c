#include "crossguard/segmentation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "crossguard/error.hpp"

namespace crossguard {
namespace {

BinaryMask random_mask(std::mt19937_64& gen, std::size_t w, std::size_t h) {
  std::vector<std::uint8_t> bits(w * h);
  for (auto& b : bits) b = static_cast<std::uint8_t>(gen() & 1u);
  return BinaryMask(w, h, bits);
}

// Per-class pixel counting, written independently of the library.
double oracle_mean_iou(const BinaryMask& p, const BinaryMask& t) {
  double sum = 0;
  for (int cls = 0; cls < 2; ++cls) {
    int inter = 0, uni = 0;
    for (std::size_t i = 0; i < p.bits().size(); ++i) {
      const bool a = p.bits()[i] == cls, b = t.bits()[i] == cls;
      inter += a && b;
      uni += a || b;
    }
    sum += uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
  }
  return sum / 2;
}

TEST(ThresholdMaskTest, Examples) {
  EXPECT_EQ(threshold_mask(ProbMask(3, 2, 1.0)),
            BinaryMask(3, 2, std::vector<std::uint8_t>(6, 1)));
  EXPECT_EQ(threshold_mask(ProbMask(3, 2, 0.5)),
            BinaryMask(3, 2, std::vector<std::uint8_t>(6, 0)));
  EXPECT_EQ(threshold_mask(ProbMask(2, 1, {0.4, 0.6})),
            BinaryMask(2, 1, {0, 1}));
}

TEST(ProbMaskTest, RejectsOutOfRange) {
  EXPECT_THROW(ProbMask(1, 1, std::vector<double>{1.5}), Error);
  EXPECT_THROW(ProbMask(2, 1, std::vector<double>{0.5}), Error);
}

TEST(MeanIouTest, Examples) {
  const BinaryMask truth(4, 2, {1, 1, 0, 0, 1, 1, 0, 0});
  EXPECT_EQ(mask_mean_iou(truth, truth), 1.0);
  EXPECT_EQ(mask_mean_iou(BinaryMask(4, 2, std::vector<std::uint8_t>(8, 1)),
                          truth),
            0.25);
  const BinaryMask complement(4, 2, {0, 0, 1, 1, 0, 0, 1, 1});
  EXPECT_EQ(mask_mean_iou(complement, truth), 0.0);
  EXPECT_THROW(
      mask_mean_iou(truth, BinaryMask(2, 4, std::vector<std::uint8_t>(8, 0))),
      Error);
}

TEST(BceLossTest, Examples) {
  std::mt19937_64 gen(3);
  const auto truth = random_mask(gen, 5, 7);
  EXPECT_NEAR(bce_loss(truth, ProbMask(5, 7, 0.5)), std::log(2.0), 1e-12);
  EXPECT_NEAR(bce_loss(BinaryMask(1, 1, {1}), ProbMask(1, 1, {0.25})),
              -std::log(0.25), 1e-12);
  EXPECT_LE(bce_loss(truth, to_prob_mask(truth)), 1.0001e-7);
  EXPECT_THROW(bce_loss(truth, ProbMask(7, 5, 0.5)), Error);
}

TEST(PresenceScoreTest, Examples) {
  const BBox region(0, 2, 4, 4);
  EXPECT_EQ(train_presence_score(ProbMask(4, 4, 0.9), region), 1.0);
  EXPECT_EQ(train_presence_score(ProbMask(4, 4, 0.1), region), 0.0);
  std::vector<double> v(16, 0.0);
  for (std::size_t y = 2; y < 4; ++y) v[y * 4 + 0] = v[y * 4 + 1] = 1.0;
  EXPECT_EQ(train_presence_score(ProbMask(4, 4, v), region), 0.5);
  EXPECT_THROW(train_presence_score(ProbMask(4, 4, 0.9), BBox(10, 10, 12, 12)),
               Error);
  // Covers the pixel centered at (0.5, 0.5) only.
  EXPECT_EQ(train_presence_score(ProbMask(4, 4, v), BBox(0.4, 2.4, 0.6, 2.6)),
            1.0);
}

TrainSignalState run(const std::vector<bool>& raw, const SignalConfig& cfg,
                     TrainSignalState s = {}) {
  for (bool r : raw) s = update_train_signal(s, r ? 0.5 : 0.0, 0.0, cfg);
  return s;
}

TEST(TrainSignalTest, Examples) {
  const SignalConfig cfg{0.1, 3, 5};
  TrainSignalState s;
  s = update_train_signal(s, 0.5, 0.0, cfg);
  s = update_train_signal(s, 0.0, 0.1, cfg);
  EXPECT_FALSE(s.asserted);
  s = update_train_signal(s, 0.2, 0.2, cfg);
  EXPECT_TRUE(s.asserted);

  s.off_count = 2;
  s = update_train_signal(s, 0.3, 0.0, cfg);
  EXPECT_TRUE(s.asserted);
  EXPECT_EQ(s.off_count, 0u);

  EXPECT_FALSE(run({true, false, true, false, true, false, true}, cfg).asserted);
  EXPECT_TRUE(run({true, true, true, false, false, false, false}, cfg).asserted);
  EXPECT_FALSE(
      run({true, true, true, false, false, false, false, false}, cfg).asserted);
  EXPECT_THROW(validate(SignalConfig{0.1, 0, 5}), Error);
  EXPECT_THROW(validate(SignalConfig{1.5, 3, 5}), Error);
}

TEST(SegmentationProperty, MaskIdentities) {
  std::mt19937_64 gen(17);
  for (int i = 0; i < 300; ++i) {
    const std::size_t w = 1 + gen() % 6, h = 1 + gen() % 6;
    const auto a = random_mask(gen, w, h);
    auto b = gen() % 4 == 0 ? a : random_mask(gen, w, h);
    EXPECT_EQ(threshold_mask(to_prob_mask(a)), a);
    EXPECT_EQ(mask_mean_iou(a, b), mask_mean_iou(b, a));
    EXPECT_DOUBLE_EQ(mask_mean_iou(a, b), oracle_mean_iou(a, b));
    EXPECT_EQ(mask_mean_iou(a, b) == 1.0, a == b);

    // One confidently wrong pixel strictly increases the loss.
    std::vector<double> flipped(a.bits().begin(), a.bits().end());
    const std::size_t k = gen() % flipped.size();
    flipped[k] = 1.0 - flipped[k];
    EXPECT_LT(bce_loss(a, to_prob_mask(a)), bce_loss(a, ProbMask(w, h, flipped)));
  }
}

TEST(SegmentationProperty, PresenceMonotone) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 300; ++i) {
    std::vector<double> v(36);
    for (auto& x : v) x = u(gen);
    const BBox region(u(gen) * 3, u(gen) * 3, 3.5 + u(gen) * 2.5,
                      3.5 + u(gen) * 2.5);
    const double before = train_presence_score(ProbMask(6, 6, v), region);
    auto raised = v;
    const std::size_t k = gen() % v.size();
    raised[k] = std::max(raised[k], u(gen));
    EXPECT_LE(train_presence_score(ProbMask(6, 6, v), region),
              train_presence_score(ProbMask(6, 6, raised), region));
    EXPECT_GE(before, 0.0);
    EXPECT_LE(before, 1.0);
  }
}

TEST(SegmentationProperty, Debounce) {
  std::mt19937_64 gen(23);
  for (int i = 0; i < 300; ++i) {
    const SignalConfig cfg{0.1, static_cast<std::uint32_t>(1 + gen() % 5),
                           static_cast<std::uint32_t>(2 + gen() % 5)};
    // n_on - 1 true frames between false frames never assert.
    std::vector<bool> raw;
    for (int rep = 0; rep < 5; ++rep) {
      raw.insert(raw.end(), cfg.n_on - 1, true);
      raw.push_back(false);
    }
    EXPECT_FALSE(run(raw, cfg).asserted);

    std::vector<bool> on(cfg.n_on, true);
    const auto asserted = run(on, cfg);
    EXPECT_TRUE(asserted.asserted);
    EXPECT_TRUE(run({false, true}, cfg, asserted).asserted);

    // Random traces: compare with a direct run-length oracle.
    TrainSignalState s;
    bool expect = false;
    std::uint32_t streak = 0;
    bool last = false;
    for (int t = 0; t < 60; ++t) {
      const bool r = gen() % 3 != 0 ? (gen() & 1u) : last;
      streak = (t > 0 && r == last) ? streak + 1 : 1;
      last = r;
      if (r && streak >= cfg.n_on) expect = true;
      if (!r && streak >= cfg.n_off) expect = false;
      s = update_train_signal(s, 0.0, r ? 0.1 : 0.0999, cfg);
      ASSERT_EQ(s.asserted, expect);
      EXPECT_FALSE(s.on_count > 0 && s.off_count > 0);
    }
  }
}

}  // namespace
}  // namespace crossguard
