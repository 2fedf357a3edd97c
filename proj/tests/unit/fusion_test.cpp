#include "crossguard/fusion.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "crossguard/error.hpp"

namespace crossguard {
namespace {

Detection det(std::string source, std::string cls, double conf, BBox box,
              std::uint64_t frame = 0) {
  return Detection{frame, std::move(source), std::move(cls), conf, box};
}

TEST(CalibrateConfidenceTest, Examples) {
  ModelWeights w;
  const auto d = det("a", "car", 0.8, BBox(0, 0, 1, 1));
  EXPECT_DOUBLE_EQ(calibrate_confidence(d, w).confidence, 0.8);
  w.weights["a"] = 0.5;
  EXPECT_DOUBLE_EQ(calibrate_confidence(d, w).confidence, 0.4);
  w.weights["a"] = 2.0;
  EXPECT_EQ(calibrate_confidence(det("a", "car", 0.7, BBox(0, 0, 1, 1)), w)
                .confidence,
            1.0);
  EXPECT_EQ(calibrate_confidence(d, w).box, d.box);
}

TEST(FuseFrameTest, SingleDetectionIsIdentity) {
  const auto d = det("a", "bus", 0.37, BBox(3.5, 4.25, 10.75, 20));
  const auto out = fuse_frame(std::vector{d}, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].detection.box, d.box);
  EXPECT_EQ(out[0].detection.confidence, 0.37);
  EXPECT_EQ(out[0].detection.source_id, "ensemble");
  EXPECT_EQ(out[0].cluster_size, 1u);
}

TEST(FuseFrameTest, TwoSourcesAgreeing) {
  const std::vector dets{det("a", "car", 0.8, BBox(0, 0, 2, 2)),
                         det("b", "car", 0.6, BBox(0, 0, 2, 2))};
  const auto out = fuse_frame(dets, 2);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].detection.box, BBox(0, 0, 2, 2));
  EXPECT_NEAR(out[0].detection.confidence, 0.7, 1e-15);
  EXPECT_EQ(out[0].cluster_size, 2u);
  EXPECT_EQ(out[0].contributing_sources, (std::vector<std::string>{"a", "b"}));
}

TEST(FuseFrameTest, LowOverlapStaysSeparate) {
  const std::vector dets{det("a", "car", 0.8, BBox(0, 0, 2, 2)),
                         det("b", "car", 0.6, BBox(1, 1, 3, 3))};
  const auto out = fuse_frame(dets, 2);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0].detection.confidence, 0.4);
  EXPECT_DOUBLE_EQ(out[1].detection.confidence, 0.3);
}

TEST(FuseFrameTest, ConfidenceWeightedCoordinates) {
  // 0.75 * 0 + 0.25 * 4 = 1 after normalizing weights.
  const std::vector dets{det("a", "car", 0.75, BBox(0, 0, 10, 10)),
                         det("b", "car", 0.25, BBox(4, 0, 14, 10))};
  const auto out = fuse_frame(dets, 2, 0.3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_DOUBLE_EQ(out[0].detection.box.x1(), 1.0);
  EXPECT_DOUBLE_EQ(out[0].detection.box.x2(), 11.0);
}

TEST(FuseFrameTest, DifferentClassesNeverMerge) {
  const std::vector dets{det("a", "car", 0.8, BBox(0, 0, 2, 2)),
                         det("b", "truck", 0.8, BBox(0, 0, 2, 2))};
  EXPECT_EQ(fuse_frame(dets, 2).size(), 2u);
}

TEST(FuseFrameTest, Errors) {
  const std::vector mixed{det("a", "car", 0.8, BBox(0, 0, 2, 2), 0),
                          det("b", "car", 0.8, BBox(0, 0, 2, 2), 1)};
  EXPECT_THROW(
      {
        try {
          fuse_frame(mixed, 2);
        } catch (const Error& e) {
          EXPECT_STREQ(e.what(), "heterogeneous frame");
          throw;
        }
      },
      Error);
  const std::vector three{det("a", "car", 0.8, BBox(0, 0, 2, 2)),
                          det("b", "car", 0.8, BBox(0, 0, 2, 2)),
                          det("c", "car", 0.8, BBox(0, 0, 2, 2))};
  try {
    fuse_frame(three, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "K underestimates ensemble");
  }
  EXPECT_THROW(fuse_frame(three, 3, 1.0), Error);
  EXPECT_TRUE(fuse_frame(std::vector<Detection>{}, 3).empty());
}

TEST(FuseFrameTest, MergesClustersWhoseAveragesCollide) {
  // Seed A absorbs B, seed C is below threshold against A, yet the averaged
  // AB box overlaps C strongly enough that a second pass must merge them.
  const std::vector dets{det("a", "car", 0.9, BBox(0, 0, 10, 10)),
                         det("b", "car", 0.9, BBox(3, 0, 13, 10)),
                         det("c", "car", 0.8, BBox(5.5, 0, 15.5, 10))};
  // iou(A, C) = 4.5 / 15.5 < 0.35, iou(A, B) = 7 / 13 > 0.35.
  const auto out = fuse_frame(dets, 3, 0.35);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].cluster_size, 3u);
}

TEST(UpdateModelWeightsTest, Examples) {
  ModelWeights w;
  w.alpha = 0.1;
  auto r = update_model_weights(w, std::vector<WeightObservation>{{"a", 0.8, 1}});
  EXPECT_NEAR(r.weights.at("a"), 1.02, 1e-15);
  r = update_model_weights(w, std::vector<WeightObservation>{{"a", 1.0, 1}});
  EXPECT_EQ(r.weights.at("a"), 1.0);
  w.alpha = 0.5;
  w.weights["a"] = 0.1;
  r = update_model_weights(w, std::vector<WeightObservation>{{"a", 0.9, 0}});
  EXPECT_EQ(r.weights.at("a"), 0.0);
  w.alpha = 0.1;
  w.weights["a"] = 1.0;
  r = update_model_weights(w, std::vector<WeightObservation>{{"a", 0.9, 0}});
  EXPECT_NEAR(r.weights.at("a"), 0.91, 1e-12);
  EXPECT_THROW(
      update_model_weights(w, std::vector<WeightObservation>{{"a", 0.9, 2}}),
      Error);
}

TEST(UpdateModelWeightsTest, SequentialInInputOrder) {
  ModelWeights w;
  w.alpha = 1.0;
  w.weights["a"] = 0.2;
  // 0.2 - 0.5 clamps to 0, then 0 + 0.5 = 0.5; reversed order gives 0.2.
  const std::vector<WeightObservation> obs{{"a", 0.5, 0}, {"a", 0.5, 1}};
  EXPECT_DOUBLE_EQ(update_model_weights(w, obs).weights.at("a"), 0.5);
  const std::vector<WeightObservation> rev{{"a", 0.5, 1}, {"a", 0.5, 0}};
  EXPECT_DOUBLE_EQ(update_model_weights(w, rev).weights.at("a"), 0.2);
}

TEST(EnsembleLossTest, Examples) {
  EXPECT_EQ(ensemble_loss(std::vector<LabeledPrediction>{{1, 1.0}, {0, 0.0}}),
            0.0);
  EXPECT_DOUBLE_EQ(
      ensemble_loss(std::vector<LabeledPrediction>{{1, 0.5}, {0, 0.5}}), 0.5);
  EXPECT_EQ(ensemble_loss(std::vector<LabeledPrediction>{{1, 0.0}}), 1.0);
  try {
    ensemble_loss(std::vector<LabeledPrediction>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no instances");
  }
}

TEST(FusionProperty, ShuffleInvariantAndSeparated) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> pos(0, 40), size(2, 15), conf(0, 1);
  const char* classes[] = {"car", "truck"};
  for (int frame = 0; frame < 200; ++frame) {
    std::vector<Detection> dets;
    const int n = static_cast<int>(gen() % 12);
    for (int i = 0; i < n; ++i) {
      const double x = pos(gen), y = pos(gen);
      dets.push_back(det("s" + std::to_string(gen() % 3), classes[gen() % 2],
                         conf(gen), BBox(x, y, x + size(gen), y + size(gen))));
    }
    const auto ref = fuse_frame(dets, 3);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      for (std::size_t j = i + 1; j < ref.size(); ++j) {
        if (ref[i].detection.class_label != ref[j].detection.class_label)
          continue;
        EXPECT_LT(iou(ref[i].detection.box, ref[j].detection.box), 0.5);
      }
    }
    std::shuffle(dets.begin(), dets.end(), gen);
    EXPECT_EQ(fuse_frame(dets, 3), ref);
  }
}

TEST(FusionProperty, IdempotentAndAgreementPreserving) {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> pos(0, 60), conf(0, 1);
  for (int frame = 0; frame < 200; ++frame) {
    std::vector<Detection> dets;
    for (int i = 0; i < 10; ++i) {
      const double x = pos(gen), y = pos(gen);
      dets.push_back(det("s" + std::to_string(gen() % 4), "car", conf(gen),
                         BBox(x, y, x + 12, y + 9)));
    }
    const auto once = fuse_frame(dets, 4);
    const auto twice = fuse_frame(detections_of(once), 1);
    EXPECT_EQ(detections_of(twice), detections_of(once));

    const double c = conf(gen);
    std::vector<Detection> agree;
    for (int s = 0; s < 4; ++s)
      agree.push_back(det("s" + std::to_string(s), "bus", c, BBox(5, 5, 25, 15)));
    const auto one = fuse_frame(agree, 4);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].detection.confidence, c);
  }
}

TEST(WeightDynamicsProperty, MonotoneTowardsLabel) {
  for (double c : {0.0, 0.3, 0.9}) {
    ModelWeights up;
    up.alpha = 0.05;
    ModelWeights down = up;
    for (int i = 0; i < 100; ++i) {
      const double before_up = up.weight_of("a");
      const double before_down = down.weight_of("a");
      up = update_model_weights(up, std::vector<WeightObservation>{{"a", c, 1}});
      down = update_model_weights(down,
                                  std::vector<WeightObservation>{{"a", c, 0}});
      EXPECT_GT(up.weight_of("a"), before_up);
      if (c > 0.0 && before_down > 0.0) {
        EXPECT_LT(down.weight_of("a"), before_down);
      } else {
        EXPECT_EQ(down.weight_of("a"), before_down);
      }
      EXPECT_GE(down.weight_of("a"), 0.0);
    }
  }
}

}  // namespace
}  // namespace crossguard
