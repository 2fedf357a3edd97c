#include "crossguard/fusion.hpp"

#include <algorithm>
#include <set>

#include "crossguard/error.hpp"

namespace crossguard {

double ModelWeights::weight_of(const std::string& source_id) const {
  const auto it = weights.find(source_id);
  return it == weights.end() ? 1.0 : it->second;
}

Detection calibrate_confidence(Detection d, const ModelWeights& w) {
  d.confidence = std::clamp(w.weight_of(d.source_id) * d.confidence, 0.0, 1.0);
  return d;
}

namespace {

struct Cluster {
  std::vector<const Detection*> members;  // canonical order
  FusedDetection fused;
};

// c0 + sum(ci - c0) / n is exact when all members agree.
double mean_confidence(const std::vector<const Detection*>& members) {
  const double c0 = members.front()->confidence;
  double delta = 0.0;
  for (const auto* m : members) delta += m->confidence - c0;
  return std::clamp(c0 + delta / static_cast<double>(members.size()), 0.0,
                    1.0);
}

BBox mean_box(const std::vector<const Detection*>& members) {
  if (members.size() == 1) return members.front()->box;
  double total = 0.0;
  for (const auto* m : members) total += m->confidence;
  const bool uniform = total <= 0.0;
  if (uniform) total = static_cast<double>(members.size());
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;
  for (const auto* m : members) {
    const double w = uniform ? 1.0 : m->confidence;
    x1 += w * m->box.x1();
    y1 += w * m->box.y1();
    x2 += w * m->box.x2();
    y2 += w * m->box.y2();
  }
  return BBox(x1 / total, y1 / total, x2 / total, y2 / total);
}

FusedDetection summarize(const std::vector<const Detection*>& members,
                         std::uint64_t frame_id, std::size_t num_models) {
  std::set<std::string> sources;
  for (const auto* m : members) sources.insert(m->source_id);
  const double agreement =
      static_cast<double>(sources.size()) / static_cast<double>(num_models);
  return FusedDetection{
      Detection{frame_id, std::string(kEnsembleSource),
                members.front()->class_label,
                std::clamp(mean_confidence(members) * agreement, 0.0, 1.0),
                mean_box(members)},
      std::vector<std::string>(sources.begin(), sources.end()),
      members.size()};
}

std::vector<Cluster> cluster_class(std::vector<const Detection*> remaining,
                                   std::uint64_t frame_id,
                                   std::size_t num_models,
                                   double iou_threshold) {
  std::vector<Cluster> clusters;
  while (!remaining.empty()) {
    const Detection* seed = remaining.front();
    std::vector<const Detection*> members;
    std::vector<const Detection*> rest;
    for (const auto* d : remaining) {
      if (d == seed || iou(seed->box, d->box) >= iou_threshold) {
        members.push_back(d);
      } else {
        rest.push_back(d);
      }
    }
    auto fused = summarize(members, frame_id, num_models);
    clusters.push_back({std::move(members), std::move(fused)});
    remaining = std::move(rest);
  }

  // Averaged boxes can drift into each other; merge until separated.
  for (bool merged = true; merged;) {
    merged = false;
    for (std::size_t i = 0; i < clusters.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < clusters.size() && !merged; ++j) {
        if (iou(clusters[i].fused.detection.box,
                clusters[j].fused.detection.box) < iou_threshold) {
          continue;
        }
        auto& into = clusters[i].members;
        into.insert(into.end(), clusters[j].members.begin(),
                    clusters[j].members.end());
        std::sort(into.begin(), into.end(),
                  [](const Detection* a, const Detection* b) {
                    return canonical_before(*a, *b);
                  });
        clusters[i].fused = summarize(into, frame_id, num_models);
        clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(j));
        merged = true;
      }
    }
  }
  return clusters;
}

}  // namespace

std::vector<FusedDetection> fuse_frame(std::span<const Detection> dets,
                                       std::size_t num_models,
                                       double iou_threshold) {
  if (num_models == 0) throw Error("number of models must be positive");
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw Error("iou threshold must lie in (0, 1)");
  }
  if (dets.empty()) return {};

  const std::uint64_t frame_id = dets.front().frame_id;
  std::set<std::string_view> sources;
  for (const auto& d : dets) {
    if (d.frame_id != frame_id) throw Error("heterogeneous frame");
    sources.insert(d.source_id);
  }
  if (num_models < sources.size()) throw Error("K underestimates ensemble");

  std::vector<const Detection*> order;
  order.reserve(dets.size());
  for (const auto& d : dets) order.push_back(&d);
  std::sort(order.begin(), order.end(),
            [](const Detection* a, const Detection* b) {
              return canonical_before(*a, *b);
            });

  // Cross-class boxes never merge.
  std::map<std::string_view, std::vector<const Detection*>> by_class;
  for (const auto* d : order) by_class[d->class_label].push_back(d);

  std::vector<FusedDetection> out;
  for (auto& [label, members] : by_class) {
    for (auto& c : cluster_class(std::move(members), frame_id, num_models,
                                 iou_threshold)) {
      out.push_back(std::move(c.fused));
    }
  }
  std::sort(out.begin(), out.end(),
            [](const FusedDetection& a, const FusedDetection& b) {
              const auto& da = a.detection;
              const auto& db = b.detection;
              if (da.confidence != db.confidence)
                return da.confidence > db.confidence;
              if (da.class_label != db.class_label)
                return da.class_label < db.class_label;
              return da.box < db.box;
            });
  return out;
}

ModelWeights update_model_weights(ModelWeights w,
                                  std::span<const WeightObservation> matches) {
  for (const auto& m : matches) {
    if (m.y != 0 && m.y != 1) {
      throw Error("match label y must be 0 or 1, got " + std::to_string(m.y));
    }
    double& weight = w.weights.try_emplace(m.source_id, 1.0).first->second;
    weight = std::max(0.0, weight + w.alpha * (m.y - m.confidence));
  }
  return w;
}

double ensemble_loss(std::span<const LabeledPrediction> pairs) {
  if (pairs.empty()) throw Error("no instances");
  double loss = 0.0;
  for (const auto& p : pairs) {
    const double r = p.y - p.prediction;
    loss += r * r;
  }
  return loss;
}

}  // namespace crossguard
