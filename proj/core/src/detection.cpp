#include "crossguard/detection.hpp"

#include <cmath>

#include "crossguard/error.hpp"

namespace crossguard {

void validate(const Detection& d, const ClassRegistry& registry) {
  if (!is_token(d.source_id)) {
    throw Error("source id must be a non-empty token");
  }
  if (!registry.contains(d.class_label)) {
    throw Error("unregistered class '" + d.class_label + "'");
  }
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw Error("confidence out of [0, 1]");
  }
}

void validate(const GroundTruthObject& g, const ClassRegistry& registry) {
  if (!registry.contains(g.class_label)) {
    throw Error("unregistered class '" + g.class_label + "'");
  }
}

bool canonical_before(const Detection& a, const Detection& b) noexcept {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.source_id != b.source_id) return a.source_id < b.source_id;
  if (a.box != b.box) return a.box < b.box;
  if (a.class_label != b.class_label) return a.class_label < b.class_label;
  return a.frame_id < b.frame_id;
}

std::vector<Detection> detections_of(const std::vector<FusedDetection>& fused) {
  std::vector<Detection> out;
  out.reserve(fused.size());
  for (const auto& f : fused) out.push_back(f.detection);
  return out;
}

}  // namespace crossguard
