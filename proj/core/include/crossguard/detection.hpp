#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "crossguard/classes.hpp"
#include "crossguard/geometry.hpp"

namespace crossguard {

/// One classified, scored box from one detector source in one frame.
struct Detection {
  std::uint64_t frame_id = 0;
  std::string source_id;
  std::string class_label;
  double confidence = 0.0;
  BBox box;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Output of ensemble fusion. `detection.source_id` is always `ensemble`.
struct FusedDetection {
  Detection detection;
  std::vector<std::string> contributing_sources;  // sorted, unique
  std::size_t cluster_size = 1;

  friend bool operator==(const FusedDetection&, const FusedDetection&) =
      default;
};

struct GroundTruthObject {
  std::uint64_t frame_id = 0;
  std::string class_label;
  BBox box;

  friend bool operator==(const GroundTruthObject&,
                         const GroundTruthObject&) = default;
};

/// Throws Error if the confidence is outside [0, 1], the source id is not a
/// token, or the class is not registered.
void validate(const Detection& d,
              const ClassRegistry& registry = ClassRegistry::standard());
void validate(const GroundTruthObject& g,
              const ClassRegistry& registry = ClassRegistry::standard());

/// Canonical processing order: confidence descending, then source id,
/// box coordinates and class label ascending.
bool canonical_before(const Detection& a, const Detection& b) noexcept;

std::vector<Detection> detections_of(const std::vector<FusedDetection>& fused);

}  // namespace crossguard
