#pragma once

#include <cstdint>
#include <vector>

#include "crossguard/controller.hpp"
#include "crossguard/detection.hpp"

namespace crossguard::cli {

struct ThroughputConfig {
  std::size_t frames = 20000;
  std::size_t sources = 3;
  std::size_t detections_per_source = 20;
  std::uint64_t seed = 7;
};

struct ThroughputResult {
  std::size_t frames = 0;
  double seconds = 0.0;
  double frames_per_second = 0.0;
};

/// Synthetic per-frame workload: each source reports jittered copies of a
/// shared set of objects. Frames are generated up front and not timed.
std::vector<std::vector<Detection>> make_workload(const ThroughputConfig& c);

/// Times fuse_frame plus one controller step per frame.
ThroughputResult measure_throughput(const ThroughputConfig& c);

}  // namespace crossguard::cli
