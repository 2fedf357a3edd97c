#include "throughput.hpp"

#include <chrono>
#include <random>
#include <string>

#include "crossguard/fusion.hpp"

namespace crossguard::cli {

std::vector<std::vector<Detection>> make_workload(const ThroughputConfig& c) {
  std::mt19937_64 gen(c.seed);
  std::uniform_real_distribution<double> pos(0.0, 560.0);
  std::uniform_real_distribution<double> size(20.0, 80.0);
  std::uniform_real_distribution<double> conf(0.3, 0.95);
  std::normal_distribution<double> jitter(0.0, 2.0);
  const auto& labels = ClassRegistry::standard().labels();

  // A small pool of frames is enough; the timed loop cycles through it.
  const std::size_t pool = std::min<std::size_t>(c.frames, 256);
  std::vector<std::vector<Detection>> frames(pool);
  for (std::size_t f = 0; f < pool; ++f) {
    std::vector<BBox> objects;
    std::vector<std::string> classes;
    for (std::size_t i = 0; i < c.detections_per_source; ++i) {
      const double x = pos(gen), y = pos(gen) * 0.75;
      objects.emplace_back(x, y, x + size(gen), y + size(gen));
      classes.push_back(labels[gen() % labels.size()]);
    }
    for (std::size_t s = 0; s < c.sources; ++s) {
      for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& b = objects[i];
        const double x1 = b.x1() + jitter(gen), y1 = b.y1() + jitter(gen);
        frames[f].push_back(Detection{f, "model" + std::to_string(s),
                                      classes[i], conf(gen),
                                      BBox(x1, y1, x1 + b.width(),
                                           y1 + b.height())});
      }
    }
  }
  return frames;
}

ThroughputResult measure_throughput(const ThroughputConfig& c) {
  const auto pool = make_workload(c);
  const ControllerConfig config;
  const BBox roi(200, 150, 440, 330);
  CrossingState state;
  volatile std::size_t sink = 0;

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t f = 0; f < c.frames; ++f) {
    const auto& dets = pool[f % pool.size()];
    const auto fused = fuse_frame(dets, c.sources);
    TickInput input{(f / 50) % 2 ? 0.8 : 0.0, 0.0, detections_of(fused), roi};
    auto r = step(state, input, config);
    state = r.state;
    sink = sink + fused.size() + r.events.size();
  }
  const auto stop = std::chrono::steady_clock::now();

  ThroughputResult result;
  result.frames = c.frames;
  result.seconds = std::chrono::duration<double>(stop - start).count();
  result.frames_per_second =
      result.seconds > 0.0 ? static_cast<double>(c.frames) / result.seconds
                           : 0.0;
  return result;
}

}  // namespace crossguard::cli
