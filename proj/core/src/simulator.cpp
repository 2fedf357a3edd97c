#include "crossguard/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "crossguard/report.hpp"

namespace crossguard {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double uniform(std::mt19937_64& gen, double lo, double hi) {
  return lo + (hi - lo) * std::generate_canonical<double, 64>(gen);
}

double gaussian(std::mt19937_64& gen, double mean, double sigma) {
  if (sigma <= 0.0) return mean;
  return std::normal_distribution<double>(mean, sigma)(gen);
}

BBox quantized(const BBox& b) {
  return BBox(quantize(b.x1()), quantize(b.y1()), quantize(b.x2()),
              quantize(b.y2()));
}

std::optional<BBox> clip(double x1, double y1, double x2, double y2,
                         const Scenario& s) {
  const auto w = static_cast<double>(s.frame_width);
  const auto h = static_cast<double>(s.frame_height);
  return BBox::try_make(std::clamp(x1, 0.0, w), std::clamp(y1, 0.0, h),
                        std::clamp(x2, 0.0, w), std::clamp(y2, 0.0, h));
}

}  // namespace

std::optional<BBox> ObjectTrack::box_at(std::uint64_t tick) const {
  if (tick < start_tick || tick > end_tick) return std::nullopt;
  if (tick == start_tick || start_tick == end_tick) return start_box;
  if (tick == end_tick) return end_box;
  const double f = static_cast<double>(tick - start_tick) /
                   static_cast<double>(end_tick - start_tick);
  const auto lerp = [f](double a, double b) { return a + (b - a) * f; };
  return BBox(lerp(start_box.x1(), end_box.x1()),
              lerp(start_box.y1(), end_box.y1()),
              lerp(start_box.x2(), end_box.x2()),
              lerp(start_box.y2(), end_box.y2()));
}

bool Scenario::train_active(std::uint64_t tick) const noexcept {
  return std::any_of(train_windows.begin(), train_windows.end(),
                     [tick](const TrainWindow& w) {
                       return w.start <= tick && tick < w.end;
                     });
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t tick,
                           std::string_view stream) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ tick);
  h = splitmix64(h ^ fnv1a(stream));
  return std::mt19937_64(h);
}

double quantize(double v) {
  return std::round(v * 1e6) / 1e6 + 0.0;
}

BBox mask_track_region(const Scenario& s) {
  const double sx = static_cast<double>(s.mask_width) /
                    static_cast<double>(s.frame_width);
  const double sy = static_cast<double>(s.mask_height) /
                    static_cast<double>(s.frame_height);
  const auto& r = s.track_region;
  return BBox(r.x1() * sx, r.y1() * sy, r.x2() * sx, r.y2() * sy);
}

std::vector<GroundTruthObject> ground_truth_at(const Scenario& s,
                                               std::uint64_t tick) {
  if (tick >= s.num_frames) {
    throw Error("tick " + std::to_string(tick) + " out of range");
  }
  std::vector<GroundTruthObject> out;
  for (const auto& track : s.objects) {
    const auto box = track.box_at(tick);
    if (!box) continue;
    const auto clipped = clip(box->x1(), box->y1(), box->x2(), box->y2(), s);
    if (!clipped) continue;
    const auto q = BBox::try_make(quantize(clipped->x1()), quantize(clipped->y1()),
                                  quantize(clipped->x2()), quantize(clipped->y2()));
    if (!q) continue;
    out.push_back({tick, track.class_label, *q});
  }
  return out;
}

std::vector<Detection> simulate_detections(const Scenario& s,
                                           std::uint64_t tick) {
  const auto truths = ground_truth_at(s, tick);
  const auto& noise = s.detector;
  const auto labels = ClassRegistry::standard().labels();
  const auto w = static_cast<double>(s.frame_width);
  const auto h = static_cast<double>(s.frame_height);

  std::vector<Detection> out;
  for (const auto& source : noise.sources) {
    auto gen = stream_rng(s.seed, tick, "det/" + source.id);
    for (const auto& truth : truths) {
      const bool detected = uniform(gen, 0.0, 1.0) < source.p_detect;
      if (!detected) continue;
      const double sigma = noise.box_jitter_sigma;
      double x1 = gaussian(gen, truth.box.x1(), sigma);
      double y1 = gaussian(gen, truth.box.y1(), sigma);
      double x2 = gaussian(gen, truth.box.x2(), sigma);
      double y2 = gaussian(gen, truth.box.y2(), sigma);
      if (x1 > x2) std::swap(x1, x2);
      if (y1 > y2) std::swap(y1, y2);
      const double conf = uniform(gen, noise.tp_conf.first, noise.tp_conf.second);
      auto box = clip(x1, y1, x2, y2, s);
      // Boxes thinner than a pixel count as a miss for this source.
      if (!box || box->width() < 1.0 || box->height() < 1.0) continue;
      out.push_back({tick, source.id, truth.class_label, quantize(conf),
                     quantized(*box)});
    }
    if (noise.fp_rate_lambda > 0.0) {
      const int n = std::poisson_distribution<int>(noise.fp_rate_lambda)(gen);
      for (int i = 0; i < n; ++i) {
        const double bw = uniform(gen, 0.05 * w, 0.25 * w);
        const double bh = uniform(gen, 0.05 * h, 0.25 * h);
        const double x1 = uniform(gen, 0.0, w - bw);
        const double y1 = uniform(gen, 0.0, h - bh);
        const auto label = labels[std::uniform_int_distribution<std::size_t>(
            0, labels.size() - 1)(gen)];
        const double conf =
            uniform(gen, noise.fp_conf.first, noise.fp_conf.second);
        out.push_back({tick, source.id, label, quantize(conf),
                       quantized(BBox(x1, y1, x1 + bw, y1 + bh))});
      }
    }
  }
  return out;
}

std::pair<ProbMask, ProbMask> simulate_masks(const Scenario& s,
                                             std::uint64_t tick) {
  if (tick >= s.num_frames) {
    throw Error("tick " + std::to_string(tick) + " out of range");
  }
  const BBox region = mask_track_region(s);
  const bool train = s.train_active(tick);
  const auto render = [&](std::string_view camera) {
    auto gen = stream_rng(s.seed, tick, camera);
    std::vector<double> values;
    values.reserve(s.mask_width * s.mask_height);
    for (std::size_t y = 0; y < s.mask_height; ++y) {
      const double cy = static_cast<double>(y) + 0.5;
      for (std::size_t x = 0; x < s.mask_width; ++x) {
        const double cx = static_cast<double>(x) + 0.5;
        const bool inside = train && cx >= region.x1() && cx < region.x2() &&
                            cy >= region.y1() && cy < region.y2();
        const double v =
            inside ? gaussian(gen, s.mask.object_mean, s.mask.object_sigma)
                   : gaussian(gen, s.mask.background_mean,
                              s.mask.background_sigma);
        values.push_back(quantize(std::clamp(v, 0.0, 1.0)));
      }
    }
    return ProbMask(s.mask_width, s.mask_height, std::move(values));
  };
  return {render("mask/cam1"), render("mask/cam2")};
}

namespace {

std::filesystem::path mask_path(const std::filesystem::path& dir,
                                std::string_view camera, std::uint64_t tick) {
  char name[64];
  std::snprintf(name, sizeof name, "%s_%06llu.pmask",
                std::string(camera).c_str(),
                static_cast<unsigned long long>(tick));
  return dir / "masks" / name;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  return out;
}

}  // namespace

EpisodeArtifacts run_simulation(const Scenario& s,
                                const SimulationOptions& options) {
  validate(s);
  validate(s.controller);
  if (options.out_dir && options.mask_every > 0) {
    std::filesystem::create_directories(*options.out_dir / "masks");
  }

  EpisodeArtifacts a;
  const BBox region = mask_track_region(s);
  const std::size_t k = s.detector.sources.size();
  a.states.reserve(s.num_frames);

  for (std::uint64_t tick = 0; tick < s.num_frames; ++tick) {
    auto truths = ground_truth_at(s, tick);
    auto dets = simulate_detections(s, tick);

    std::vector<Detection> calibrated;
    calibrated.reserve(dets.size());
    for (const auto& d : dets) {
      calibrated.push_back(calibrate_confidence(d, options.weights));
    }
    auto fused = fuse_frame(calibrated, k, s.iou_threshold);
    // Downstream consumers see exactly what fused.log records.
    for (auto& f : fused) {
      f.detection.confidence = quantize(f.detection.confidence);
      f.detection.box = quantized(f.detection.box);
    }

    const auto [cam1, cam2] = simulate_masks(s, tick);
    const SignalRecord signal{tick,
                              quantize(train_presence_score(cam1, region)),
                              quantize(train_presence_score(cam2, region))};
    if (options.out_dir && options.mask_every > 0 &&
        tick % options.mask_every == 0) {
      auto o1 = open_out(mask_path(*options.out_dir, "cam1", tick));
      write_mask(o1, cam1);
      auto o2 = open_out(mask_path(*options.out_dir, "cam2", tick));
      write_mask(o2, cam2);
    }

    TickInput input{signal.score_cam1, signal.score_cam2, detections_of(fused),
                    s.roi};
    auto result = step(a.final_state, input, s.controller);
    a.final_state = result.state;
    a.states.push_back(result.state);
    a.events.insert(a.events.end(), result.events.begin(), result.events.end());
    a.signals.push_back(signal);
    a.ground_truth.insert(a.ground_truth.end(), truths.begin(), truths.end());
    a.detections.insert(a.detections.end(), dets.begin(), dets.end());
    a.fused.insert(a.fused.end(), fused.begin(), fused.end());
  }

  a.evaluation = evaluate(detections_of(a.fused), a.ground_truth,
                          kDefaultMatchIou);
  if (options.out_dir) write_artifacts(a, *options.out_dir);
  return a;
}

void write_artifacts(const EpisodeArtifacts& a,
                     const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_out(dir / "gt.log");
    write_truth_log(out, a.ground_truth);
  }
  {
    auto out = open_out(dir / "detections.log");
    write_detection_log(out, a.detections);
  }
  {
    auto out = open_out(dir / "fused.log");
    write_fused_log(out, a.fused);
  }
  {
    auto out = open_out(dir / "signals.txt");
    write_signals(out, a.signals);
  }
  {
    auto out = open_out(dir / "events.log");
    write_event_log(out, a.events);
  }
  {
    auto out = open_out(dir / "report.txt");
    write_report(out, a.evaluation);
  }
}

}  // namespace crossguard
