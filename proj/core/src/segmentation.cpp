#include "crossguard/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "crossguard/error.hpp"

namespace crossguard {

namespace {

void check_dims(std::size_t w, std::size_t h, std::size_t n) {
  if (w == 0 || h == 0) throw Error("mask dimensions must be positive");
  if (n != w * h) throw Error("mask value count does not match dimensions");
}

template <class A, class B>
void check_same_dims(const A& a, const B& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error("mask dimension mismatch");
  }
}

}  // namespace

ProbMask::ProbMask(std::size_t width, std::size_t height,
                   std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width_, height_, values_.size());
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error("mask probability out of [0, 1]");
  }
}

ProbMask::ProbMask(std::size_t width, std::size_t height, double fill)
    : ProbMask(width, height, std::vector<double>(width * height, fill)) {}

BinaryMask::BinaryMask(std::size_t width, std::size_t height,
                       std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width_, height_, bits_.size());
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

ProbMask to_prob_mask(const BinaryMask& m) {
  std::vector<double> v(m.bits().begin(), m.bits().end());
  return ProbMask(m.width(), m.height(), std::move(v));
}

BinaryMask threshold_mask(const ProbMask& m) {
  std::vector<std::uint8_t> bits;
  bits.reserve(m.values().size());
  for (double v : m.values()) bits.push_back(v > 0.5 ? 1 : 0);
  return BinaryMask(m.width(), m.height(), std::move(bits));
}

double mask_mean_iou(const BinaryMask& pred, const BinaryMask& truth) {
  check_same_dims(pred, truth);
  // inter[c], uni[c] for c = background (0), object (1).
  std::size_t inter[2] = {0, 0};
  std::size_t uni[2] = {0, 0};
  const auto p = pred.bits();
  const auto t = truth.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      const bool in_p = p[i] == c;
      const bool in_t = t[i] == c;
      inter[c] += (in_p && in_t) ? 1 : 0;
      uni[c] += (in_p || in_t) ? 1 : 0;
    }
  }
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    sum += uni[c] == 0 ? 1.0
                       : static_cast<double>(inter[c]) /
                             static_cast<double>(uni[c]);
  }
  return sum / 2.0;
}

double bce_loss(const BinaryMask& truth, const ProbMask& pred) {
  check_same_dims(truth, pred);
  const auto y = truth.bits();
  const auto p = pred.values();
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double q = std::clamp(p[i], kBceEpsilon, 1.0 - kBceEpsilon);
    total += y[i] != 0 ? -std::log(q) : -std::log(1.0 - q);
  }
  return total / static_cast<double>(y.size());
}

double train_presence_score(const ProbMask& m, const BBox& track_region) {
  // Pixel (x, y) has its center at (x + 0.5, y + 0.5).
  const auto first = [](double lo) {
    return static_cast<long long>(std::ceil(lo - 0.5));
  };
  const auto past_last = [](double hi) {
    return static_cast<long long>(std::ceil(hi - 0.5));
  };
  const long long w = static_cast<long long>(m.width());
  const long long h = static_cast<long long>(m.height());
  const long long x0 = std::max(0LL, first(track_region.x1()));
  const long long x1 = std::min(w, past_last(track_region.x2()));
  const long long y0 = std::max(0LL, first(track_region.y1()));
  const long long y1 = std::min(h, past_last(track_region.y2()));
  if (x0 >= x1 || y0 >= y1) {
    throw Error("track region covers no pixel of the mask");
  }
  std::size_t object = 0;
  for (long long y = y0; y < y1; ++y) {
    for (long long x = x0; x < x1; ++x) {
      if (m.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) > 0.5)
        ++object;
    }
  }
  const auto count = static_cast<double>((x1 - x0) * (y1 - y0));
  return static_cast<double>(object) / count;
}

void validate(const SignalConfig& config) {
  if (!(config.score_threshold >= 0.0 && config.score_threshold <= 1.0)) {
    throw Error("score threshold out of [0, 1]");
  }
  if (config.n_on == 0 || config.n_off == 0) {
    throw Error("debounce counts must be positive");
  }
}

TrainSignalState update_train_signal(TrainSignalState state, double score_cam1,
                                     double score_cam2,
                                     const SignalConfig& config) {
  const bool raw = score_cam1 >= config.score_threshold ||
                   score_cam2 >= config.score_threshold;
  if (raw) {
    ++state.on_count;
    state.off_count = 0;
    if (!state.asserted && state.on_count >= config.n_on) state.asserted = true;
  } else {
    ++state.off_count;
    state.on_count = 0;
    if (state.asserted && state.off_count >= config.n_off) {
      state.asserted = false;
    }
  }
  return state;
}

}  // namespace crossguard
