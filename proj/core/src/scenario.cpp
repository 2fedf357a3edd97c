#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "crossguard/simulator.hpp"

namespace crossguard {

namespace {

bool inside_frame(const BBox& b, const Scenario& s) {
  return b.x1() >= 0.0 && b.y1() >= 0.0 &&
         b.x2() <= static_cast<double>(s.frame_width) &&
         b.y2() <= static_cast<double>(s.frame_height);
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void require(bool ok, const char* key, const std::string& what) {
  if (!ok) throw ScenarioError(key, what);
}

}  // namespace

void validate(const Scenario& s) {
  require(s.frame_width > 0 && s.frame_height > 0, "frame",
          "dimensions must be positive");
  require(s.num_frames > 0, "frames", "must be positive");
  require(inside_frame(s.roi, s), "roi", "must lie inside the frame");
  require(inside_frame(s.track_region, s), "track_region",
          "must lie inside the frame");
  require(s.mask_width > 0 && s.mask_height > 0, "mask_size",
          "dimensions must be positive");
  {
    // Must cover at least one mask pixel center.
    const BBox r = mask_track_region(s);
    const auto covers = [](double lo, double hi) {
      return std::ceil(lo - 0.5) < std::ceil(hi - 0.5);
    };
    require(covers(r.x1(), r.x2()) && covers(r.y1(), r.y2()), "track_region",
            "covers no mask pixel");
  }
  for (const auto& w : s.train_windows) {
    require(w.start < w.end && w.end <= s.num_frames, "train_window",
            "must satisfy 0 <= start < end <= frames");
  }
  for (const auto& o : s.objects) {
    require(ClassRegistry::standard().contains(o.class_label), "object",
            "unregistered class '" + o.class_label + "'");
    require(o.start_tick <= o.end_tick, "object", "t0 must not exceed t1");
  }
  require(!s.detector.sources.empty(), "source", "at least one is required");
  std::set<std::string> ids;
  for (const auto& src : s.detector.sources) {
    require(is_token(src.id) && src.id != kEnsembleSource &&
                src.id != kGroundTruthSource,
            "source", "invalid source id '" + src.id + "'");
    require(ids.insert(src.id).second, "source",
            "duplicate source id '" + src.id + "'");
    require(in_unit(src.p_detect), "source", "p_detect out of [0, 1]");
  }
  const auto& d = s.detector;
  require(d.box_jitter_sigma >= 0.0, "jitter_sigma", "must be non-negative");
  require(d.fp_rate_lambda >= 0.0, "fp_lambda", "must be non-negative");
  require(in_unit(d.tp_conf.first) && in_unit(d.tp_conf.second) &&
              d.tp_conf.first <= d.tp_conf.second,
          "tp_conf", "need 0 <= lo <= hi <= 1");
  require(in_unit(d.fp_conf.first) && in_unit(d.fp_conf.second) &&
              d.fp_conf.first <= d.fp_conf.second,
          "fp_conf", "need 0 <= lo <= hi <= 1");
  require(in_unit(s.mask.object_mean) && s.mask.object_sigma >= 0.0,
          "mask_obj", "need mean in [0, 1] and sigma >= 0");
  require(in_unit(s.mask.background_mean) && s.mask.background_sigma >= 0.0,
          "mask_bg", "need mean in [0, 1] and sigma >= 0");
  require(s.iou_threshold > 0.0 && s.iou_threshold < 1.0, "iou_threshold",
          "must lie in (0, 1)");
  require(in_unit(s.controller.signal.score_threshold), "score_threshold",
          "must lie in [0, 1]");
  require(s.controller.signal.n_on > 0, "n_on", "must be positive");
  require(s.controller.signal.n_off > 0, "n_off", "must be positive");
  require(in_unit(s.controller.min_confidence), "min_confidence",
          "must lie in [0, 1]");
}

namespace {

class Values {
 public:
  Values(std::string key, const std::string& text) : key_(std::move(key)) {
    std::istringstream is(text);
    for (std::string tok; is >> tok;) tokens_.push_back(tok);
  }

  void expect(std::size_t n) const {
    if (tokens_.size() != n) {
      throw ScenarioError(key_, "expected " + std::to_string(n) +
                                    " values, got " +
                                    std::to_string(tokens_.size()));
    }
  }

  double real(std::size_t i) const {
    double v = 0.0;
    const auto& t = tokens_[i];
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size() || !std::isfinite(v)) {
      throw ScenarioError(key_, "invalid number '" + t + "'");
    }
    return v;
  }

  std::uint64_t uint(std::size_t i) const {
    std::uint64_t v = 0;
    const auto& t = tokens_[i];
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size()) {
      throw ScenarioError(key_, "invalid integer '" + t + "'");
    }
    return v;
  }

  const std::string& text(std::size_t i) const { return tokens_[i]; }

  BBox box(std::size_t first) const {
    auto b = BBox::try_make(real(first), real(first + 1), real(first + 2),
                            real(first + 3));
    if (!b) throw ScenarioError(key_, "degenerate box");
    return *b;
  }

 private:
  std::string key_;
  std::vector<std::string> tokens_;
};

const std::set<std::string>& list_keys() {
  static const std::set<std::string> keys{"train_window", "object", "source"};
  return keys;
}

}  // namespace

Scenario parse_scenario(std::istream& in) {
  Scenario s;
  std::set<std::string> seen;
  std::string raw;
  for (std::size_t n = 1; std::getline(in, raw); ++n) {
    const auto first = raw.find_first_not_of(" \t\r");
    if (first == std::string::npos || raw[first] == '#') continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) {
      throw ScenarioError("line " + std::to_string(n), "expected 'key = value'");
    }
    std::istringstream key_stream(raw.substr(0, eq));
    std::string key;
    key_stream >> key;
    if (key.empty()) {
      throw ScenarioError("line " + std::to_string(n), "missing key");
    }
    const Values v(key, raw.substr(eq + 1));
    if (!list_keys().count(key) && !seen.insert(key).second) {
      throw ScenarioError(key, "given more than once");
    }
    seen.insert(key);

    if (key == "frame") {
      v.expect(2);
      s.frame_width = v.uint(0);
      s.frame_height = v.uint(1);
    } else if (key == "roi") {
      v.expect(4);
      s.roi = v.box(0);
    } else if (key == "track_region") {
      v.expect(4);
      s.track_region = v.box(0);
    } else if (key == "frames") {
      v.expect(1);
      s.num_frames = v.uint(0);
    } else if (key == "seed") {
      v.expect(1);
      s.seed = v.uint(0);
    } else if (key == "train_window") {
      v.expect(2);
      s.train_windows.push_back({v.uint(0), v.uint(1)});
    } else if (key == "object") {
      v.expect(11);
      s.objects.push_back({v.text(0), v.uint(1), v.box(2), v.uint(6), v.box(7)});
    } else if (key == "source") {
      v.expect(2);
      s.detector.sources.push_back({v.text(0), v.real(1)});
    } else if (key == "jitter_sigma") {
      v.expect(1);
      s.detector.box_jitter_sigma = v.real(0);
    } else if (key == "fp_lambda") {
      v.expect(1);
      s.detector.fp_rate_lambda = v.real(0);
    } else if (key == "tp_conf") {
      v.expect(2);
      s.detector.tp_conf = {v.real(0), v.real(1)};
    } else if (key == "fp_conf") {
      v.expect(2);
      s.detector.fp_conf = {v.real(0), v.real(1)};
    } else if (key == "mask_obj") {
      v.expect(2);
      s.mask.object_mean = v.real(0);
      s.mask.object_sigma = v.real(1);
    } else if (key == "mask_bg") {
      v.expect(2);
      s.mask.background_mean = v.real(0);
      s.mask.background_sigma = v.real(1);
    } else if (key == "mask_size") {
      v.expect(2);
      s.mask_width = v.uint(0);
      s.mask_height = v.uint(1);
    } else if (key == "iou_threshold") {
      v.expect(1);
      s.iou_threshold = v.real(0);
    } else if (key == "score_threshold") {
      v.expect(1);
      s.controller.signal.score_threshold = v.real(0);
    } else if (key == "n_on") {
      v.expect(1);
      s.controller.signal.n_on = static_cast<std::uint32_t>(v.uint(0));
    } else if (key == "n_off") {
      v.expect(1);
      s.controller.signal.n_off = static_cast<std::uint32_t>(v.uint(0));
    } else if (key == "min_confidence") {
      v.expect(1);
      s.controller.min_confidence = v.real(0);
    } else {
      throw ScenarioError(key, "unknown key");
    }
  }
  for (const char* key : {"frame", "roi", "track_region", "frames", "source"}) {
    if (!seen.count(key)) throw ScenarioError(key, "missing");
  }
  validate(s);
  return s;
}

void write_scenario(std::ostream& out, const Scenario& s) {
  const auto box = [](const BBox& b) {
    return format_real(b.x1()) + ' ' + format_real(b.y1()) + ' ' +
           format_real(b.x2()) + ' ' + format_real(b.y2());
  };
  out << "frame = " << s.frame_width << ' ' << s.frame_height << '\n'
      << "roi = " << box(s.roi) << '\n'
      << "track_region = " << box(s.track_region) << '\n'
      << "frames = " << s.num_frames << '\n'
      << "seed = " << s.seed << '\n'
      << "mask_size = " << s.mask_width << ' ' << s.mask_height << '\n';
  for (const auto& w : s.train_windows) {
    out << "train_window = " << w.start << ' ' << w.end << '\n';
  }
  for (const auto& o : s.objects) {
    out << "object = " << o.class_label << ' ' << o.start_tick << ' '
        << box(o.start_box) << ' ' << o.end_tick << ' ' << box(o.end_box)
        << '\n';
  }
  for (const auto& src : s.detector.sources) {
    out << "source = " << src.id << ' ' << format_real(src.p_detect) << '\n';
  }
  const auto& d = s.detector;
  out << "jitter_sigma = " << format_real(d.box_jitter_sigma) << '\n'
      << "fp_lambda = " << format_real(d.fp_rate_lambda) << '\n'
      << "tp_conf = " << format_real(d.tp_conf.first) << ' '
      << format_real(d.tp_conf.second) << '\n'
      << "fp_conf = " << format_real(d.fp_conf.first) << ' '
      << format_real(d.fp_conf.second) << '\n'
      << "mask_obj = " << format_real(s.mask.object_mean) << ' '
      << format_real(s.mask.object_sigma) << '\n'
      << "mask_bg = " << format_real(s.mask.background_mean) << ' '
      << format_real(s.mask.background_sigma) << '\n'
      << "iou_threshold = " << format_real(s.iou_threshold) << '\n'
      << "score_threshold = "
      << format_real(s.controller.signal.score_threshold) << '\n'
      << "n_on = " << s.controller.signal.n_on << '\n'
      << "n_off = " << s.controller.signal.n_off << '\n'
      << "min_confidence = " << format_real(s.controller.min_confidence)
      << '\n';
}

}  // namespace crossguard
