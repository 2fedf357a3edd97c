#include "crossguard/text_format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "crossguard/error.hpp"

namespace crossguard {

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> fields;
};

std::vector<std::string> split(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

bool is_skippable(const std::string& s) {
  const auto pos = s.find_first_not_of(" \t\r");
  return pos == std::string::npos || s[pos] == '#';
}

// Reads content lines, skipping comments and blanks.
std::vector<Line> content_lines(std::istream& in) {
  std::vector<Line> lines;
  std::string raw;
  for (std::size_t n = 1; std::getline(in, raw); ++n) {
    if (is_skippable(raw)) continue;
    lines.push_back({n, split(raw)});
  }
  return lines;
}

double parse_real(const std::string& tok, std::size_t line, const char* what) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw ParseError(line, std::string("invalid ") + what + " '" + tok + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& tok, std::size_t line,
                         const char* what) {
  std::uint64_t v = 0;
  const auto* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ParseError(line, std::string("invalid ") + what + " '" + tok + "'");
  }
  return v;
}

BBox parse_box(const std::vector<std::string>& f, std::size_t first,
               std::size_t line) {
  const double x1 = parse_real(f[first], line, "x1");
  const double y1 = parse_real(f[first + 1], line, "y1");
  const double x2 = parse_real(f[first + 2], line, "x2");
  const double y2 = parse_real(f[first + 3], line, "y2");
  auto box = BBox::try_make(x1, y1, x2, y2);
  if (!box) throw ParseError(line, "degenerate box");
  return *box;
}

std::string box_fields(const BBox& b) {
  return format_real(b.x1()) + ' ' + format_real(b.y1()) + ' ' +
         format_real(b.x2()) + ' ' + format_real(b.y2());
}

template <class F>
void rethrow_at(std::size_t line, F&& f) {
  try {
    f();
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(line, e.what());
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') {
    s.erase(0, 1);
  }
  return s;
}

std::string format_detection(const Detection& d) {
  return std::to_string(d.frame_id) + ' ' + d.source_id + ' ' + d.class_label +
         ' ' + format_real(d.confidence) + ' ' + box_fields(d.box);
}

std::string format_fused(const FusedDetection& f) {
  return format_detection(f.detection) + ' ' +
         std::to_string(f.contributing_sources.size()) + ' ' +
         std::to_string(f.cluster_size);
}

std::string format_truth(const GroundTruthObject& g) {
  return std::to_string(g.frame_id) + ' ' + std::string(kGroundTruthSource) +
         ' ' + g.class_label + ' ' + box_fields(g.box);
}

void write_detection_log(std::ostream& out, std::span<const Detection> dets) {
  for (const auto& d : dets) out << format_detection(d) << '\n';
}

void write_fused_log(std::ostream& out,
                     std::span<const FusedDetection> fused) {
  for (const auto& f : fused) out << format_fused(f) << '\n';
}

void write_truth_log(std::ostream& out,
                     std::span<const GroundTruthObject> truths) {
  for (const auto& g : truths) out << format_truth(g) << '\n';
}

std::vector<Detection> read_detection_log(std::istream& in,
                                          const ClassRegistry& registry) {
  std::vector<Detection> out;
  for (const auto& [n, f] : content_lines(in)) {
    if (f.size() != 8 && f.size() != 10) {
      throw ParseError(n, "expected 8 or 10 fields, got " +
                              std::to_string(f.size()));
    }
    Detection d{parse_uint(f[0], n, "frame id"), f[1], f[2],
                parse_real(f[3], n, "confidence"), parse_box(f, 4, n)};
    if (f.size() == 10) {
      const auto n_sources = parse_uint(f[8], n, "source count");
      const auto n_members = parse_uint(f[9], n, "member count");
      if (n_sources == 0 || n_members < n_sources) {
        throw ParseError(n, "inconsistent fused counts");
      }
    }
    rethrow_at(n, [&] { validate(d, registry); });
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<GroundTruthObject> read_truth_log(std::istream& in,
                                              const ClassRegistry& registry) {
  std::vector<GroundTruthObject> out;
  for (const auto& [n, f] : content_lines(in)) {
    if (f.size() != 7) {
      throw ParseError(n, "expected 7 fields, got " + std::to_string(f.size()));
    }
    if (f[1] != kGroundTruthSource) {
      throw ParseError(n, "ground-truth source must be 'gt'");
    }
    GroundTruthObject g{parse_uint(f[0], n, "frame id"), f[2],
                        parse_box(f, 3, n)};
    rethrow_at(n, [&] { validate(g, registry); });
    out.push_back(std::move(g));
  }
  return out;
}

void write_weights(std::ostream& out, const ModelWeights& w) {
  for (const auto& [source, weight] : w.weights) {
    out << source << ' ' << format_real(weight) << '\n';
  }
}

ModelWeights read_weights(std::istream& in, double alpha) {
  ModelWeights w;
  w.alpha = alpha;
  for (const auto& [n, f] : content_lines(in)) {
    if (f.size() != 2) throw ParseError(n, "expected '<source_id> <weight>'");
    const double v = parse_real(f[1], n, "weight");
    if (v < 0.0) throw ParseError(n, "weight must be non-negative");
    if (!w.weights.emplace(f[0], v).second) {
      throw ParseError(n, "duplicate source '" + f[0] + "'");
    }
  }
  return w;
}

namespace {

template <class Values, class Render>
void write_mask_rows(std::ostream& out, std::size_t width, std::size_t height,
                     const Values& values, Render render) {
  out << "PMASK " << width << ' ' << height << '\n';
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      if (x) out << ' ';
      out << render(values[y * width + x]);
    }
    out << '\n';
  }
}

struct RawMask {
  std::size_t width;
  std::size_t height;
  std::vector<double> values;
  std::vector<std::size_t> value_lines;  // per row
};

RawMask read_raw_mask(std::istream& in) {
  std::string raw;
  std::size_t n = 0;
  std::optional<RawMask> mask;
  while (std::getline(in, raw)) {
    ++n;
    if (!mask) {
      if (is_skippable(raw)) continue;
      const auto f = split(raw);
      if (f.size() != 3 || f[0] != "PMASK") {
        throw ParseError(n, "expected 'PMASK <width> <height>'");
      }
      const auto w = parse_uint(f[1], n, "width");
      const auto h = parse_uint(f[2], n, "height");
      if (w == 0 || h == 0) throw ParseError(n, "mask dimensions must be positive");
      mask = RawMask{w, h, {}, {}};
      mask->values.reserve(w * h);
      continue;
    }
    if (mask->value_lines.size() == mask->height) {
      if (raw.find_first_not_of(" \t\r") != std::string::npos) {
        throw ParseError(n, "unexpected content after the last mask row");
      }
      continue;
    }
    const auto f = split(raw);
    if (f.size() != mask->width) {
      throw ParseError(n, "expected " + std::to_string(mask->width) +
                              " values, got " + std::to_string(f.size()));
    }
    for (const auto& tok : f) {
      const double v = parse_real(tok, n, "mask value");
      if (v < 0.0 || v > 1.0) throw ParseError(n, "mask value out of [0, 1]");
      mask->values.push_back(v);
    }
    mask->value_lines.push_back(n);
  }
  if (!mask) throw ParseError(n + 1, "missing PMASK header");
  if (mask->value_lines.size() != mask->height) {
    throw ParseError(n + 1, "expected " + std::to_string(mask->height) +
                                " rows, got " +
                                std::to_string(mask->value_lines.size()));
  }
  return std::move(*mask);
}

}  // namespace

void write_mask(std::ostream& out, const ProbMask& m) {
  write_mask_rows(out, m.width(), m.height(), m.values(), format_real);
}

void write_mask(std::ostream& out, const BinaryMask& m) {
  write_mask_rows(out, m.width(), m.height(), m.bits(),
                  [](std::uint8_t b) { return b ? '1' : '0'; });
}

ProbMask read_prob_mask(std::istream& in) {
  auto raw = read_raw_mask(in);
  return ProbMask(raw.width, raw.height, std::move(raw.values));
}

BinaryMask read_binary_mask(std::istream& in) {
  const auto raw = read_raw_mask(in);
  std::vector<std::uint8_t> bits;
  bits.reserve(raw.values.size());
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const double v = raw.values[i];
    if (v != 0.0 && v != 1.0) {
      throw ParseError(raw.value_lines[i / raw.width],
                       "binary mask value must be 0 or 1");
    }
    bits.push_back(v == 1.0 ? 1 : 0);
  }
  return BinaryMask(raw.width, raw.height, std::move(bits));
}

void write_signals(std::ostream& out, std::span<const SignalRecord> signals) {
  for (const auto& s : signals) {
    out << s.tick << ' ' << format_real(s.score_cam1) << ' '
        << format_real(s.score_cam2) << '\n';
  }
}

std::vector<SignalRecord> read_signals(std::istream& in) {
  std::vector<SignalRecord> out;
  for (const auto& [n, f] : content_lines(in)) {
    if (f.size() != 3) throw ParseError(n, "expected 'tick score_cam1 score_cam2'");
    SignalRecord r{parse_uint(f[0], n, "tick"), parse_real(f[1], n, "score"),
                   parse_real(f[2], n, "score")};
    for (double s : {r.score_cam1, r.score_cam2}) {
      if (s < 0.0 || s > 1.0) throw ParseError(n, "score out of [0, 1]");
    }
    out.push_back(r);
  }
  return out;
}

void write_event_log(std::ostream& out, std::span<const ControlEvent> events) {
  for (const auto& e : events) out << format_event(e) << '\n';
}

void write_confusion_matrix(std::ostream& out, const ConfusionMatrix& cm) {
  out << "labels";
  for (const auto& l : cm.labels()) out << ' ' << l;
  out << '\n';
  for (std::size_t i = 0; i < cm.size(); ++i) {
    out << cm.labels()[i];
    for (std::size_t j = 0; j < cm.size(); ++j) out << ' ' << format_real(cm.at(i, j));
    out << '\n';
  }
}

ConfusionMatrix read_confusion_matrix(std::istream& in) {
  const auto lines = content_lines(in);
  if (lines.empty() || lines[0].fields.empty() ||
      lines[0].fields[0] != "labels") {
    throw ParseError(lines.empty() ? 1 : lines[0].number,
                     "expected 'labels ...' header");
  }
  std::vector<std::string> labels(lines[0].fields.begin() + 1,
                                  lines[0].fields.end());
  const std::size_t k = labels.size();
  if (lines.size() != k + 1) {
    throw ParseError(lines.back().number,
                     "expected " + std::to_string(k) + " matrix rows");
  }
  std::vector<double> counts;
  for (std::size_t i = 0; i < k; ++i) {
    const auto& [n, f] = lines[i + 1];
    if (f.size() != k + 1 || f[0] != labels[i]) {
      throw ParseError(n, "expected row '" + labels[i] + "' with " +
                              std::to_string(k) + " counts");
    }
    for (std::size_t j = 1; j <= k; ++j) {
      counts.push_back(parse_real(f[j], n, "count"));
    }
  }
  std::optional<ConfusionMatrix> cm;
  rethrow_at(lines[0].number,
             [&] { cm.emplace(std::move(labels), std::move(counts)); });
  return std::move(*cm);
}

}  // namespace crossguard
