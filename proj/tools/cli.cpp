#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "crossguard/controller.hpp"
#include "crossguard/error.hpp"
#include "crossguard/fusion.hpp"
#include "crossguard/metrics.hpp"
#include "crossguard/report.hpp"
#include "crossguard/segmentation.hpp"
#include "crossguard/simulator.hpp"
#include "crossguard/text_format.hpp"
#include "throughput.hpp"

namespace crossguard::cli {

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

// Prefixes parse errors with the file name.
template <class F>
auto read_file(const std::string& path, F&& reader) {
  auto in = open_in(path);
  try {
    return reader(in);
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

template <class T>
std::map<std::uint64_t, std::vector<T>> group_by_frame(const std::vector<T>& xs) {
  std::map<std::uint64_t, std::vector<T>> out;
  for (const auto& x : xs) out[x.frame_id].push_back(x);
  return out;
}

std::size_t distinct_sources(const std::vector<Detection>& dets) {
  std::set<std::string> s;
  for (const auto& d : dets) s.insert(d.source_id);
  return s.size();
}

// ---------------------------------------------------------------- fuse

struct FuseArgs {
  std::string in, out, weights;
  double iou_thresh = kDefaultFusionIou;
  std::size_t models = 0;
};

std::vector<FusedDetection> fuse_log(const std::vector<Detection>& dets,
                                     const ModelWeights& weights,
                                     std::size_t models, double iou_thresh) {
  std::vector<FusedDetection> out;
  for (const auto& [frame, frame_dets] : group_by_frame(dets)) {
    std::vector<Detection> calibrated;
    for (const auto& d : frame_dets) {
      calibrated.push_back(calibrate_confidence(d, weights));
    }
    auto fused = fuse_frame(calibrated, models, iou_thresh);
    out.insert(out.end(), fused.begin(), fused.end());
  }
  return out;
}

int cmd_fuse(const FuseArgs& a) {
  const auto dets = read_file(a.in, [](std::istream& in) {
    return read_detection_log(in);
  });
  ModelWeights weights;
  if (!a.weights.empty()) {
    weights = read_file(a.weights, [](std::istream& in) {
      return read_weights(in);
    });
  }
  const auto fused = fuse_log(dets, weights, a.models, a.iou_thresh);
  auto out = open_out(a.out);
  write_fused_log(out, fused);
  return kExitOk;
}

// ------------------------------------------------------------ eval-det

struct EvalDetArgs {
  std::string pred, truth, report, from_matrix;
  double iou_thresh = kDefaultMatchIou;
};

int cmd_eval_det(const EvalDetArgs& a) {
  Evaluation ev{ConfusionMatrix(ClassRegistry::standard()), {}, {}, {}};
  if (!a.from_matrix.empty()) {
    ev = evaluation_from_matrix(read_file(a.from_matrix, [](std::istream& in) {
      return read_confusion_matrix(in);
    }));
  } else {
    if (a.pred.empty() || a.truth.empty()) {
      throw Error("--pred and --truth are required without --from-matrix");
    }
    const auto preds = read_file(a.pred, [](std::istream& in) {
      return read_detection_log(in);
    });
    const auto truths = read_file(a.truth, [](std::istream& in) {
      return read_truth_log(in);
    });
    ev = evaluate(preds, truths, a.iou_thresh);
  }
  auto out = open_out(a.report);
  write_report(out, ev);
  return kExitOk;
}

// ------------------------------------------------------------ eval-seg

struct EvalSegArgs {
  std::string pred, truth;
};

int cmd_eval_seg(const EvalSegArgs& a, std::ostream& out) {
  const auto pred = read_file(a.pred, [](std::istream& in) {
    return read_prob_mask(in);
  });
  const auto truth = read_file(a.truth, [](std::istream& in) {
    return read_binary_mask(in);
  });
  const double miou = mask_mean_iou(threshold_mask(pred), truth);
  const double bce = bce_loss(truth, pred);
  out << "mean_iou " << format_real(miou) << '\n'
      << "bce " << format_real(bce) << '\n';
  return kExitOk;
}

// ----------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string pred, truth, out;
  double alpha = 0.1;
  std::size_t passes = 1;
  double iou_thresh = kDefaultMatchIou;
};

// Squared-residual loss of the calibrated ensemble: every fused detection
// contributes (matched ? 1 : 0, confidence) and every missed truth (1, 0).
double fused_loss(const std::vector<Detection>& preds,
                  const std::vector<GroundTruthObject>& truths,
                  const ModelWeights& w, std::size_t models, double iou_thresh) {
  const auto fused = detections_of(fuse_log(preds, w, models, iou_thresh));
  auto fused_frames = group_by_frame(fused);
  auto truth_frames = group_by_frame(truths);
  std::set<std::uint64_t> frames;
  for (const auto& [f, _] : fused_frames) frames.insert(f);
  for (const auto& [f, _] : truth_frames) frames.insert(f);

  std::vector<LabeledPrediction> pairs;
  for (auto f : frames) {
    const auto& fp = fused_frames[f];
    const auto& ft = truth_frames[f];
    const auto matches = match_detections(fp, ft, iou_thresh);
    std::vector<bool> hit(ft.size(), false);
    for (const auto& m : matches) {
      pairs.push_back({m.is_tp ? 1 : 0, fp[m.pred_index].confidence});
      if (m.is_tp) hit[*m.truth_index] = true;
    }
    for (bool h : hit) {
      if (!h) pairs.push_back({1, 0.0});
    }
  }
  return ensemble_loss(pairs);
}

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  if (!(a.alpha > 0.0 && a.alpha <= 1.0)) throw Error("--alpha must lie in (0, 1]");
  const auto preds = read_file(a.pred, [](std::istream& in) {
    return read_detection_log(in);
  });
  const auto truths = read_file(a.truth, [](std::istream& in) {
    return read_truth_log(in);
  });

  // y labels: each source is matched against the truth on its own.
  std::vector<int> labels(preds.size(), 0);
  {
    std::map<std::pair<std::uint64_t, std::string>, std::vector<std::size_t>>
        groups;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      groups[{preds[i].frame_id, preds[i].source_id}].push_back(i);
    }
    const auto truth_frames = group_by_frame(truths);
    for (const auto& [key, idx] : groups) {
      std::vector<Detection> frame_preds;
      for (auto i : idx) frame_preds.push_back(preds[i]);
      const auto it = truth_frames.find(key.first);
      const std::vector<GroundTruthObject> none;
      const auto& ft = it == truth_frames.end() ? none : it->second;
      for (const auto& m : match_detections(frame_preds, ft, a.iou_thresh)) {
        labels[idx[m.pred_index]] = m.is_tp ? 1 : 0;
      }
    }
  }

  ModelWeights w;
  w.alpha = a.alpha;
  for (const auto& d : preds) w.weights.try_emplace(d.source_id, 1.0);
  const std::size_t models = std::max<std::size_t>(1, distinct_sources(preds));

  for (std::size_t pass = 1; pass <= a.passes; ++pass) {
    std::vector<WeightObservation> obs;
    obs.reserve(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      obs.push_back({preds[i].source_id,
                     calibrate_confidence(preds[i], w).confidence, labels[i]});
    }
    w = update_model_weights(std::move(w), obs);
    out << "pass " << pass << " loss "
        << format_real(fused_loss(preds, truths, w, models, a.iou_thresh))
        << '\n';
  }
  const double loss = fused_loss(preds, truths, w, models, a.iou_thresh);
  out << "loss " << format_real(loss) << '\n';
  auto file = open_out(a.out);
  write_weights(file, w);
  return kExitOk;
}

// ------------------------------------------------------------ simulate

struct SimulateArgs {
  std::string scenario, out_dir;
  std::optional<std::uint64_t> seed;
  std::uint64_t mask_every = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  Scenario s = read_file(a.scenario, [](std::istream& in) {
    return parse_scenario(in);
  });
  if (a.seed) s.seed = *a.seed;
  SimulationOptions options;
  options.out_dir = a.out_dir;
  options.mask_every = a.mask_every;
  run_simulation(s, options);
  return kExitOk;
}

// ------------------------------------------------------------- control

struct ControlArgs {
  std::string detections, signals, roi, out;
  double score_thresh = SignalConfig{}.score_threshold;
  std::uint32_t n_on = SignalConfig{}.n_on;
  std::uint32_t n_off = SignalConfig{}.n_off;
  double min_conf = ControllerConfig{}.min_confidence;
};

BBox parse_roi(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw Error("");
    } catch (const std::exception&) {
      throw Error("--roi expects X1,Y1,X2,Y2");
    }
  }
  if (v.size() != 4) throw Error("--roi expects X1,Y1,X2,Y2");
  return BBox(v[0], v[1], v[2], v[3]);
}

int cmd_control(const ControlArgs& a) {
  const BBox roi = parse_roi(a.roi);
  ControllerConfig config;
  config.signal = {a.score_thresh, a.n_on, a.n_off};
  config.min_confidence = a.min_conf;
  validate(config);

  const auto signals = read_file(a.signals, [](std::istream& in) {
    return read_signals(in);
  });
  for (std::size_t i = 0; i < signals.size(); ++i) {
    if (signals[i].tick != i) {
      throw Error(a.signals + ": tick gap, expected tick " + std::to_string(i) +
                  " but found " + std::to_string(signals[i].tick));
    }
  }
  auto dets = group_by_frame(read_file(a.detections, [](std::istream& in) {
    return read_detection_log(in);
  }));
  if (!dets.empty() && dets.rbegin()->first >= signals.size()) {
    throw Error(a.detections + ": frame " +
                std::to_string(dets.rbegin()->first) + " has no signal record");
  }

  std::vector<TickInput> inputs;
  inputs.reserve(signals.size());
  for (const auto& s : signals) {
    const auto it = dets.find(s.tick);
    inputs.push_back({s.score_cam1, s.score_cam2,
                      it == dets.end() ? std::vector<Detection>{} : it->second,
                      roi});
  }
  const auto episode = run_episode(inputs, config);
  auto out = open_out(a.out);
  write_event_log(out, episode.events);
  return kExitOk;
}

// --------------------------------------------------------------- bench

struct BenchArgs {
  ThroughputConfig config;
  double min_fps = 100.0;
};

int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  if (a.config.frames == 0 || a.config.sources == 0) {
    throw Error("--frames and --sources must be positive");
  }
  const auto r = measure_throughput(a.config);
  out << "frames " << r.frames << '\n'
      << "seconds " << format_real(r.seconds) << '\n'
      << "fps " << format_real(r.frames_per_second) << '\n';
  if (r.frames_per_second < a.min_fps) {
    err << "throughput " << r.frames_per_second << " fps is below the "
        << a.min_fps << " fps budget\n";
    return kExitBudget;
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Grade-crossing detection fusion, evaluation and control",
               "crossguard"};
  app.require_subcommand(1);

  FuseArgs fuse;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse a multi-source detection log");
  fuse_cmd->add_option("--in", fuse.in, "Detection log")->required();
  fuse_cmd->add_option("--out", fuse.out, "Fused detection log")->required();
  fuse_cmd->add_option("--iou-thresh", fuse.iou_thresh, "Clustering IoU threshold")
      ->capture_default_str();
  fuse_cmd->add_option("--models", fuse.models, "Ensemble size K")->required();
  fuse_cmd->add_option("--weights", fuse.weights, "Per-source weights file");

  EvalDetArgs eval_det;
  auto* eval_det_cmd =
      app.add_subcommand("eval-det", "Evaluate detections against ground truth");
  eval_det_cmd->add_option("--pred", eval_det.pred, "Predicted detection log");
  eval_det_cmd->add_option("--truth", eval_det.truth, "Ground-truth log");
  eval_det_cmd->add_option("--iou-thresh", eval_det.iou_thresh, "Match IoU threshold")
      ->capture_default_str();
  eval_det_cmd->add_option("--report", eval_det.report, "Report output")->required();
  eval_det_cmd->add_option("--from-matrix", eval_det.from_matrix,
                           "Score a prebuilt confusion matrix instead");

  EvalSegArgs eval_seg;
  auto* eval_seg_cmd = app.add_subcommand("eval-seg", "Score a segmentation mask");
  eval_seg_cmd->add_option("--pred", eval_seg.pred, "Probability mask")->required();
  eval_seg_cmd->add_option("--truth", eval_seg.truth, "Binary mask")->required();

  CalibrateArgs calibrate;
  auto* calibrate_cmd =
      app.add_subcommand("calibrate", "Fit per-source confidence weights");
  calibrate_cmd->add_option("--pred", calibrate.pred, "Per-source detection log")
      ->required();
  calibrate_cmd->add_option("--truth", calibrate.truth, "Ground-truth log")->required();
  calibrate_cmd->add_option("--alpha", calibrate.alpha, "Learning rate")
      ->capture_default_str();
  calibrate_cmd->add_option("--passes", calibrate.passes, "Passes over the log")
      ->capture_default_str();
  calibrate_cmd->add_option("--iou-thresh", calibrate.iou_thresh, "Match IoU threshold")
      ->capture_default_str();
  calibrate_cmd->add_option("--out", calibrate.out, "Weights output")->required();

  SimulateArgs simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a synthetic scenario");
  simulate_cmd->add_option("--scenario", simulate.scenario, "Scenario file")
      ->required();
  simulate_cmd->add_option("--out-dir", simulate.out_dir, "Artifact directory")
      ->required();
  simulate_cmd->add_option("--seed", simulate.seed, "Override the scenario seed");
  simulate_cmd->add_option("--mask-every", simulate.mask_every,
                           "Write masks every N ticks (0 = never)")
      ->capture_default_str();

  ControlArgs control;
  auto* control_cmd = app.add_subcommand("control", "Replay the crossing controller");
  control_cmd->add_option("--detections", control.detections, "Detection log")
      ->required();
  control_cmd->add_option("--signals", control.signals, "Signal file")->required();
  control_cmd->add_option("--roi", control.roi, "X1,Y1,X2,Y2")->required();
  control_cmd->add_option("--out", control.out, "Event log output")->required();
  control_cmd->add_option("--score-thresh", control.score_thresh)->capture_default_str();
  control_cmd->add_option("--n-on", control.n_on)->capture_default_str();
  control_cmd->add_option("--n-off", control.n_off)->capture_default_str();
  control_cmd->add_option("--min-conf", control.min_conf)->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd =
      app.add_subcommand("bench", "Measure fusion + control throughput");
  bench_cmd->add_option("--frames", bench.config.frames)->capture_default_str();
  bench_cmd->add_option("--sources", bench.config.sources)->capture_default_str();
  bench_cmd->add_option("--dets", bench.config.detections_per_source,
                        "Detections per source per frame")
      ->capture_default_str();
  bench_cmd->add_option("--min-fps", bench.min_fps, "Fail below this rate")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "crossguard: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (*fuse_cmd) return cmd_fuse(fuse);
    if (*eval_det_cmd) return cmd_eval_det(eval_det);
    if (*eval_seg_cmd) return cmd_eval_seg(eval_seg, out);
    if (*calibrate_cmd) return cmd_calibrate(calibrate, out);
    if (*simulate_cmd) return cmd_simulate(simulate);
    if (*control_cmd) return cmd_control(control);
    if (*bench_cmd) return cmd_bench(bench, out, err);
  } catch (const std::exception& e) {
    err << "crossguard: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace crossguard::cli
