#include "crossguard/report.hpp"

#include <ostream>

#include "crossguard/text_format.hpp"

namespace crossguard {

namespace {

void write_metrics_row(std::ostream& out, const ClassMetrics& m) {
  out << m.class_label << ' ' << format_real(m.tp) << ' ' << format_real(m.fp)
      << ' ' << format_real(m.fn) << ' ' << format_real(m.precision) << ' '
      << format_real(m.recall) << ' ' << format_real(m.f1) << '\n';
}

void write_flags(std::ostream& out, const ClassMetrics& m) {
  if (m.precision_undefined) out << m.class_label << " precision undefined\n";
  if (m.recall_undefined) out << m.class_label << " recall undefined\n";
  if (m.f1_undefined) out << m.class_label << " f1 undefined\n";
}

}  // namespace

void write_report(std::ostream& out, const Evaluation& ev) {
  out << "[confusion]\n";
  write_confusion_matrix(out, ev.confusion);
  out << "[classes]\n# class tp fp fn precision recall f1\n";
  for (const auto& m : ev.per_class) write_metrics_row(out, m);
  out << "[aggregate]\n";
  write_metrics_row(out, ev.aggregate.macro);
  write_metrics_row(out, ev.aggregate.micro);
  out << "[flags]\n";
  for (const auto& m : ev.per_class) write_flags(out, m);
  for (const auto& [label, curve] : ev.pr_curves) {
    out << "[pr " << label << "]\n# recall precision\n";
    for (const auto& p : curve) {
      out << format_real(p.recall) << ' ' << format_real(p.precision) << '\n';
    }
  }
  out << "[ap]\n";
  for (const auto& [label, curve] : ev.pr_curves) {
    out << label << ' ' << format_real(average_precision(curve)) << '\n';
  }
}

Evaluation evaluation_from_matrix(const ConfusionMatrix& cm) {
  Evaluation ev{cm, {}, {}, {}};
  const std::size_t bg = cm.background_index();
  for (std::size_t c = 0; c < bg; ++c) {
    double mass = 0.0;
    for (std::size_t i = 0; i < cm.size(); ++i) mass += cm.at(c, i) + cm.at(i, c);
    if (mass > 0.0) ev.per_class.push_back(class_metrics(cm, cm.labels()[c]));
  }
  ev.aggregate = aggregate_metrics(ev.per_class);
  return ev;
}

}  // namespace crossguard
