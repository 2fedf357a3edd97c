#pragma once

#include <iosfwd>

#include "crossguard/metrics.hpp"

namespace crossguard {

/// Writes the evaluation report. Sections, in order:
///
///   [confusion]   labels header and one row per true label
///   [classes]     `class tp fp fn precision recall f1`
///   [aggregate]   `macro ...` and `micro ...` in the same columns
///   [flags]       `<class> <metric> undefined` for zero denominators
///   [pr <class>]  `recall precision` points
///   [ap]          `<class> <average precision>`
///
/// The pr and ap sections are empty when the evaluation has no curves.
void write_report(std::ostream& out, const Evaluation& ev);

/// Evaluation built from a confusion matrix alone (no curves). Per-class
/// rows cover every non-background label with a non-zero row or column.
Evaluation evaluation_from_matrix(const ConfusionMatrix& cm);

}  // namespace crossguard
