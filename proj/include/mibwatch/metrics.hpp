#pragma once

// Prediction error metrics (MSE, Euclidean and Manhattan distance, MMRE)
// and binary classification rates over a confusion matrix.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mibwatch/error.hpp"

namespace mibwatch {

struct ErrorReport {
  double mse = 0.0;
  double ed = 0.0;
  double md = 0.0;
  double mmre = 0.0;
  std::size_t n = 0;
  // Terms with a zero observed value, left out of the MMRE mean.
  std::size_t mmre_skipped = 0;
};

inline ErrorReport error_report(std::span<const double> observed, std::span<const double> predicted) {
  if (observed.size() != predicted.size())
    throw Error(ErrorKind::Dimension, "observed and predicted lengths differ");
  if (observed.empty()) throw Error(ErrorKind::Dimension, "error report needs at least one sample");

  double sq = 0.0, abs_sum = 0.0, rel_sum = 0.0;
  std::size_t rel_n = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = observed[i] - predicted[i];
    sq += e * e;
    abs_sum += std::abs(e);
    if (observed[i] != 0.0) {
      rel_sum += std::abs(e) / std::abs(observed[i]);
      ++rel_n;
    }
  }
  if (rel_n == 0) throw Error(ErrorKind::UndefinedRate, "MMRE is undefined when every observed value is zero");

  ErrorReport r;
  r.n = observed.size();
  r.mse = sq / static_cast<double>(r.n);
  r.ed = std::sqrt(sq);
  r.md = abs_sum;
  r.mmre = rel_sum / static_cast<double>(rel_n);
  r.mmre_skipped = r.n - rel_n;
  return r;
}

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t positives() const { return tp + fn; }
  std::size_t negatives() const { return tn + fp; }
  std::size_t total() const { return tp + fp + tn + fn; }

  bool operator==(const ConfusionMatrix&) const = default;
};

inline double sensitivity(const ConfusionMatrix& cm) {
  if (cm.positives() == 0) throw Error(ErrorKind::UndefinedRate, "sensitivity needs at least one actual positive");
  return static_cast<double>(cm.tp) / static_cast<double>(cm.positives());
}

inline double specificity(const ConfusionMatrix& cm) {
  if (cm.negatives() == 0) throw Error(ErrorKind::UndefinedRate, "specificity needs at least one actual negative");
  return static_cast<double>(cm.tn) / static_cast<double>(cm.negatives());
}

inline double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorKind::UndefinedRate, "accuracy needs at least one case");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

enum class WindowLabel { Normal, Attack };
enum class WindowFlag { Clear, Flagged };

inline ConfusionMatrix confusion_from_flags(std::span<const WindowLabel> labels, std::span<const WindowFlag> flags) {
  if (labels.size() != flags.size()) throw Error(ErrorKind::Dimension, "window labels and flags differ in length");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool attack = labels[i] == WindowLabel::Attack;
    const bool flagged = flags[i] == WindowFlag::Flagged;
    if (attack && flagged) ++cm.tp;
    else if (attack) ++cm.fn;
    else if (flagged) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

}  // namespace mibwatch
