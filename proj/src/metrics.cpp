#include "besra/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace besra {
namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1(const LabelCounts& c) {
  return ratio(2.0 * static_cast<double>(c.tp), static_cast<double>(2 * c.tp + c.fp + c.fn));
}

LabelCounts pooled(std::span<const LabelCounts> counts) {
  LabelCounts total;
  for (const auto& c : counts) {
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return total;
}

void check_shape(std::span<const double> probs, const LabelMatrix& truth) {
  if (truth.cols() == 0 || probs.size() != truth.rows() * truth.cols()) {
    throw std::invalid_argument("evaluate: prediction shape does not match labels");
  }
}

}  // namespace

double metric_value(const MetricsReport& report, std::string_view name) {
  if (name == "micro_f1") return report.micro_f1;
  if (name == "macro_f1") return report.macro_f1;
  if (name == "precision") return report.precision;
  if (name == "recall") return report.recall;
  if (name == "precision_at_5") return report.precision_at_5;
  if (name == "recall_at_5") return report.recall_at_5;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

double micro_f1(std::span<const LabelCounts> counts) { return f1(pooled(counts)); }

double macro_f1(std::span<const LabelCounts> counts) {
  if (counts.empty()) return 0.0;
  double total = 0.0;
  for (const auto& c : counts) total += f1(c);
  return total / static_cast<double>(counts.size());
}

std::vector<LabelCounts> confusion_counts(std::span<const double> probs, const LabelMatrix& truth,
                                          double threshold) {
  check_shape(probs, truth);
  std::vector<LabelCounts> counts(truth.cols());
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    for (std::size_t k = 0; k < truth.cols(); ++k) {
      const bool predicted = probs[i * truth.cols() + k] >= threshold;
      const bool actual = truth.at(i, k) != 0;
      if (predicted && actual) ++counts[k].tp;
      if (predicted && !actual) ++counts[k].fp;
      if (!predicted && actual) ++counts[k].fn;
    }
  }
  return counts;
}

MetricsReport evaluate(std::span<const double> probs, const LabelMatrix& truth, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("evaluate: threshold must be in (0,1)");
  const auto counts = confusion_counts(probs, truth, threshold);
  const auto total = pooled(counts);
  MetricsReport report;
  report.micro_f1 = micro_f1(counts);
  report.macro_f1 = macro_f1(counts);
  report.precision = ratio(static_cast<double>(total.tp), static_cast<double>(total.tp + total.fp));
  report.recall = ratio(static_cast<double>(total.tp), static_cast<double>(total.tp + total.fn));

  const std::size_t labels = truth.cols();
  const std::size_t depth = std::min<std::size_t>(5, labels);
  std::vector<std::size_t> order(labels);
  double precision_sum = 0.0, recall_sum = 0.0;
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    const double* row = probs.data() + i * labels;
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [row](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    std::size_t hits = 0, positives = 0;
    for (std::size_t r = 0; r < depth; ++r) hits += truth.at(i, order[r]);
    for (std::size_t k = 0; k < labels; ++k) positives += truth.at(i, k);
    precision_sum += static_cast<double>(hits) / static_cast<double>(depth);
    recall_sum += ratio(static_cast<double>(hits), static_cast<double>(positives));
  }
  if (truth.rows() > 0) {
    report.precision_at_5 = precision_sum / static_cast<double>(truth.rows());
    report.recall_at_5 = recall_sum / static_cast<double>(truth.rows());
  }
  return report;
}

}  // namespace besra
