#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "besra/data.hpp"

namespace besra {

struct MetricsReport {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double precision = 0.0;  // micro-pooled
  double recall = 0.0;     // micro-pooled
  double precision_at_5 = 0.0;
  double recall_at_5 = 0.0;
};

inline constexpr std::string_view kMetricNames[] = {"micro_f1",  "macro_f1",       "precision",
                                                    "recall",    "precision_at_5", "recall_at_5"};

// Throws std::invalid_argument for an unknown name.
double metric_value(const MetricsReport& report, std::string_view name);

struct LabelCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

// Every ratio with a zero denominator is taken as 0.
double micro_f1(std::span<const LabelCounts> counts);
double macro_f1(std::span<const LabelCounts> counts);

std::vector<LabelCounts> confusion_counts(std::span<const double> probs, const LabelMatrix& truth,
                                          double threshold);

// probs is instances x labels row-major. Set metrics binarize at threshold
// (p >= threshold is positive); the @5 metrics rank each instance's labels
// by probability (ties to the lower label index) and use min(5, K) ranks.
MetricsReport evaluate(std::span<const double> probs, const LabelMatrix& truth, double threshold = 0.5);

}  // namespace besra
