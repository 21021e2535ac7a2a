#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace besra {

struct Feature {
  std::uint32_t index;
  double value;

  bool operator==(const Feature&) const = default;
};

// Feature pairs sorted by strictly increasing index.
using SparseVector = std::vector<Feature>;

enum class Split { Train, Test, Validation };

std::string to_string(Split split);
Split parse_split(std::string_view text);

// Dense row-major binary matrix (instances x labels).
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), values_(rows * cols, 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::uint8_t at(std::size_t i, std::size_t k) const { return values_[i * cols_ + k]; }
  void set(std::size_t i, std::size_t k, bool on) { values_[i * cols_ + k] = on ? 1 : 0; }

  std::span<const std::uint8_t> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }

  bool operator==(const LabelMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> values_;
};

struct MultiLabelDataset {
  std::size_t dim = 0;
  std::vector<SparseVector> features;
  LabelMatrix labels;
  Split split = Split::Train;

  std::size_t size() const noexcept { return features.size(); }
  std::size_t num_labels() const noexcept { return labels.cols(); }

  // Checks shapes, index ranges and feature ordering; throws std::invalid_argument.
  void validate() const;

  // A new dataset holding the given rows, in order.
  MultiLabelDataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const MultiLabelDataset&) const = default;
};

struct ImbalanceReport {
  std::vector<std::size_t> counts;
  std::vector<double> irlbl;  // max count / count(k)
  double mean_ir = 0.0;
  double cardinality = 0.0;  // mean positives per instance
  double density = 0.0;      // cardinality / labels
};

// Throws std::domain_error naming the first label with no positives.
ImbalanceReport mean_ir(const LabelMatrix& labels);

struct SyntheticSpec {
  std::size_t labels = 10;
  std::size_t n_train = 1200;
  std::size_t n_test = 600;
  std::size_t dim = 200;
  double train_mean_ir = 10.0;
  double test_mean_ir = 50.0;
  // Share of instances carrying the most frequent label.
  double top_label_fraction = 0.9;
  // Nonzero coordinates in each label prototype.
  std::size_t prototype_support = 8;
  double noise = 1.5;
  // Extra random coordinates switched on per instance.
  std::size_t background = 30;
  // Every feature vector is scaled to this Euclidean norm.
  double feature_norm = 5.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  MultiLabelDataset train;
  MultiLabelDataset test;
};

// Per-label positive counts following a geometric profile
// count_k = max(1, round(top * r^k)), with the ratio r bisected (up to 50
// rounds) so the resulting MeanIR lies within 5% of the target. Throws
// InfeasibleTargetError carrying the closest reachable MeanIR otherwise.
std::vector<std::size_t> solve_label_counts(std::size_t instances, std::size_t labels, double target_mean_ir,
                                            double top_label_fraction);

// Train and test splits sharing one set of label prototypes. Every instance
// has at least one positive label and label counts match solve_label_counts
// exactly.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// Text format (see docs/formats.md):
//   <n> <dim> <labels> <split>
//   <label,label,...> <index>:<value> <index>:<value> ...
void write_dataset(std::ostream& out, const MultiLabelDataset& data);
MultiLabelDataset read_dataset(std::istream& in);

void save_dataset(const MultiLabelDataset& data, const std::filesystem::path& path);
MultiLabelDataset load_dataset(const std::filesystem::path& path);

// printf("%.17g"), the round-trip representation used by every writer.
std::string format_double(double value);

}  // namespace besra
