#include "besra/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "besra/errors.hpp"
#include "besra/rng.hpp"

namespace besra {

std::string to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Validation: return "validation";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  if (text == "validation") return Split::Validation;
  throw std::invalid_argument("unknown split tag: " + std::string(text));
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void MultiLabelDataset::validate() const {
  if (dim == 0) throw std::invalid_argument("dataset: feature dimension is zero");
  if (labels.cols() == 0) throw std::invalid_argument("dataset: no labels");
  if (labels.rows() != features.size()) throw std::invalid_argument("dataset: label rows do not match instances");
  for (const auto& row : features) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (row[j].index >= dim) throw std::invalid_argument("dataset: feature index out of range");
      if (j > 0 && row[j].index <= row[j - 1].index) {
        throw std::invalid_argument("dataset: feature indices not strictly increasing");
      }
      if (!std::isfinite(row[j].value)) throw std::invalid_argument("dataset: non-finite feature value");
    }
  }
}

MultiLabelDataset MultiLabelDataset::subset(std::span<const std::size_t> rows) const {
  MultiLabelDataset out;
  out.dim = dim;
  out.split = split;
  out.labels = LabelMatrix(rows.size(), labels.cols());
  out.features.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.push_back(features.at(rows[r]));
    for (std::size_t k = 0; k < labels.cols(); ++k) out.labels.set(r, k, labels.at(rows[r], k));
  }
  return out;
}

ImbalanceReport mean_ir(const LabelMatrix& labels) {
  if (labels.cols() == 0) throw std::invalid_argument("mean_ir: no labels");
  ImbalanceReport report;
  report.counts.assign(labels.cols(), 0);
  for (std::size_t i = 0; i < labels.rows(); ++i) {
    for (std::size_t k = 0; k < labels.cols(); ++k) report.counts[k] += labels.at(i, k);
  }
  const std::size_t top = *std::max_element(report.counts.begin(), report.counts.end());
  report.irlbl.resize(labels.cols());
  double total = 0.0;
  for (std::size_t k = 0; k < labels.cols(); ++k) {
    if (report.counts[k] == 0) {
      throw std::domain_error("mean_ir: label " + std::to_string(k) + " has no positive instances");
    }
    report.irlbl[k] = static_cast<double>(top) / static_cast<double>(report.counts[k]);
    total += report.irlbl[k];
  }
  report.mean_ir = total / static_cast<double>(labels.cols());
  const double positives = std::accumulate(report.counts.begin(), report.counts.end(), 0.0);
  report.cardinality = labels.rows() ? positives / static_cast<double>(labels.rows()) : 0.0;
  report.density = report.cardinality / static_cast<double>(labels.cols());
  return report;
}

namespace {

std::vector<std::size_t> geometric_counts(std::size_t top, std::size_t labels, double ratio) {
  std::vector<std::size_t> counts(labels);
  for (std::size_t k = 0; k < labels; ++k) {
    const double c = std::round(static_cast<double>(top) * std::pow(ratio, static_cast<double>(k)));
    counts[k] = std::max<std::size_t>(1, static_cast<std::size_t>(c));
  }
  counts[0] = top;
  return counts;
}

double counts_mean_ir(const std::vector<std::size_t>& counts) {
  double total = 0.0;
  for (std::size_t c : counts) total += static_cast<double>(counts[0]) / static_cast<double>(c);
  return total / static_cast<double>(counts.size());
}

}  // namespace

std::vector<std::size_t> solve_label_counts(std::size_t instances, std::size_t labels, double target_mean_ir,
                                            double top_label_fraction) {
  if (labels == 0 || instances == 0) throw std::invalid_argument("solve_label_counts: empty shape");
  if (!(target_mean_ir >= 1.0)) throw std::invalid_argument("solve_label_counts: target MeanIR must be >= 1");
  if (!(top_label_fraction > 0.0 && top_label_fraction <= 1.0)) {
    throw std::invalid_argument("solve_label_counts: top label fraction must be in (0,1]");
  }
  const auto top = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::round(top_label_fraction * static_cast<double>(instances))), 1, instances);

  auto best = geometric_counts(top, labels, 1.0);
  double best_error = std::fabs(counts_mean_ir(best) - target_mean_ir) / target_mean_ir;
  const auto consider = [&](double ratio) {
    auto counts = geometric_counts(top, labels, ratio);
    const double mir = counts_mean_ir(counts);
    const double error = std::fabs(mir - target_mean_ir) / target_mean_ir;
    if (error < best_error) {
      best_error = error;
      best = std::move(counts);
    }
    return mir;
  };
  consider(0.0);
  double lo = 0.0, hi = 1.0;
  for (int round = 0; round < 50 && best_error > 0.0; ++round) {
    const double mid = 0.5 * (lo + hi);
    if (consider(mid) > target_mean_ir) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (best_error > 0.05) {
    const double closest = counts_mean_ir(best);
    throw InfeasibleTargetError("MeanIR target " + format_double(target_mean_ir) + " unreachable with " +
                                    std::to_string(instances) + " instances; closest " + format_double(closest),
                                closest);
  }
  return best;
}

namespace {

struct Prototype {
  std::vector<std::size_t> support;
  std::vector<double> weights;
};

LabelMatrix assign_labels(const std::vector<std::size_t>& counts, std::size_t instances, Rng& rng) {
  const std::size_t labels = counts.size();
  LabelMatrix matrix(instances, labels);
  std::vector<std::size_t> order(instances);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));
  for (std::size_t r = 0; r < counts[0]; ++r) matrix.set(order[r], 0, true);

  // Instances without the top label are covered first by the other labels.
  std::size_t next_uncovered = counts[0];
  for (std::size_t k = 1; k < labels; ++k) {
    std::size_t need = counts[k];
    while (need > 0 && next_uncovered < instances) {
      matrix.set(order[next_uncovered++], k, true);
      --need;
    }
    if (need == 0) continue;
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < instances; ++i) {
      if (!matrix.at(i, k)) open.push_back(i);
    }
    for (std::size_t pick : rng.sample(open.size(), need)) matrix.set(open[pick], k, true);
  }
  return matrix;
}

MultiLabelDataset draw_split(const SyntheticSpec& spec, const std::vector<Prototype>& prototypes,
                             std::size_t instances, double target, Split split, std::uint64_t seed) {
  const auto counts = solve_label_counts(instances, spec.labels, target, spec.top_label_fraction);
  const std::size_t others = std::accumulate(counts.begin() + 1, counts.end(), std::size_t{0});
  if (counts[0] + others < instances) {
    throw InfeasibleTargetError("MeanIR target " + format_double(target) +
                                    " leaves instances without any positive label",
                                counts_mean_ir(counts));
  }
  Rng rng(seed);
  MultiLabelDataset data;
  data.dim = spec.dim;
  data.split = split;
  data.labels = assign_labels(counts, instances, rng);
  data.features.resize(instances);

  std::vector<double> dense(spec.dim);
  for (std::size_t i = 0; i < instances; ++i) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (std::size_t k = 0; k < spec.labels; ++k) {
      if (!data.labels.at(i, k)) continue;
      const auto& proto = prototypes[k];
      for (std::size_t j = 0; j < proto.support.size(); ++j) dense[proto.support[j]] += proto.weights[j];
    }
    for (double& v : dense) {
      if (v != 0.0) v += spec.noise * rng.normal();
    }
    for (std::size_t b = 0; b < spec.background; ++b) dense[rng.below(spec.dim)] += spec.noise * std::fabs(rng.normal());
    double norm = 0.0;
    for (double v : dense) norm += v * v;
    norm = std::sqrt(norm);
    auto& row = data.features[i];
    for (std::size_t j = 0; j < spec.dim; ++j) {
      if (dense[j] != 0.0) row.push_back({static_cast<std::uint32_t>(j), dense[j] * spec.feature_norm / norm});
    }
  }
  return data;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  if (spec.labels == 0 || spec.dim == 0 || spec.n_train == 0 || spec.n_test == 0) {
    throw std::invalid_argument("generate_synthetic: empty shape");
  }
  if (spec.prototype_support == 0 || spec.prototype_support > spec.dim) {
    throw std::invalid_argument("generate_synthetic: prototype support must be in [1, dim]");
  }
  Rng proto_rng(derive_seed(spec.seed, Stream::Dataset, 0));
  std::vector<Prototype> prototypes(spec.labels);
  for (auto& proto : prototypes) {
    proto.support = proto_rng.sample(spec.dim, spec.prototype_support);
    std::sort(proto.support.begin(), proto.support.end());
    for (std::size_t j = 0; j < proto.support.size(); ++j) proto.weights.push_back(proto_rng.uniform(0.5, 1.5));
  }
  SyntheticData out;
  out.train = draw_split(spec, prototypes, spec.n_train, spec.train_mean_ir, Split::Train,
                         derive_seed(spec.seed, Stream::Dataset, 1));
  out.test = draw_split(spec, prototypes, spec.n_test, spec.test_mean_ir, Split::Test,
                        derive_seed(spec.seed, Stream::Dataset, 2));
  return out;
}

void write_dataset(std::ostream& out, const MultiLabelDataset& data) {
  data.validate();
  out << data.size() << ' ' << data.dim << ' ' << data.num_labels() << ' ' << to_string(data.split) << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    bool first = true;
    for (std::size_t k = 0; k < data.num_labels(); ++k) {
      if (!data.labels.at(i, k)) continue;
      if (!first) out << ',';
      out << k;
      first = false;
    }
    for (const auto& f : data.features[i]) out << ' ' << f.index << ':' << format_double(f.value);
    out << '\n';
  }
}

namespace {

template <typename T>
T parse_number(std::string_view token, std::size_t line, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty()) {
    throw ParseError(std::string("malformed ") + what + " '" + std::string(token) + "'", line);
  }
  return value;
}

std::vector<std::string_view> split_on(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

MultiLabelDataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const auto header = split_on(line, ' ');
  if (header.size() != 4) throw ParseError("header must be '<n> <dim> <labels> <split>'", 1);
  const auto n = parse_number<std::size_t>(header[0], 1, "instance count");
  MultiLabelDataset data;
  data.dim = parse_number<std::size_t>(header[1], 1, "dimension");
  const auto labels = parse_number<std::size_t>(header[2], 1, "label count");
  if (data.dim == 0 || labels == 0) throw ParseError("dimension and label count must be positive", 1);
  try {
    data.split = parse_split(header[3]);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), 1);
  }
  data.labels = LabelMatrix(n, labels);
  data.features.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lineno = i + 2;
    if (!std::getline(in, line)) throw ParseError("expected " + std::to_string(n) + " records", lineno);
    const auto space = line.find(' ');
    const std::string_view label_field = std::string_view(line).substr(0, space);
    if (!label_field.empty()) {
      for (auto token : split_on(label_field, ',')) {
        const auto k = parse_number<std::size_t>(token, lineno, "label index");
        if (k >= labels) throw ParseError("label index out of range", lineno);
        if (data.labels.at(i, k)) throw ParseError("duplicate label index", lineno);
        data.labels.set(i, k, true);
      }
    }
    if (space == std::string::npos) continue;
    auto& row = data.features[i];
    for (auto token : split_on(std::string_view(line).substr(space + 1), ' ')) {
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) throw ParseError("feature must be index:value", lineno);
      const auto index = parse_number<std::uint32_t>(token.substr(0, colon), lineno, "feature index");
      const auto value = parse_number<double>(token.substr(colon + 1), lineno, "feature value");
      if (index >= data.dim) throw ParseError("feature index out of range", lineno);
      if (!row.empty() && index <= row.back().index) throw ParseError("feature indices must increase", lineno);
      row.push_back({index, value});
    }
  }
  if (std::getline(in, line) && !line.empty()) throw ParseError("trailing content after records", n + 2);
  return data;
}

void save_dataset(const MultiLabelDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(out, data);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

MultiLabelDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace besra
