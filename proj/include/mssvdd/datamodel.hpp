#ifndef MSSVDD_DATAMODEL_HPP
#define MSSVDD_DATAMODEL_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mssvdd/error.hpp"
#include "mssvdd/random.hpp"

namespace mssvdd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Label : std::uint8_t { non_target = 0, target = 1 };

/// Dense D x N feature matrix, one column per sample.
///
/// Entries are always finite. An empty batch (N = 0) is representable so that
/// prediction over an empty file is well defined; training paths reject it.
class FeatureMatrix {
public:
  FeatureMatrix() = default;

  explicit FeatureMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.cols() > 0 && values_.rows() < 1)
      throw InvalidArgument("feature matrix needs at least one feature row");
    if (!values_.allFinite()) throw InvalidArgument("feature matrix contains NaN or Inf");
  }

  Eigen::Index dims() const { return values_.rows(); }
  Eigen::Index samples() const { return values_.cols(); }
  const Matrix& values() const { return values_; }
  auto column(Eigen::Index i) const { return values_.col(i); }

  FeatureMatrix select(std::span<const std::size_t> indices) const {
    Matrix out(values_.rows(), static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k)
      out.col(static_cast<Eigen::Index>(k)) = values_.col(static_cast<Eigen::Index>(indices[k]));
    return FeatureMatrix(std::move(out));
  }

private:
  Matrix values_;
};

/// Row-aligned modalities sharing one sample axis, with optional labels.
class MultiModalDataset {
public:
  MultiModalDataset() = default;

  MultiModalDataset(std::vector<FeatureMatrix> modalities,
                    std::optional<std::vector<Label>> labels = std::nullopt,
                    std::vector<std::string> sample_ids = {})
      : modalities_(std::move(modalities)), labels_(std::move(labels)), ids_(std::move(sample_ids)) {
    if (modalities_.empty()) throw InvalidArgument("dataset needs at least one modality");
    const auto n = modalities_.front().samples();
    for (std::size_t v = 1; v < modalities_.size(); ++v)
      if (modalities_[v].samples() != n)
        throw InvalidArgument("modality " + std::to_string(v) + " has " +
                              std::to_string(modalities_[v].samples()) + " samples, expected " +
                              std::to_string(n));
    if (labels_ && static_cast<Eigen::Index>(labels_->size()) != n)
      throw InvalidArgument("label count does not match sample count");
    if (ids_.empty()) {
      ids_.reserve(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) ids_.push_back(std::to_string(i));
    } else if (static_cast<Eigen::Index>(ids_.size()) != n) {
      throw InvalidArgument("sample id count does not match sample count");
    }
  }

  std::size_t modality_count() const { return modalities_.size(); }
  std::size_t samples() const { return static_cast<std::size_t>(modalities_.front().samples()); }
  const std::vector<FeatureMatrix>& modalities() const { return modalities_; }
  const FeatureMatrix& modality(std::size_t v) const { return modalities_.at(v); }
  bool has_labels() const { return labels_.has_value(); }
  const std::vector<Label>& labels() const {
    if (!labels_) throw InvalidArgument("dataset has no labels");
    return *labels_;
  }
  const std::vector<std::string>& sample_ids() const { return ids_; }

  MultiModalDataset subset(std::span<const std::size_t> indices) const {
    std::vector<FeatureMatrix> mods;
    mods.reserve(modalities_.size());
    for (const auto& m : modalities_) mods.push_back(m.select(indices));
    std::optional<std::vector<Label>> labels;
    if (labels_) {
      labels.emplace();
      for (auto i : indices) labels->push_back((*labels_)[i]);
    }
    std::vector<std::string> ids;
    for (auto i : indices) ids.push_back(ids_[i]);
    return MultiModalDataset(std::move(mods), std::move(labels), std::move(ids));
  }

  /// Samples labelled as target, in their original order.
  MultiModalDataset targets_only() const {
    std::vector<std::size_t> idx;
    const auto& l = labels();
    for (std::size_t i = 0; i < l.size(); ++i)
      if (l[i] == Label::target) idx.push_back(i);
    return subset(idx);
  }

  /// Swap the roles of the two classes.
  MultiModalDataset with_flipped_labels() const {
    auto l = labels();
    for (auto& x : l) x = (x == Label::target) ? Label::non_target : Label::target;
    return MultiModalDataset(modalities_, std::move(l), ids_);
  }

private:
  std::vector<FeatureMatrix> modalities_;
  std::optional<std::vector<Label>> labels_;
  std::vector<std::string> ids_;
};

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignment;
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] == fold) out.push_back(i);
    return out;
  }
  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i)
      if (assignment[i] != fold) out.push_back(i);
    return out;
  }
};

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::optional<double> parse_double(std::string_view cell) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) return std::nullopt;
  return value;
}

inline std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

inline std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataFormatError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

/// Reads an N x D numeric CSV into a D x N matrix. A first row in which no
/// cell parses as a number is treated as a header. An empty file yields 0 x 0.
inline Matrix read_csv_matrix(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  std::size_t first = 0;
  if (!lines.empty()) {
    const auto cells = detail::split_cells(lines.front());
    const bool any_numeric = std::any_of(cells.begin(), cells.end(),
                                         [](auto c) { return detail::parse_double(c).has_value(); });
    if (!any_numeric) first = 1;
  }
  const auto n = static_cast<Eigen::Index>(lines.size() - first);
  if (n == 0) return Matrix(0, 0);
  const auto d = static_cast<Eigen::Index>(detail::split_cells(lines[first]).size());
  Matrix out(d, n);
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto cells = detail::split_cells(lines[r]);
    const std::string where = path.string() + ":" + std::to_string(r + 1);
    if (static_cast<Eigen::Index>(cells.size()) != d)
      throw DataFormatError(where + ": expected " + std::to_string(d) + " columns, got " +
                            std::to_string(cells.size()));
    for (Eigen::Index c = 0; c < d; ++c) {
      const auto v = detail::parse_double(cells[static_cast<std::size_t>(c)]);
      if (!v) throw DataFormatError(where + ": non-numeric cell '" + std::string(cells[c]) + "'");
      if (!std::isfinite(*v)) throw DataFormatError(where + ": NaN/Inf cell");
      out(c, static_cast<Eigen::Index>(r - first)) = *v;
    }
  }
  return out;
}

/// Writes a D x N matrix as N rows of D shortest round-trip decimals.
inline void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.cols(); ++i) {
    for (Eigen::Index j = 0; j < m.rows(); ++j) {
      if (j) out << ',';
      out << detail::format_double(m(j, i));
    }
    out << '\n';
  }
  if (!out) throw DataFormatError("write failed for " + path.string());
}

inline std::vector<Label> read_labels(const std::filesystem::path& path) {
  const auto lines = detail::read_lines(path);
  std::vector<Label> labels;
  std::size_t first = 0;
  if (!lines.empty() && !detail::parse_double(detail::split_cells(lines.front()).front())) first = 1;
  for (std::size_t r = first; r < lines.size(); ++r) {
    const auto cells = detail::split_cells(lines[r]);
    const auto v = detail::parse_double(cells.front());
    if (cells.size() != 1 || !v || (*v != 0.0 && *v != 1.0))
      throw DataFormatError(path.string() + ":" + std::to_string(r + 1) + ": unknown label '" +
                            std::string(detail::trim(lines[r])) + "'");
    labels.push_back(*v == 1.0 ? Label::target : Label::non_target);
  }
  return labels;
}

inline void write_labels(const std::filesystem::path& path, std::span<const Label> labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot write " + path.string());
  for (auto l : labels) out << (l == Label::target ? "1\n" : "0\n");
}

/// One CSV per modality, optional label CSV. Rows are aligned by position.
inline MultiModalDataset load_dataset(std::span<const std::filesystem::path> paths,
                                      const std::optional<std::filesystem::path>& label_path = std::nullopt) {
  if (paths.empty()) throw InvalidArgument("at least one modality file is required");
  std::vector<FeatureMatrix> mods;
  for (const auto& p : paths) {
    auto m = read_csv_matrix(p);
    if (!mods.empty() && m.cols() != mods.front().samples())
      throw DataFormatError("row-count mismatch: " + p.string() + " has " + std::to_string(m.cols()) +
                            " rows, " + paths.front().string() + " has " +
                            std::to_string(mods.front().samples()));
    mods.emplace_back(std::move(m));
  }
  std::optional<std::vector<Label>> labels;
  if (label_path) {
    labels = read_labels(*label_path);
    if (static_cast<Eigen::Index>(labels->size()) != mods.front().samples())
      throw DataFormatError("row-count mismatch: " + label_path->string() + " has " +
                            std::to_string(labels->size()) + " labels");
  }
  return MultiModalDataset(std::move(mods), std::move(labels));
}

// ---------------------------------------------------------------------------
// Folds

/// Per class: seeded shuffle, then round-robin deal. The dealing cursor carries
/// over from one class to the next so total fold sizes also differ by at most one.
inline FoldPlan stratified_folds(std::span<const Label> labels, std::size_t k, std::uint64_t seed) {
  detail::require(k >= 2, "fold count must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<int>(labels[i])].push_back(i);
  for (int c : {1, 0})
    if (by_class[c].size() < k)
      throw InvalidArgument("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                            " samples, fewer than the " + std::to_string(k) + " folds");

  FoldPlan plan{k, std::vector<std::size_t>(labels.size(), 0), seed};
  Rng rng(seed);
  std::size_t cursor = 0;
  for (int c : {1, 0}) {
    rng.shuffle(std::span<std::size_t>(by_class[c]));
    for (auto idx : by_class[c]) {
      plan.assignment[idx] = cursor;
      cursor = (cursor + 1) % k;
    }
  }
  return plan;
}

inline void write_fold_plan(const std::filesystem::path& path, const FoldPlan& plan) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataFormatError("cannot write " + path.string());
  for (auto f : plan.assignment) out << f << '\n';
}

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthSpec {
  std::size_t n_target = 50;
  std::size_t n_outlier = 50;
  std::vector<std::size_t> dims{4, 4};  // one entry per modality
  double separation = 6.0;
  std::uint64_t seed = 7;
};

/// Targets ~ N(0, I) per modality; outliers ~ N(separation * u_v, I) with u_v a
/// seeded random unit direction. Targets come first, then outliers.
inline MultiModalDataset synth_multimodal(const SynthSpec& spec) {
  detail::require(spec.n_target > 0 && spec.n_outlier > 0, "sample counts must be positive");
  detail::require(!spec.dims.empty(), "at least one modality is required");
  detail::require(spec.separation >= 0.0, "separation must be non-negative");
  const auto n = static_cast<Eigen::Index>(spec.n_target + spec.n_outlier);
  Rng rng(spec.seed);
  std::vector<FeatureMatrix> mods;
  for (auto dim : spec.dims) {
    detail::require(dim > 0, "modality dimensionality must be positive");
    const auto d = static_cast<Eigen::Index>(dim);
    Vector dir(d);
    do {
      for (Eigen::Index j = 0; j < d; ++j) dir(j) = rng.normal();
    } while (dir.norm() == 0.0);
    dir /= dir.norm();
    Matrix x(d, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) x(j, i) = rng.normal();
    for (Eigen::Index i = static_cast<Eigen::Index>(spec.n_target); i < n; ++i)
      x.col(i) += spec.separation * dir;
    mods.emplace_back(std::move(x));
  }
  std::vector<Label> labels(spec.n_target, Label::target);
  labels.resize(static_cast<std::size_t>(n), Label::non_target);
  return MultiModalDataset(std::move(mods), std::move(labels));
}

}  // namespace mssvdd

#endif  // MSSVDD_DATAMODEL_HPP
