#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lingdist/error.hpp"
#include "lingdist/unicode.hpp"

namespace lingdist {

/// Opaque language code (Glottolog / ISO 639-3 style). Ordered by Unicode
/// scalar value, which for UTF-8 coincides with byte order.
class LanguageId {
 public:
  LanguageId() = default;
  explicit LanguageId(std::string code) : code_(std::move(code)) {
    if (code_.empty()) throw Error(ErrorCode::InvalidArgument, "empty language id");
    for (char32_t c : unicode::code_points(code_))
      if (unicode::is_space(c)) throw Error(ErrorCode::InvalidArgument, "whitespace in language id '" + code_ + "'");
  }

  const std::string& str() const noexcept { return code_; }

  friend auto operator<=>(const LanguageId&, const LanguageId&) = default;
  friend bool operator==(const LanguageId&, const LanguageId&) = default;

 private:
  std::string code_;
};

/// Genealogical path from the top-level family down to the language leaf.
class LineagePath {
 public:
  explicit LineagePath(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw Error(ErrorCode::EmptyPath, "lineage path has no nodes");
    std::set<std::string_view> seen;
    for (const auto& n : nodes_) {
      if (n.empty()) throw Error(ErrorCode::EmptyPath, "empty node name in lineage path");
      if (!seen.insert(n).second) throw Error(ErrorCode::InvalidArgument, "duplicate node '" + n + "' in lineage path");
    }
  }

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  const std::string& family() const noexcept { return nodes_.front(); }
  const std::string& leaf() const noexcept { return nodes_.back(); }

  friend bool operator==(const LineagePath&, const LineagePath&) = default;

 private:
  std::vector<std::string> nodes_;
};

struct LanguageProfile {
  LanguageId id;
  LineagePath lineage;

  friend bool operator==(const LanguageProfile&, const LanguageProfile&) = default;
};

using LineageMap = std::map<LanguageId, LanguageProfile>;

inline const std::string& top_level_family(const LanguageProfile& profile) noexcept {
  return profile.lineage.family();
}

// ---------------------------------------------------------------------------
// Word lists

/// Sparse (language, concept) -> form table. One form per cell.
class WordListTable {
 public:
  /// Forms are stripped and NFC-normalized; empty forms are rejected.
  void add(const LanguageId& lang, const std::string& concept_key, std::string_view form) {
    std::string cleaned = unicode::to_nfc(unicode::strip(form));
    if (cleaned.empty()) throw Error(ErrorCode::EmptyForm, lang.str() + "/" + concept_key);
    std::string name = unicode::to_nfc(unicode::strip(concept_key));
    if (name.empty()) throw Error(ErrorCode::InvalidArgument, "empty concept name");
    auto [it, fresh] = concept_index_.try_emplace(name, concepts_.size());
    if (fresh) concepts_.push_back(name);
    auto& row = rows_[lang];
    if (!row.try_emplace(it->second, std::move(cleaned)).second)
      throw Error(ErrorCode::DuplicateEntry, lang.str() + "/" + name);
    ++size_;
  }

  const std::vector<std::string>& concepts() const noexcept { return concepts_; }

  std::optional<std::size_t> concept_index(std::string_view concept_key) const {
    auto it = concept_index_.find(std::string(concept_key));
    if (it == concept_index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string* form(const LanguageId& lang, std::size_t concept_key) const {
    auto row = rows_.find(lang);
    if (row == rows_.end()) return nullptr;
    auto cell = row->second.find(concept_key);
    return cell == row->second.end() ? nullptr : &cell->second;
  }

  const std::string* form(const LanguageId& lang, std::string_view concept_key) const {
    auto idx = concept_index(concept_key);
    return idx ? form(lang, *idx) : nullptr;
  }

  /// Sorted list of languages with at least one entry.
  std::vector<LanguageId> languages() const {
    std::vector<LanguageId> out;
    out.reserve(rows_.size());
    for (const auto& [lang, _] : rows_) out.push_back(lang);
    return out;
  }

  bool has_language(const LanguageId& lang) const { return rows_.contains(lang); }

  /// Concept index -> form for one language, in concept-index order.
  const std::map<std::size_t, std::string>* row(const LanguageId& lang) const {
    auto it = rows_.find(lang);
    return it == rows_.end() ? nullptr : &it->second;
  }

  std::size_t size() const noexcept { return size_; }

  friend bool operator==(const WordListTable& a, const WordListTable& b) {
    return a.concepts_ == b.concepts_ && a.rows_ == b.rows_;
  }

 private:
  std::vector<std::string> concepts_;
  std::unordered_map<std::string, std::size_t> concept_index_;
  std::map<LanguageId, std::map<std::size_t, std::string>> rows_;
  std::size_t size_ = 0;
};

// ---------------------------------------------------------------------------
// Typological features

/// Feature cell: a coded symbol, an explicit unknown ("?"), or absent.
class CellValue {
 public:
  enum class State : uint8_t { Coded, Unknown, Missing };

  static constexpr CellValue coded(uint8_t symbol) noexcept { return CellValue(State::Coded, symbol); }
  static constexpr CellValue unknown() noexcept { return CellValue(State::Unknown, 0); }
  static constexpr CellValue missing() noexcept { return CellValue(State::Missing, 0); }

  constexpr CellValue() noexcept = default;

  constexpr State state() const noexcept { return state_; }
  constexpr bool is_coded() const noexcept { return state_ == State::Coded; }
  constexpr uint8_t symbol() const noexcept { return symbol_; }

  friend constexpr bool operator==(const CellValue&, const CellValue&) = default;

 private:
  constexpr CellValue(State s, uint8_t v) noexcept : state_(s), symbol_(v) {}

  State state_ = State::Missing;
  uint8_t symbol_ = 0;
};

class FeatureTable {
 public:
  FeatureTable() = default;

  explicit FeatureTable(std::vector<std::string> features) : features_(std::move(features)), symbols_(features_.size()) {
    for (std::size_t i = 0; i < features_.size(); ++i) {
      if (features_[i].empty()) throw Error(ErrorCode::MalformedHeader, "empty feature name");
      if (!feature_index_.try_emplace(features_[i], i).second)
        throw Error(ErrorCode::MalformedHeader, "duplicate feature '" + features_[i] + "'");
    }
  }

  void add_row(const LanguageId& lang, std::vector<CellValue> cells) {
    if (cells.size() != features_.size())
      throw Error(ErrorCode::LengthMismatch, lang.str() + ": " + std::to_string(cells.size()) + " cells for " +
                                                 std::to_string(features_.size()) + " features");
    if (row_index_.contains(lang)) throw Error(ErrorCode::DuplicateLanguageRow, lang.str());
    for (std::size_t f = 0; f < cells.size(); ++f)
      if (cells[f].is_coded()) symbols_[f].insert(cells[f].symbol());
    row_index_.emplace(lang, rows_.size());
    languages_.push_back(lang);
    rows_.push_back(std::move(cells));
  }

  const std::vector<std::string>& features() const noexcept { return features_; }
  /// Languages in row (insertion) order.
  const std::vector<LanguageId>& languages() const noexcept { return languages_; }

  std::optional<std::size_t> feature_index(std::string_view name) const {
    auto it = feature_index_.find(std::string(name));
    if (it == feature_index_.end()) return std::nullopt;
    return it->second;
  }

  const std::vector<CellValue>* row(const LanguageId& lang) const {
    auto it = row_index_.find(lang);
    return it == row_index_.end() ? nullptr : &rows_[it->second];
  }

  CellValue cell(const LanguageId& lang, std::size_t feature) const {
    const auto* r = row(lang);
    return r ? (*r)[feature] : CellValue::missing();
  }

  /// Coded symbols observed for a feature.
  const std::set<uint8_t>& symbols(std::size_t feature) const { return symbols_.at(feature); }
  std::size_t arity(std::size_t feature) const { return symbols_.at(feature).size(); }

  friend bool operator==(const FeatureTable& a, const FeatureTable& b) {
    return a.features_ == b.features_ && a.languages_ == b.languages_ && a.rows_ == b.rows_;
  }

 private:
  std::vector<std::string> features_;
  std::unordered_map<std::string, std::size_t> feature_index_;
  std::vector<std::set<uint8_t>> symbols_;
  std::vector<LanguageId> languages_;
  std::map<LanguageId, std::size_t> row_index_;
  std::vector<std::vector<CellValue>> rows_;
};

// ---------------------------------------------------------------------------
// Conceptual vectors

/// Per-language, per-concept association vectors. Every concept carries one
/// label list shared by all languages; label 1 is the concept's own
/// realization in the source language.
class ConceptVectorSet {
 public:
  static constexpr std::size_t kDefaultDims = 100;

  ConceptVectorSet() = default;

  ConceptVectorSet(std::vector<std::string> concepts, std::size_t dims_per_concept,
                   std::map<std::string, std::vector<std::string>> labels)
      : concepts_(std::move(concepts)), dims_(dims_per_concept), labels_(std::move(labels)) {
    if (dims_ == 0) throw Error(ErrorCode::InvalidArgument, "dims_per_concept must be positive");
    for (std::size_t i = 0; i < concepts_.size(); ++i) {
      if (!concept_index_.try_emplace(concepts_[i], i).second)
        throw Error(ErrorCode::InvalidArgument, "duplicate concept '" + concepts_[i] + "'");
      auto it = labels_.find(concepts_[i]);
      if (it == labels_.end()) throw Error(ErrorCode::MissingLabelBlock, concepts_[i]);
      if (it->second.size() != dims_)
        throw Error(ErrorCode::MissingLabelBlock, concepts_[i] + ": expected " + std::to_string(dims_) + " labels, got " +
                                                      std::to_string(it->second.size()));
    }
    if (labels_.size() != concepts_.size())
      throw Error(ErrorCode::InvalidArgument, "label blocks for concepts outside the concept set");
  }

  const std::vector<std::string>& concepts() const noexcept { return concepts_; }
  std::size_t dims_per_concept() const noexcept { return dims_; }
  const std::vector<std::string>& labels(const std::string& concept_key) const {
    auto it = labels_.find(concept_key);
    if (it == labels_.end()) throw Error(ErrorCode::MissingLabelBlock, concept_key);
    return it->second;
  }

  std::optional<std::size_t> concept_index(std::string_view concept_key) const {
    auto it = concept_index_.find(std::string(concept_key));
    if (it == concept_index_.end()) return std::nullopt;
    return it->second;
  }

  void set_vector(const LanguageId& lang, const std::string& concept_key, std::vector<double> values) {
    auto idx = concept_index(concept_key);
    if (!idx) throw Error(ErrorCode::MissingLabelBlock, concept_key);
    if (values.size() != dims_)
      throw Error(ErrorCode::LengthMismatch, lang.str() + "/" + concept_key + ": " + std::to_string(values.size()) + " values");
    for (double v : values)
      if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::ValueOutOfRange, lang.str() + "/" + concept_key);
    if (!vectors_[lang].try_emplace(*idx, std::move(values)).second)
      throw Error(ErrorCode::DuplicateEntry, lang.str() + "/" + concept_key);
  }

  const std::vector<double>* vector(const LanguageId& lang, std::size_t concept_key) const {
    auto row = vectors_.find(lang);
    if (row == vectors_.end()) return nullptr;
    auto it = row->second.find(concept_key);
    return it == row->second.end() ? nullptr : &it->second;
  }

  const std::vector<double>* vector(const LanguageId& lang, std::string_view concept_key) const {
    auto idx = concept_index(concept_key);
    return idx ? vector(lang, *idx) : nullptr;
  }

  std::vector<LanguageId> languages() const {
    std::vector<LanguageId> out;
    for (const auto& [lang, _] : vectors_) out.push_back(lang);
    return out;
  }

  friend bool operator==(const ConceptVectorSet& a, const ConceptVectorSet& b) {
    return a.concepts_ == b.concepts_ && a.dims_ == b.dims_ && a.labels_ == b.labels_ && a.vectors_ == b.vectors_;
  }

 private:
  std::vector<std::string> concepts_;
  std::size_t dims_ = kDefaultDims;
  std::map<std::string, std::vector<std::string>> labels_;
  std::unordered_map<std::string, std::size_t> concept_index_;
  std::map<LanguageId, std::map<std::size_t, std::vector<double>>> vectors_;
};

/// Concatenate one language's concept blocks. Blocks follow the order of the
/// set's concept list, whatever the order of `subset`.
inline std::vector<double> concatenate_language_vector(const ConceptVectorSet& set, const LanguageId& lang,
                                                       std::span<const std::string> subset) {
  std::vector<std::size_t> blocks;
  blocks.reserve(subset.size());
  for (const auto& concept_key : subset) {
    auto idx = set.concept_index(concept_key);
    if (!idx) throw Error(ErrorCode::MissingConcept, lang.str() + "/" + concept_key);
    blocks.push_back(*idx);
  }
  std::sort(blocks.begin(), blocks.end());
  blocks.erase(std::unique(blocks.begin(), blocks.end()), blocks.end());

  std::vector<double> out;
  out.reserve(blocks.size() * set.dims_per_concept());
  for (std::size_t b : blocks) {
    const auto* v = set.vector(lang, b);
    if (!v) throw Error(ErrorCode::MissingConcept, lang.str() + "/" + set.concepts()[b]);
    out.insert(out.end(), v->begin(), v->end());
  }
  return out;
}

/// 1 where the association score is strictly positive.
inline std::vector<uint8_t> binarize(std::span<const double> v) {
  std::vector<uint8_t> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return static_cast<uint8_t>(x > 0.0); });
  return out;
}

inline std::vector<uint8_t> binarize(std::span<const uint8_t> v) {
  std::vector<uint8_t> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](uint8_t x) { return static_cast<uint8_t>(x > 0); });
  return out;
}

// ---------------------------------------------------------------------------
// Distance matrices

enum class MatrixKind { Distance, Similarity };

inline std::string_view to_string(MatrixKind kind) noexcept {
  return kind == MatrixKind::Distance ? "distance" : "similarity";
}

/// Symmetric matrix over a language index. Off-diagonal values are stored once
/// in a packed upper triangle; `(j, i)` reads mirror `(i, j)`.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;

  DistanceMatrix(std::vector<LanguageId> index, std::string metric_tag, MatrixKind kind)
      : index_(std::move(index)),
        tag_(std::move(metric_tag)),
        kind_(kind),
        diagonal_(index_.size(), 0.0),
        upper_(index_.size() * (index_.size() ? index_.size() - 1 : 0) / 2, 0.0) {
    for (std::size_t i = 0; i < index_.size(); ++i)
      if (!position_.try_emplace(index_[i].str(), i).second)
        throw Error(ErrorCode::DuplicateLanguage, index_[i].str());
  }

  std::size_t size() const noexcept { return index_.size(); }
  const std::vector<LanguageId>& index() const noexcept { return index_; }
  const std::string& metric_tag() const noexcept { return tag_; }
  MatrixKind kind() const noexcept { return kind_; }

  std::optional<std::size_t> position(const LanguageId& lang) const {
    auto it = position_.find(lang.str());
    if (it == position_.end()) return std::nullopt;
    return it->second;
  }

  double operator()(std::size_t i, std::size_t j) const {
    if (i == j) return diagonal_[i];
    if (i > j) std::swap(i, j);
    return upper_[packed(i, j)];
  }

  void set(std::size_t i, std::size_t j, double value) {
    check_value(value);
    if (i == j) {
      set_diagonal(i, value);
      return;
    }
    if (i > j) std::swap(i, j);
    upper_[packed(i, j)] = value;
  }

  void set_diagonal(std::size_t i, double value) {
    check_value(value);
    if (kind_ == MatrixKind::Distance && value != 0.0)
      throw Error(ErrorCode::NonzeroDiagonal, index_[i].str() + " = " + std::to_string(value));
    diagonal_[i] = value;
  }

  friend bool operator==(const DistanceMatrix& a, const DistanceMatrix& b) {
    return a.index_ == b.index_ && a.tag_ == b.tag_ && a.kind_ == b.kind_ && a.diagonal_ == b.diagonal_ &&
           a.upper_ == b.upper_;
  }

 private:
  std::size_t packed(std::size_t i, std::size_t j) const noexcept {
    const std::size_t n = index_.size();
    return i * n - i * (i + 1) / 2 + (j - i - 1);
  }

  static void check_value(double v) {
    if (std::isnan(v) || v < 0.0) throw Error(ErrorCode::ValueOutOfRange, "matrix values must be nonnegative");
  }

  std::vector<LanguageId> index_;
  std::string tag_;
  MatrixKind kind_ = MatrixKind::Distance;
  std::vector<double> diagonal_;
  std::vector<double> upper_;
  std::unordered_map<std::string, std::size_t> position_;
};

}  // namespace lingdist
