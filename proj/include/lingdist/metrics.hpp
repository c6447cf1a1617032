#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lingdist/core.hpp"
#include "lingdist/error.hpp"
#include "lingdist/parallel.hpp"
#include "lingdist/unicode.hpp"

namespace lingdist {

// ---------------------------------------------------------------------------
// Vector measures

/// Cosine similarity of two nonnegative vectors, in [0, 1].
inline double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::NullVector, "cosine of an all-zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), 0.0, 1.0);
}

/// Number of positions at which two equal-length sequences differ.
template <typename T>
std::size_t hamming_distance(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(u.size()) + " vs " + std::to_string(v.size()));
  std::size_t d = 0;
  for (std::size_t i = 0; i < u.size(); ++i) d += u[i] != v[i];
  return d;
}

inline std::size_t hamming_distance(const std::vector<uint8_t>& u, const std::vector<uint8_t>& v) {
  return hamming_distance(std::span<const uint8_t>(u), std::span<const uint8_t>(v));
}

// ---------------------------------------------------------------------------
// String measures. Strings are compared as sequences of Unicode scalar values.

/// Unit-cost edit distance over any pair of random-access sequences.
template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  const Seq& shorter = a.size() <= b.size() ? a : b;
  const Seq& longer = a.size() <= b.size() ? b : a;
  std::vector<std::size_t> row(shorter.size() + 1);
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= longer.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= shorter.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (longer[i - 1] == shorter[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row.back();
}

/// Length of the longest common contiguous substring.
template <typename Seq>
std::size_t longest_common_substring(const Seq& a, const Seq& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, cur[j]);
    }
    std::swap(prev, cur);
  }
  return best;
}

/// UTF-8 overloads normalize to NFC before comparing scalar values.
inline std::u32string nfc_scalars(std::string_view s) { return unicode::code_points(unicode::to_nfc(s)); }

inline std::size_t levenshtein(std::u32string_view a, std::u32string_view b) { return edit_distance(a, b); }

inline std::size_t levenshtein(std::string_view a, std::string_view b) {
  return edit_distance(nfc_scalars(a), nfc_scalars(b));
}

inline double ldn(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) throw Error(ErrorCode::BothEmpty, "normalized Levenshtein of two empty strings");
  return static_cast<double>(edit_distance(a, b)) / static_cast<double>(longest);
}

/// Levenshtein distance divided by the longer string's length.
inline double ldn(std::string_view a, std::string_view b) {
  return ldn(nfc_scalars(a), nfc_scalars(b));
}

inline double lcs_similarity(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) throw Error(ErrorCode::BothEmpty, "substring similarity of two empty strings");
  return static_cast<double>(longest_common_substring(a, b)) / static_cast<double>(longest);
}

/// Longest common substring length divided by the longer string's length.
inline double lcs_similarity(std::string_view a, std::string_view b) {
  return lcs_similarity(nfc_scalars(a), nfc_scalars(b));
}

namespace metrics_detail {

/// One language's word list decoded to code points, ordered by concept index.
using DecodedRow = std::vector<std::pair<std::size_t, std::u32string>>;

inline DecodedRow decode_row(const WordListTable& table, const LanguageId& lang) {
  DecodedRow out;
  if (const auto* row = table.row(lang))
    for (const auto& [concept_key, form] : *row) out.emplace_back(concept_key, unicode::code_points(form));
  return out;
}

template <typename PairScore>
double mean_over_shared(const DecodedRow& x, const DecodedRow& y, std::size_t min_shared, PairScore score,
                        const LanguageId& xl, const LanguageId& yl) {
  double sum = 0.0;
  std::size_t shared = 0;
  auto i = x.begin();
  auto j = y.begin();
  while (i != x.end() && j != y.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      sum += score(i->second, j->second);
      ++shared;
      ++i;
      ++j;
    }
  }
  if (shared == 0 || shared < min_shared)
    throw Error(ErrorCode::NoSharedConcepts, xl.str() + ", " + yl.str() + ": " + std::to_string(shared) + " shared");
  return sum / static_cast<double>(shared);
}

}  // namespace metrics_detail

/// Mean normalized Levenshtein distance over concepts attested in both lists.
inline double ldn_mean(const WordListTable& table, const LanguageId& x, const LanguageId& y, std::size_t min_shared = 1) {
  return metrics_detail::mean_over_shared(
      metrics_detail::decode_row(table, x), metrics_detail::decode_row(table, y), min_shared,
      [](const std::u32string& a, const std::u32string& b) { return ldn(a, b); }, x, y);
}

/// Mean longest-common-substring similarity over shared concepts.
inline double lcs_mean(const WordListTable& table, const LanguageId& x, const LanguageId& y, std::size_t min_shared = 1) {
  return metrics_detail::mean_over_shared(
      metrics_detail::decode_row(table, x), metrics_detail::decode_row(table, y), min_shared,
      [](const std::u32string& a, const std::u32string& b) { return lcs_similarity(a, b); }, x, y);
}

// ---------------------------------------------------------------------------
// Genealogical measures

/// Jaccard index of the two paths' node-name sets (leaves included).
inline double path_jaccard(const LineagePath& p, const LineagePath& q) {
  std::set<std::string_view> a(p.nodes().begin(), p.nodes().end());
  std::set<std::string_view> b(q.nodes().begin(), q.nodes().end());
  std::size_t common = 0;
  for (auto n : a) common += b.contains(n);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

/// Tree path length through the deepest shared node: edges from each leaf up
/// to it, summed. `nullopt` means the paths share no node (different
/// top-level families), i.e. infinitely far apart.
inline std::optional<std::size_t> lca_edge_distance(const LineagePath& p, const LineagePath& q) {
  const auto& pn = p.nodes();
  const auto& qn = q.nodes();
  for (std::size_t i = pn.size(); i-- > 0;) {
    auto it = std::find(qn.begin(), qn.end(), pn[i]);
    if (it == qn.end()) continue;
    const auto j = static_cast<std::size_t>(it - qn.begin());
    return (pn.size() - 1 - i) + (qn.size() - 1 - j);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Typological features

inline std::vector<std::size_t> resolve_features(const FeatureTable& t, std::span<const std::string> names) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& name : names) {
    auto idx = t.feature_index(name);
    if (!idx) throw Error(ErrorCode::InvalidArgument, "unknown feature '" + name + "'");
    out.push_back(*idx);
  }
  return out;
}

/// Fraction of subset features whose coded symbols differ. Both languages must
/// be coded for every feature in the subset.
inline double feature_hamming(const FeatureTable& t, const LanguageId& x, const LanguageId& y,
                              std::span<const std::size_t> features) {
  if (features.empty()) throw Error(ErrorCode::InvalidArgument, "empty feature subset");
  std::string missing;
  std::size_t differ = 0;
  for (std::size_t f : features) {
    const CellValue a = t.cell(x, f), b = t.cell(y, f);
    if (!a.is_coded() || !b.is_coded()) {
      missing += (missing.empty() ? "" : ",") + t.features()[f];
      continue;
    }
    differ += a.symbol() != b.symbol();
  }
  if (!missing.empty()) throw Error(ErrorCode::NotComparable, x.str() + ", " + y.str() + " missing " + missing);
  return static_cast<double>(differ) / static_cast<double>(features.size());
}

inline double feature_hamming(const FeatureTable& t, const LanguageId& x, const LanguageId& y,
                              std::span<const std::string> features) {
  const auto idx = resolve_features(t, features);
  return feature_hamming(t, x, y, std::span<const std::size_t>(idx));
}

// ---------------------------------------------------------------------------
// Matrix builder

enum class Metric { CosineConceptual, HammingConceptual, LdnMean, LcsMean, PathJaccard, LcaEdges, FeatureHamming };

inline constexpr std::string_view to_string(Metric m) noexcept {
  switch (m) {
    case Metric::CosineConceptual: return "cosine_conceptual";
    case Metric::HammingConceptual: return "hamming_conceptual";
    case Metric::LdnMean: return "ldn_mean";
    case Metric::LcsMean: return "lcs_mean";
    case Metric::PathJaccard: return "path_jaccard";
    case Metric::LcaEdges: return "lca_edges";
    case Metric::FeatureHamming: return "feature_hamming";
  }
  return "";
}

inline constexpr Metric kAllMetrics[] = {Metric::CosineConceptual, Metric::HammingConceptual, Metric::LdnMean,
                                         Metric::LcsMean,          Metric::PathJaccard,       Metric::LcaEdges,
                                         Metric::FeatureHamming};

inline Metric parse_metric(std::string_view name) {
  for (Metric m : kAllMetrics)
    if (to_string(m) == name) return m;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

inline constexpr MatrixKind metric_kind(Metric m) noexcept {
  switch (m) {
    case Metric::CosineConceptual:
    case Metric::LcsMean:
    case Metric::PathJaccard: return MatrixKind::Similarity;
    default: return MatrixKind::Distance;
  }
}

/// Metric name plus its parameters. Recognized parameters:
///   concepts    concept subset for the conceptual metrics (default: all)
///   features    feature subset for feature_hamming (required)
///   min_shared  minimum shared concepts for ldn_mean / lcs_mean (default 1)
struct MetricSpec {
  Metric name = Metric::CosineConceptual;
  std::vector<std::string> concepts;
  std::vector<std::string> features;
  std::size_t min_shared = 1;
};

/// Inputs a metric may draw on; only the one the metric needs must be set.
struct MetricData {
  const ConceptVectorSet* vectors = nullptr;
  const WordListTable* wordlist = nullptr;
  const LineageMap* lineages = nullptr;
  const FeatureTable* features = nullptr;
};

namespace metrics_detail {

template <typename T>
const T& require(const T* p, Metric m) {
  if (!p) throw Error(ErrorCode::MissingData, std::string(to_string(m)) + " needs its input table");
  return *p;
}

inline std::vector<uint64_t> pack_bits(std::span<const uint8_t> bits) {
  std::vector<uint64_t> words((bits.size() + 63) / 64, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) words[i / 64] |= uint64_t{1} << (i % 64);
  return words;
}

inline std::size_t popcount_xor(const std::vector<uint64_t>& a, const std::vector<uint64_t>& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += static_cast<std::size_t>(std::popcount(a[i] ^ b[i]));
  return d;
}

template <typename PairScore>
DistanceMatrix fill_matrix(const MetricSpec& spec, const std::vector<LanguageId>& languages, unsigned jobs,
                           PairScore score) {
  DistanceMatrix m(languages, std::string(to_string(spec.name)), metric_kind(spec.name));
  const std::size_t n = languages.size();
  auto with_pair = [&](std::size_t i, std::size_t j) {
    try {
      return score(i, j);
    } catch (const Error& e) {
      throw Error(e.code(), "pair (" + languages[i].str() + ", " + languages[j].str() + "): " + e.what());
    }
  };
  std::vector<double> diagonal(n, 0.0);
  // Rows write disjoint slots of the packed triangle.
  parallel_for(n, jobs, [&](std::size_t i) {
    if (m.kind() == MatrixKind::Similarity) diagonal[i] = with_pair(i, i);
    for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, with_pair(i, j));
  });
  for (std::size_t i = 0; i < n; ++i) m.set_diagonal(i, diagonal[i]);
  return m;
}

}  // namespace metrics_detail

/// Pairwise matrix over `languages` (in that order). Each unordered pair is
/// computed once; the result does not depend on `jobs`.
inline DistanceMatrix build_distance_matrix(const MetricSpec& spec, const MetricData& data,
                                            const std::vector<LanguageId>& languages, unsigned jobs = 1) {
  using namespace metrics_detail;
  const std::size_t n = languages.size();
  switch (spec.name) {
    case Metric::CosineConceptual:
    case Metric::HammingConceptual: {
      const auto& set = require(data.vectors, spec.name);
      const auto& subset = spec.concepts.empty() ? set.concepts() : spec.concepts;
      std::vector<std::vector<double>> reps(n);
      parallel_for(n, jobs, [&](std::size_t i) { reps[i] = concatenate_language_vector(set, languages[i], subset); });
      if (spec.name == Metric::CosineConceptual)
        return fill_matrix(spec, languages, jobs, [&](std::size_t i, std::size_t j) { return cosine_similarity(reps[i], reps[j]); });
      std::vector<std::vector<uint64_t>> bits(n);
      for (std::size_t i = 0; i < n; ++i) bits[i] = pack_bits(binarize(reps[i]));
      return fill_matrix(spec, languages, jobs,
                         [&](std::size_t i, std::size_t j) { return static_cast<double>(popcount_xor(bits[i], bits[j])); });
    }
    case Metric::LdnMean:
    case Metric::LcsMean: {
      const auto& table = require(data.wordlist, spec.name);
      std::vector<DecodedRow> rows(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!table.has_language(languages[i])) throw Error(ErrorCode::MissingData, "no word list for " + languages[i].str());
        rows[i] = decode_row(table, languages[i]);
      }
      const bool lev = spec.name == Metric::LdnMean;
      return fill_matrix(spec, languages, jobs, [&](std::size_t i, std::size_t j) {
        return mean_over_shared(
            rows[i], rows[j], spec.min_shared,
            [lev](const std::u32string& a, const std::u32string& b) { return lev ? ldn(a, b) : lcs_similarity(a, b); },
            languages[i], languages[j]);
      });
    }
    case Metric::PathJaccard:
    case Metric::LcaEdges: {
      const auto& lineages = require(data.lineages, spec.name);
      std::vector<const LineagePath*> paths(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto it = lineages.find(languages[i]);
        if (it == lineages.end()) throw Error(ErrorCode::MissingLineage, languages[i].str());
        paths[i] = &it->second.lineage;
      }
      if (spec.name == Metric::PathJaccard)
        return fill_matrix(spec, languages, jobs, [&](std::size_t i, std::size_t j) { return path_jaccard(*paths[i], *paths[j]); });
      return fill_matrix(spec, languages, jobs, [&](std::size_t i, std::size_t j) {
        auto d = lca_edge_distance(*paths[i], *paths[j]);
        return d ? static_cast<double>(*d) : std::numeric_limits<double>::infinity();
      });
    }
    case Metric::FeatureHamming: {
      const auto& table = require(data.features, spec.name);
      const auto idx = resolve_features(table, spec.features);
      if (idx.empty()) throw Error(ErrorCode::InvalidArgument, "feature_hamming needs a nonempty feature subset");
      std::vector<std::vector<uint8_t>> symbols(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto& row = symbols[i];
        for (std::size_t f : idx) {
          const CellValue c = table.cell(languages[i], f);
          if (!c.is_coded())
            throw Error(ErrorCode::NotComparable, languages[i].str() + " is not coded for " + table.features()[f]);
          row.push_back(c.symbol());
        }
      }
      const double denom = static_cast<double>(idx.size());
      return fill_matrix(spec, languages, jobs, [&](std::size_t i, std::size_t j) {
        return static_cast<double>(hamming_distance(std::span<const uint8_t>(symbols[i]), std::span<const uint8_t>(symbols[j]))) / denom;
      });
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unhandled metric");
}

}  // namespace lingdist
