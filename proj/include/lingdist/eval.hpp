#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lingdist/core.hpp"
#include "lingdist/error.hpp"
#include "lingdist/parallel.hpp"

namespace lingdist {

// ---------------------------------------------------------------------------
// Nearest neighbours

namespace eval_detail {

/// Index positions of the k nearest neighbours of position `i`. Closer means
/// smaller for distances and larger for similarities; ties go to the smaller
/// language id.
inline std::vector<std::size_t> nearest_positions(const DistanceMatrix& m, std::size_t i, std::size_t k) {
  const std::size_t n = m.size();
  if (n == 0 || k > n - 1)
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " with " + std::to_string(n) + " languages");
  std::vector<std::size_t> others;
  others.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) others.push_back(j);
  const bool similarity = m.kind() == MatrixKind::Similarity;
  const auto& index = m.index();
  auto closer = [&](std::size_t a, std::size_t b) {
    const double va = m(i, a), vb = m(i, b);
    if (va != vb) return similarity ? va > vb : va < vb;
    return index[a] < index[b];
  };
  std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k), others.end(), closer);
  others.resize(k);
  return others;
}

inline std::size_t require_position(const DistanceMatrix& m, const LanguageId& lang) {
  auto pos = m.position(lang);
  if (!pos) throw Error(ErrorCode::UnknownLanguage, lang.str());
  return *pos;
}

/// Top-level family for every matrix position, if known.
inline std::vector<const std::string*> families_by_position(const DistanceMatrix& m, const LineageMap& lineages) {
  std::vector<const std::string*> out(m.size(), nullptr);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (auto it = lineages.find(m.index()[i]); it != lineages.end()) out[i] = &top_level_family(it->second);
  return out;
}

inline const std::string& family_of(const std::vector<const std::string*>& families, const DistanceMatrix& m, std::size_t i) {
  if (!families[i]) throw Error(ErrorCode::MissingLineage, m.index()[i].str());
  return *families[i];
}

/// Positions of the languages in each listed family, in index order.
inline std::vector<std::vector<std::size_t>> members(const DistanceMatrix& m, const std::vector<const std::string*>& families,
                                                     std::span<const std::string> names) {
  std::vector<std::vector<std::size_t>> out(names.size());
  std::set<std::string_view> seen;
  for (std::size_t f = 0; f < names.size(); ++f) {
    if (!seen.insert(names[f]).second) throw Error(ErrorCode::InvalidArgument, "family '" + names[f] + "' listed twice");
    for (std::size_t i = 0; i < m.size(); ++i)
      if (families[i] && *families[i] == names[f]) out[f].push_back(i);
    if (out[f].empty()) throw Error(ErrorCode::EmptyFamily, names[f]);
  }
  return out;
}

}  // namespace eval_detail

inline std::vector<LanguageId> k_nearest(const DistanceMatrix& m, const LanguageId& lang, std::size_t k) {
  const std::size_t i = eval_detail::require_position(m, lang);
  std::vector<LanguageId> out;
  for (std::size_t j : eval_detail::nearest_positions(m, i, k)) out.push_back(m.index()[j]);
  return out;
}

/// True iff strictly more than k/2 of the k nearest neighbours share the
/// language's top-level family.
inline bool majority_family_correct(const DistanceMatrix& m, const LanguageId& lang, std::size_t k,
                                    const LineageMap& lineages) {
  const std::size_t i = eval_detail::require_position(m, lang);
  auto own = lineages.find(lang);
  if (own == lineages.end()) throw Error(ErrorCode::MissingLineage, lang.str());
  std::size_t same = 0;
  for (std::size_t j : eval_detail::nearest_positions(m, i, k)) {
    auto it = lineages.find(m.index()[j]);
    if (it == lineages.end()) throw Error(ErrorCode::MissingLineage, m.index()[j].str());
    same += top_level_family(it->second) == top_level_family(own->second);
  }
  return 2 * same > k;
}

// ---------------------------------------------------------------------------
// Family classification accuracy

struct FamilyAccuracy {
  std::string family;
  std::size_t n_languages = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

struct FamilyAccuracyReport {
  std::size_t k = 0;
  std::string metric_tag;
  std::vector<FamilyAccuracy> per_family;  // in the order requested
  std::size_t n_languages = 0;
  std::size_t correct = 0;
  double overall = 0.0;  // micro-average over all evaluated languages

  const FamilyAccuracy* find(const std::string& family) const {
    for (const auto& f : per_family)
      if (f.family == family) return &f;
    return nullptr;
  }
};

/// Majority-family accuracy for every listed family. Neighbours are drawn from
/// the whole matrix, including languages outside the listed families.
inline FamilyAccuracyReport family_accuracy(const DistanceMatrix& m, const LineageMap& lineages,
                                            std::span<const std::string> families, std::size_t k, unsigned jobs = 1) {
  using namespace eval_detail;
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  const auto fam = families_by_position(m, lineages);
  const auto groups = members(m, fam, families);

  std::vector<std::size_t> evaluated;
  for (const auto& g : groups) evaluated.insert(evaluated.end(), g.begin(), g.end());
  std::vector<char> correct(evaluated.size(), 0);
  parallel_for(evaluated.size(), jobs, [&](std::size_t e) {
    const std::size_t i = evaluated[e];
    std::size_t same = 0;
    for (std::size_t j : nearest_positions(m, i, k)) same += family_of(fam, m, j) == *fam[i];
    correct[e] = 2 * same > k;
  });

  FamilyAccuracyReport report{k, m.metric_tag(), {}, 0, 0, 0.0};
  std::size_t e = 0;
  for (std::size_t f = 0; f < groups.size(); ++f) {
    FamilyAccuracy row{families[f], groups[f].size(), 0, 0.0};
    for (std::size_t x = 0; x < groups[f].size(); ++x) row.correct += correct[e++] != 0;
    row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.n_languages);
    report.n_languages += row.n_languages;
    report.correct += row.correct;
    report.per_family.push_back(std::move(row));
  }
  report.overall = static_cast<double>(report.correct) / static_cast<double>(report.n_languages);
  return report;
}

// ---------------------------------------------------------------------------
// Neighbour family distribution

struct NeighborDistributionRow {
  std::string source_family;
  std::size_t n_languages = 0;
  std::vector<double> percent;  // per listed family, same order as report.families
  double other = 0.0;           // neighbours outside the listed families
};

struct NeighborDistributionReport {
  std::size_t k = 0;
  std::string metric_tag;
  std::vector<std::string> families;
  std::vector<NeighborDistributionRow> rows;
};

/// Mean percentage of each listed family among the k nearest neighbours of a
/// source family's languages. Values are unrounded.
inline NeighborDistributionReport neighbor_family_distribution(const DistanceMatrix& m, const LineageMap& lineages,
                                                               std::span<const std::string> families, std::size_t k = 10,
                                                               unsigned jobs = 1) {
  using namespace eval_detail;
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  const auto fam = families_by_position(m, lineages);
  const auto groups = members(m, fam, families);
  std::map<std::string, std::size_t> column;
  for (std::size_t f = 0; f < families.size(); ++f) column.emplace(families[f], f);

  NeighborDistributionReport report{k, m.metric_tag(), {families.begin(), families.end()}, {}};
  for (std::size_t f = 0; f < groups.size(); ++f) {
    const auto& group = groups[f];
    std::vector<std::vector<std::size_t>> per_lang(group.size(), std::vector<std::size_t>(families.size() + 1, 0));
    parallel_for(group.size(), jobs, [&](std::size_t g) {
      auto& row = per_lang[g];
      for (std::size_t j : nearest_positions(m, group[g], k)) {
        auto it = column.find(family_of(fam, m, j));
        ++row[it == column.end() ? families.size() : it->second];
      }
    });
    std::vector<std::size_t> totals(families.size() + 1, 0);
    for (const auto& lang_row : per_lang)
      for (std::size_t c = 0; c < totals.size(); ++c) totals[c] += lang_row[c];
    const double slots = static_cast<double>(k * group.size());
    NeighborDistributionRow row{families[f], group.size(), {}, 100.0 * static_cast<double>(totals.back()) / slots};
    for (std::size_t c = 0; c < families.size(); ++c) row.percent.push_back(100.0 * static_cast<double>(totals[c]) / slots);
    report.rows.push_back(std::move(row));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Feature coverage and selection

struct FeatureCoverageEntry {
  std::string feature;
  double coded = 0.0;
  double unknown = 0.0;
  double missing = 0.0;
};

struct FeatureCoverageReport {
  std::string family;
  std::size_t n_languages = 0;
  std::vector<FeatureCoverageEntry> entries;  // table feature order

  std::map<std::string, double> coverage() const {
    std::map<std::string, double> out;
    for (const auto& e : entries) out.emplace(e.feature, e.coded);
    return out;
  }
};

/// Fraction of the family's languages (among the table's rows) with a coded
/// cell for each feature; unknown and missing fractions are kept apart.
inline FeatureCoverageReport feature_coverage(const FeatureTable& t, const LineageMap& lineages, const std::string& family) {
  std::vector<const std::vector<CellValue>*> rows;
  for (const auto& lang : t.languages())
    if (auto it = lineages.find(lang); it != lineages.end() && top_level_family(it->second) == family)
      rows.push_back(t.row(lang));
  if (rows.empty()) throw Error(ErrorCode::EmptyFamily, family);

  FeatureCoverageReport report{family, rows.size(), {}};
  const double n = static_cast<double>(rows.size());
  for (std::size_t f = 0; f < t.features().size(); ++f) {
    std::size_t coded = 0, unknown = 0, missing = 0;
    for (const auto* row : rows) switch ((*row)[f].state()) {
        case CellValue::State::Coded: ++coded; break;
        case CellValue::State::Unknown: ++unknown; break;
        case CellValue::State::Missing: ++missing; break;
      }
    report.entries.push_back({t.features()[f], coded / n, unknown / n, missing / n});
  }
  return report;
}

namespace eval_detail {

/// All feature indices ranked by coded-cell count, descending; ties by name.
inline std::vector<std::size_t> rank_features(const FeatureTable& t) {
  std::vector<std::size_t> counts(t.features().size(), 0);
  for (const auto& lang : t.languages()) {
    const auto& row = *t.row(lang);
    for (std::size_t f = 0; f < row.size(); ++f) counts[f] += row[f].is_coded();
  }
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return t.features()[a] < t.features()[b];
  });
  return order;
}

inline void check_n(const FeatureTable& t, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "feature count must be positive");
  if (n > t.features().size())
    throw Error(ErrorCode::NTooLarge, std::to_string(n) + " > " + std::to_string(t.features().size()) + " features");
}

}  // namespace eval_detail

/// The n features coded for the most languages.
inline std::vector<std::string> select_most_frequent_features(const FeatureTable& t, std::size_t n) {
  eval_detail::check_n(t, n);
  const auto order = eval_detail::rank_features(t);
  std::vector<std::string> out;
  for (std::size_t r = 0; r < n; ++r) out.push_back(t.features()[order[r]]);
  return out;
}

/// Languages coded for every feature in the subset.
inline std::set<LanguageId> comparable_languages(const FeatureTable& t, std::span<const std::string> features) {
  if (features.empty()) throw Error(ErrorCode::InvalidArgument, "empty feature subset");
  std::vector<std::size_t> idx;
  for (const auto& name : features) {
    auto i = t.feature_index(name);
    if (!i) throw Error(ErrorCode::InvalidArgument, "unknown feature '" + name + "'");
    idx.push_back(*i);
  }
  std::set<LanguageId> out;
  for (const auto& lang : t.languages()) {
    const auto& row = *t.row(lang);
    if (std::all_of(idx.begin(), idx.end(), [&](std::size_t f) { return row[f].is_coded(); })) out.insert(lang);
  }
  return out;
}

/// (n, number of languages comparable under the n most frequent features).
/// `n_values` must be ascending.
inline std::vector<std::pair<std::size_t, std::size_t>> feature_tradeoff_curve(const FeatureTable& t,
                                                                              std::span<const std::size_t> n_values) {
  if (!std::is_sorted(n_values.begin(), n_values.end()))
    throw Error(ErrorCode::InvalidArgument, "feature counts must be sorted ascending");
  for (std::size_t n : n_values) eval_detail::check_n(t, n);
  const auto order = eval_detail::rank_features(t);
  // A language is comparable under the top n iff its coded prefix along the
  // ranking has length >= n.
  std::vector<std::size_t> prefix;
  prefix.reserve(t.languages().size());
  for (const auto& lang : t.languages()) {
    const auto& row = *t.row(lang);
    std::size_t p = 0;
    while (p < order.size() && row[order[p]].is_coded()) ++p;
    prefix.push_back(p);
  }
  std::vector<std::pair<std::size_t, std::size_t>> curve;
  for (std::size_t n : n_values)
    curve.emplace_back(n, static_cast<std::size_t>(std::count_if(prefix.begin(), prefix.end(), [n](std::size_t p) { return p >= n; })));
  return curve;
}

}  // namespace lingdist
