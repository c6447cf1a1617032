#pragma once

// Two-pass concept alignment over a verse-aligned corpus.
//
// Forward pass: starting from the verses whose source text contains one of
// the concept's query strings, greedily pick the target-language character
// n-grams most associated with that verse set, removing covered verses after
// each pick. Backward pass: the same search from the verses covered by the
// accepted target n-grams, over source-language n-grams. The backward hits
// become the concept's associated dimensions.
//
// Association is the chi-square statistic of the 2x2 verse presence table,
// counting only positive association. Statistics are computed over the
// verses where both languages have text.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "lingdist/core.hpp"
#include "lingdist/error.hpp"
#include "lingdist/ingest.hpp"
#include "lingdist/parallel.hpp"
#include "lingdist/unicode.hpp"

namespace lingdist {

struct ConceptualizerConfig {
  std::size_t min_n = 1;
  std::size_t max_n = 10;
  std::size_t min_count = 2;
  double min_score = 3.84;  // chi-square 95% critical value, 1 d.o.f.
  std::size_t max_targets = 5;
  std::size_t dims_per_concept = ConceptVectorSet::kDefaultDims;

  void validate() const {
    if (min_n == 0 || max_n < min_n) throw Error(ErrorCode::InvalidArgument, "n-gram lengths must satisfy 1 <= min_n <= max_n");
    if (dims_per_concept == 0) throw Error(ErrorCode::InvalidArgument, "dims_per_concept must be positive");
    if (max_targets == 0) throw Error(ErrorCode::InvalidArgument, "max_targets must be positive");
    if (min_score < 0.0) throw Error(ErrorCode::InvalidArgument, "min_score must be nonnegative");
  }
};

struct ConceptQuery {
  std::string concept_name;
  std::vector<std::string> source_strings;
  LanguageId source_lang;

  /// Strips and NFC-normalizes query strings; rejects empty ones.
  static ConceptQuery make(std::string concept_name, const std::vector<std::string>& strings, LanguageId source_lang) {
    if (concept_name.empty()) throw Error(ErrorCode::InvalidArgument, "empty concept name");
    ConceptQuery q{std::move(concept_name), {}, std::move(source_lang)};
    for (const auto& s : strings) {
      std::string cleaned = unicode::to_nfc(unicode::strip(s));
      if (cleaned.empty()) throw Error(ErrorCode::InvalidArgument, q.concept_name + ": empty query string");
      q.source_strings.push_back(std::move(cleaned));
    }
    if (q.source_strings.empty()) throw Error(ErrorCode::InvalidArgument, q.concept_name + ": no query strings");
    return q;
  }
};

struct ScoredString {
  std::string ngram;
  double score = 0.0;

  friend bool operator==(const ScoredString&, const ScoredString&) = default;
};

struct AssociationResult {
  std::vector<ScoredString> target_strings;
  std::vector<ScoredString> backward_concepts;
};

/// Label for dimensions with no associated n-gram; those stay zero.
inline const std::string kPaddingLabel = "<pad>";

/// Token boundary marker wrapped around every whitespace-delimited token.
inline constexpr char32_t kBoundary = U'·';

using VerseSet = boost::dynamic_bitset<>;

/// Chi-square of the 2x2 presence table, or 0 when a marginal is empty or full
/// or when co-occurrence does not exceed its expectation.
inline double association_score(std::size_t both, std::size_t in_a, std::size_t in_b, std::size_t universe) {
  if (universe == 0 || in_a == 0 || in_b == 0 || in_a == universe || in_b == universe) return 0.0;
  const double n = static_cast<double>(universe);
  const double n11 = static_cast<double>(both);
  const double n12 = static_cast<double>(in_a - both);
  const double n21 = static_cast<double>(in_b - both);
  const double n22 = n - n11 - n12 - n21;
  const double a = static_cast<double>(in_a), b = static_cast<double>(in_b);
  if (n11 * n <= a * b) return 0.0;
  const double cross = n11 * n22 - n12 * n21;
  return n * cross * cross / (a * (n - a) * b * (n - b));
}

inline double association_score(const VerseSet& a, const VerseSet& b, const VerseSet& universe) {
  return association_score((a & b).count(), a.count(), b.count(), universe.count());
}

/// Set-of-verse-id form. Both sets must be subsets of `universe`.
inline double association_score(const std::set<std::string>& a, const std::set<std::string>& b,
                                const std::set<std::string>& universe) {
  if (universe.empty()) throw Error(ErrorCode::InvalidArgument, "empty verse universe");
  std::size_t both = 0;
  for (const auto& v : a) {
    if (!universe.contains(v)) throw Error(ErrorCode::InvalidArgument, "verse '" + v + "' outside the universe");
    both += b.contains(v);
  }
  for (const auto& v : b)
    if (!universe.contains(v)) throw Error(ErrorCode::InvalidArgument, "verse '" + v + "' outside the universe");
  return association_score(both, a.size(), b.size(), universe.size());
}

/// Text with every token wrapped in boundary markers, tokens joined by a
/// single space. Query strings and n-grams match as substrings of it.
inline std::string marked_text(std::string_view text) {
  std::u32string out;
  for (const auto& tok : unicode::split_whitespace(unicode::code_points(text))) {
    if (!out.empty()) out.push_back(U' ');
    out.push_back(kBoundary);
    out += tok;
    out.push_back(kBoundary);
  }
  return unicode::to_utf8(out);
}

/// Distinct character n-grams of one text, within marked tokens.
inline std::set<std::string> text_ngrams(std::string_view text, std::size_t min_n, std::size_t max_n) {
  std::set<std::string> out;
  for (const auto& tok : unicode::split_whitespace(unicode::code_points(text))) {
    std::u32string marked;
    marked.push_back(kBoundary);
    marked += tok;
    marked.push_back(kBoundary);
    for (std::size_t start = 0; start < marked.size(); ++start)
      for (std::size_t len = min_n; len <= max_n && start + len <= marked.size(); ++len) {
        auto gram = std::u32string_view(marked).substr(start, len);
        if (std::all_of(gram.begin(), gram.end(), [](char32_t c) { return c == kBoundary; })) continue;
        out.insert(unicode::to_utf8(gram));
      }
  }
  return out;
}

/// Per-(source, target) index: the shared verse universe, marked texts of both
/// sides, and n-gram occurrence sets for candidates meeting `min_count`.
class AlignmentIndex {
 public:
  AlignmentIndex(const VerseAlignedCorpus& corpus, const LanguageId& source, const LanguageId& target,
                 const ConceptualizerConfig& config)
      : source_(source), target_(target) {
    config.validate();
    if (!corpus.languages().contains(source)) throw Error(ErrorCode::UnknownLanguage, source.str());
    if (!corpus.languages().contains(target)) throw Error(ErrorCode::UnknownLanguage, target.str());
    for (const auto& [verse, texts] : corpus.verses()) {
      auto s = texts.find(source), t = texts.find(target);
      if (s == texts.end() || t == texts.end()) continue;
      verses_.push_back(verse);
      source_text_.push_back(marked_text(s->second));
      target_text_.push_back(marked_text(t->second));
    }
    source_candidates_ = build_candidates(corpus, source, config);
    target_candidates_ = build_candidates(corpus, target, config);
  }

  std::size_t universe_size() const noexcept { return verses_.size(); }
  const std::vector<std::string>& verses() const noexcept { return verses_; }
  const LanguageId& source() const noexcept { return source_; }
  const LanguageId& target() const noexcept { return target_; }

  /// Verses whose source (or target) text contains any of `strings`.
  VerseSet source_containing(const std::vector<std::string>& strings) const { return containing(source_text_, strings); }
  VerseSet target_containing(const std::vector<std::string>& strings) const { return containing(target_text_, strings); }

  /// n-gram -> occurrence set, ordered lexicographically.
  const std::map<std::string, VerseSet>& source_candidates() const noexcept { return source_candidates_; }
  const std::map<std::string, VerseSet>& target_candidates() const noexcept { return target_candidates_; }

 private:
  static VerseSet containing(const std::vector<std::string>& texts, const std::vector<std::string>& strings) {
    VerseSet out(texts.size());
    for (std::size_t v = 0; v < texts.size(); ++v)
      for (const auto& s : strings)
        if (texts[v].find(s) != std::string::npos) {
          out.set(v);
          break;
        }
    return out;
  }

  std::map<std::string, VerseSet> build_candidates(const VerseAlignedCorpus& corpus, const LanguageId& lang,
                                                   const ConceptualizerConfig& config) const {
    std::map<std::string, VerseSet> occ;
    for (std::size_t v = 0; v < verses_.size(); ++v) {
      const std::string* t = corpus.text(verses_[v], lang);
      for (auto& gram : text_ngrams(*t, config.min_n, config.max_n)) {
        auto [it, fresh] = occ.try_emplace(std::move(gram), VerseSet(verses_.size()));
        it->second.set(v);
      }
    }
    std::erase_if(occ, [&](const auto& kv) { return kv.second.count() < config.min_count; });
    return occ;
  }

  LanguageId source_, target_;
  std::vector<std::string> verses_;
  std::vector<std::string> source_text_, target_text_;
  std::map<std::string, VerseSet> source_candidates_, target_candidates_;
};

/// Relative gap below which two scores count as tied.
inline constexpr double kScoreTolerance = 1e-9;

/// One greedy step: the candidate with the highest association to `remaining`;
/// ties go to the lexicographically smallest n-gram. Returns end() if every
/// candidate scores 0.
inline std::map<std::string, VerseSet>::const_iterator best_candidate(const std::map<std::string, VerseSet>& candidates,
                                                                      const VerseSet& remaining, std::size_t universe,
                                                                      double* score_out) {
  auto best = candidates.end();
  double best_score = 0.0;
  const std::size_t in_a = remaining.count();
  for (auto it = candidates.begin(); it != candidates.end(); ++it) {
    const double s = association_score((it->second & remaining).count(), in_a, it->second.count(), universe);
    if (s > best_score * (1.0 + kScoreTolerance)) {
      best_score = s;
      best = it;
    }
  }
  *score_out = best_score;
  return best;
}

namespace conceptualizer_detail {

inline std::vector<ScoredString> greedy_search(const std::map<std::string, VerseSet>& candidates, VerseSet remaining,
                                               std::size_t universe, std::size_t max_picks, double min_score) {
  std::vector<ScoredString> picks;
  while (picks.size() < max_picks && remaining.any()) {
    double score = 0.0;
    auto best = best_candidate(candidates, remaining, universe, &score);
    if (best == candidates.end() || score < min_score) break;
    picks.push_back({best->first, score});
    remaining -= best->second;
  }
  std::stable_sort(picks.begin(), picks.end(), [](const ScoredString& a, const ScoredString& b) {
    return a.score != b.score ? a.score > b.score : a.ngram < b.ngram;
  });
  return picks;
}

inline std::string strip_boundaries(std::string_view s) {
  std::u32string cps = unicode::code_points(s);
  std::erase(cps, kBoundary);
  return unicode::to_utf8(cps);
}

}  // namespace conceptualizer_detail

inline std::vector<ScoredString> forward_pass(const AlignmentIndex& index, const ConceptQuery& query,
                                              const ConceptualizerConfig& config) {
  const VerseSet start = index.source_containing(query.source_strings);
  if (start.none())
    throw Error(ErrorCode::ConceptNotInSource, query.concept_name + " in " + query.source_lang.str() + " (paired with " +
                                                   index.target().str() + ")");
  return conceptualizer_detail::greedy_search(index.target_candidates(), start, index.universe_size(), config.max_targets,
                                              config.min_score);
}

inline std::vector<ScoredString> forward_pass(const VerseAlignedCorpus& corpus, const ConceptQuery& query,
                                              const LanguageId& target, const ConceptualizerConfig& config) {
  return forward_pass(AlignmentIndex(corpus, query.source_lang, target, config), query, config);
}

inline std::vector<ScoredString> backward_pass(const AlignmentIndex& index, const std::vector<ScoredString>& target_strings,
                                               const ConceptualizerConfig& config) {
  std::vector<std::string> strings;
  for (const auto& t : target_strings) strings.push_back(t.ngram);
  const VerseSet start = index.target_containing(strings);
  if (start.none()) return {};
  return conceptualizer_detail::greedy_search(index.source_candidates(), start, index.universe_size(),
                                              config.dims_per_concept - 1, config.min_score);
}

inline std::vector<ScoredString> backward_pass(const VerseAlignedCorpus& corpus, const std::vector<ScoredString>& target_strings,
                                               const LanguageId& target, const LanguageId& source_lang,
                                               const ConceptualizerConfig& config) {
  return backward_pass(AlignmentIndex(corpus, source_lang, target, config), target_strings, config);
}

/// True when a source n-gram is the concept's own realization rather than an
/// associated concept: it and some query string contain one another once
/// boundary markers are removed.
inline bool is_self_realization(std::string_view ngram, const ConceptQuery& query) {
  const std::string bare = conceptualizer_detail::strip_boundaries(ngram);
  if (bare.empty()) return true;
  for (const auto& q : query.source_strings) {
    const std::string bq = conceptualizer_detail::strip_boundaries(q);
    if (bq.find(bare) != std::string::npos || bare.find(bq) != std::string::npos) return true;
  }
  return false;
}

inline std::vector<std::string> fix_dimension_labels(const std::map<LanguageId, const AlignmentIndex*>& references,
                                                     const ConceptQuery& query, const ConceptualizerConfig& config) {
  std::map<std::string, double> totals;
  for (const auto& [lang, index] : references) {
    std::vector<ScoredString> forward;
    try {
      forward = forward_pass(*index, query, config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConceptNotInSource) throw;
      continue;
    }
    if (forward.empty()) continue;
    for (const auto& hit : backward_pass(*index, forward, config))
      if (!is_self_realization(hit.ngram, query)) totals[hit.ngram] += hit.score;
  }
  std::vector<std::pair<std::string, double>> ranked(totals.begin(), totals.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> labels{query.concept_name};
  for (const auto& [gram, _] : ranked) {
    if (labels.size() == config.dims_per_concept) break;
    labels.push_back(gram);
  }
  labels.resize(config.dims_per_concept, kPaddingLabel);
  return labels;
}

/// Shared dimension labels for one concept: the concept itself, then the
/// source n-grams with the highest backward score summed over the reference
/// languages, padded with kPaddingLabel.
inline std::vector<std::string> fix_dimension_labels(const VerseAlignedCorpus& corpus, const ConceptQuery& query,
                                                     const std::set<LanguageId>& reference_langs,
                                                     const ConceptualizerConfig& config) {
  if (reference_langs.empty()) throw Error(ErrorCode::InvalidArgument, "no reference languages");
  std::vector<AlignmentIndex> indices;
  indices.reserve(reference_langs.size());
  for (const auto& lang : reference_langs) indices.emplace_back(corpus, query.source_lang, lang, config);
  std::map<LanguageId, const AlignmentIndex*> refs;
  for (const auto& idx : indices) refs.emplace(idx.target(), &idx);
  return fix_dimension_labels(refs, query, config);
}

inline std::vector<double> build_concept_vector(const AlignmentIndex& index, const ConceptQuery& query,
                                                const std::vector<std::string>& dimension_labels,
                                                const ConceptualizerConfig& config) {
  if (dimension_labels.empty()) throw Error(ErrorCode::InvalidArgument, "no dimension labels");
  std::vector<double> v(dimension_labels.size(), 0.0);
  const auto forward = forward_pass(index, query, config);
  if (forward.empty()) return v;
  v[0] = forward.front().score;
  std::unordered_map<std::string, double> backward;
  for (const auto& hit : backward_pass(index, forward, config)) backward.emplace(hit.ngram, hit.score);
  for (std::size_t d = 1; d < dimension_labels.size(); ++d) {
    if (dimension_labels[d] == kPaddingLabel) continue;
    if (auto it = backward.find(dimension_labels[d]); it != backward.end()) v[d] = it->second;
  }
  const double peak = *std::max_element(v.begin(), v.end());
  if (peak > 0.0)
    for (double& x : v) x /= peak;
  return v;
}

/// Concept block for one target language: dim 1 is the forward score of the
/// concept's realization, the rest are backward scores of the labeled source
/// n-grams; the block is scaled by its maximum.
inline std::vector<double> build_concept_vector(const VerseAlignedCorpus& corpus, const ConceptQuery& query,
                                                const LanguageId& target, const std::vector<std::string>& dimension_labels,
                                                const ConceptualizerConfig& config) {
  return build_concept_vector(AlignmentIndex(corpus, query.source_lang, target, config), query, dimension_labels, config);
}

struct ConceptualizeOutcome {
  ConceptVectorSet vectors;
  /// One message per (concept, language) cell that could not be built.
  std::vector<std::string> failures;
};

/// Labels every concept against `references`, then builds the block for every
/// (concept, target) cell. Cells are independent and run on `jobs` threads;
/// the result is assembled in (language, concept) order.
inline ConceptualizeOutcome conceptualize(const VerseAlignedCorpus& corpus, const std::vector<ConceptQuery>& concepts,
                                          const std::set<LanguageId>& targets, const std::set<LanguageId>& references,
                                          const ConceptualizerConfig& config, unsigned jobs = 1) {
  config.validate();
  std::set<LanguageId> needed = targets;
  needed.insert(references.begin(), references.end());
  std::vector<std::string> names;
  for (const auto& c : concepts) {
    if (std::find(names.begin(), names.end(), c.concept_name) != names.end())
      throw Error(ErrorCode::InvalidArgument, "duplicate concept '" + c.concept_name + "'");
    names.push_back(c.concept_name);
  }

  // Indices per (source, language); concepts may differ in source language.
  std::set<LanguageId> sources;
  for (const auto& c : concepts) sources.insert(c.source_lang);
  std::vector<std::pair<LanguageId, LanguageId>> keys;
  for (const auto& s : sources)
    for (const auto& l : needed) keys.emplace_back(s, l);
  std::vector<std::unique_ptr<AlignmentIndex>> built(keys.size());
  parallel_for(keys.size(), jobs, [&](std::size_t i) {
    built[i] = std::make_unique<AlignmentIndex>(corpus, keys[i].first, keys[i].second, config);
  });
  std::map<std::pair<LanguageId, LanguageId>, const AlignmentIndex*> index;
  for (std::size_t i = 0; i < keys.size(); ++i) index.emplace(keys[i], built[i].get());

  std::map<std::string, std::vector<std::string>> labels;
  std::vector<std::vector<std::string>> label_rows(concepts.size());
  parallel_for(concepts.size(), jobs, [&](std::size_t c) {
    std::map<LanguageId, const AlignmentIndex*> refs;
    for (const auto& r : references) refs.emplace(r, index.at({concepts[c].source_lang, r}));
    label_rows[c] = fix_dimension_labels(refs, concepts[c], config);
  });
  for (std::size_t c = 0; c < concepts.size(); ++c) labels.emplace(names[c], std::move(label_rows[c]));

  const std::vector<LanguageId> target_list(targets.begin(), targets.end());
  const std::size_t cells = target_list.size() * concepts.size();
  std::vector<std::vector<double>> blocks(cells);
  std::vector<std::string> errors(cells);
  parallel_for(cells, jobs, [&](std::size_t cell) {
    const auto& lang = target_list[cell / concepts.size()];
    const auto& query = concepts[cell % concepts.size()];
    try {
      blocks[cell] = build_concept_vector(*index.at({query.source_lang, lang}), query, labels.at(query.concept_name), config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConceptNotInSource) throw;
      errors[cell] = lang.str() + "/" + query.concept_name + ": " + e.what();
    }
  });

  ConceptualizeOutcome out{ConceptVectorSet(names, config.dims_per_concept, labels), {}};
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (!errors[cell].empty()) {
      out.failures.push_back(errors[cell]);
      continue;
    }
    out.vectors.set_vector(target_list[cell / concepts.size()], concepts[cell % concepts.size()].concept_name,
                           std::move(blocks[cell]));
  }
  return out;
}

}  // namespace lingdist
