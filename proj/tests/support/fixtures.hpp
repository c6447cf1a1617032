#pragma once

// Synthetic inputs shared by the unit tests and the acceptance runner.

#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "lingdist/lingdist.hpp"

namespace fixture {

using lingdist::LanguageId;

inline std::u32string random_u32(std::mt19937_64& rng, std::size_t max_len, std::size_t alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<std::size_t> sym(0, alphabet - 1);
  std::u32string s(len(rng), U'a');
  for (auto& c : s) c = static_cast<char32_t>(U'a' + sym(rng));
  return s;
}

inline std::string id(const std::string& prefix, std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return prefix + buf;
}

inline const std::vector<std::string>& six_families() {
  static const std::vector<std::string> names{"Atlantic-Congo", "Austronesian", "Indo-European",
                                              "Nuclear Trans New Guinea", "Otomanguean", "Sino-Tibetan"};
  return names;
}

/// Languages f<family>l<member>, lineage Family>Branch>Leaf.
struct Population {
  std::vector<LanguageId> languages;
  lingdist::LineageMap lineages;
  std::vector<std::size_t> family_of;
};

inline Population population(std::size_t families, std::size_t per_family) {
  Population p;
  for (std::size_t f = 0; f < families; ++f)
    for (std::size_t i = 0; i < per_family; ++i) {
      LanguageId lang(id("f" + std::to_string(f) + "l", i));
      const std::string family = f < six_families().size() ? six_families()[f] : "Family" + std::to_string(f);
      p.languages.push_back(lang);
      p.family_of.push_back(f);
      p.lineages.emplace(lang, lingdist::LanguageProfile{lang, lingdist::LineagePath({family, family + " branch " + std::to_string(i % 3), lang.str()})});
    }
  return p;
}

/// Within-family distances in [0.1, 0.4], cross-family in [0.6, 1.0].
inline lingdist::DistanceMatrix clustered_matrix(const Population& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> near(0.1, 0.4), far(0.6, 1.0);
  lingdist::DistanceMatrix m(p.languages, "clustered", lingdist::MatrixKind::Distance);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) m.set(i, j, p.family_of[i] == p.family_of[j] ? near(rng) : far(rng));
  return m;
}

inline lingdist::DistanceMatrix random_matrix(const Population& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  lingdist::DistanceMatrix m(p.languages, "random", lingdist::MatrixKind::Distance);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) m.set(i, j, u(rng));
  return m;
}

/// Random table over features F00.. with each cell coded, unknown or missing.
inline lingdist::FeatureTable random_features(std::mt19937_64& rng, std::size_t n_langs, std::size_t n_features) {
  std::vector<std::string> names;
  for (std::size_t f = 0; f < n_features; ++f) names.push_back(id("F", f));
  lingdist::FeatureTable t(names);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> coded_rate(n_features);
  for (auto& r : coded_rate) r = u(rng);
  for (std::size_t l = 0; l < n_langs; ++l) {
    std::vector<lingdist::CellValue> row;
    for (std::size_t f = 0; f < n_features; ++f) {
      const double x = u(rng);
      if (x < coded_rate[f]) row.push_back(lingdist::CellValue::coded(static_cast<std::uint8_t>(rng() % 3)));
      else if (x < coded_rate[f] + (1 - coded_rate[f]) / 2) row.push_back(lingdist::CellValue::unknown());
      else row.push_back(lingdist::CellValue::missing());
    }
    t.add_row(LanguageId(id("L", l)), row);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Aligned corpora. Source "eng", target "tgt". Target filler carries "aq" and
// "ax" so that "x", "q" and "q·" are never exclusive to the planted verses,
// leaving "xq" as the smallest exclusive n-gram.

struct Verse {
  std::string eng, tgt;
};

inline lingdist::VerseAlignedCorpus corpus_of(const std::vector<Verse>& verses) {
  lingdist::VerseAlignedCorpus c;
  for (std::size_t i = 0; i < verses.size(); ++i) {
    c.add(id("v", i), LanguageId("eng"), verses[i].eng);
    c.add(id("v", i), LanguageId("tgt"), verses[i].tgt);
  }
  return c;
}

/// 20 verses; "xq" occurs exactly where "mouth" does (verses 0..4).
inline std::vector<Verse> perfect_verses() {
  std::vector<Verse> v;
  for (int i = 0; i < 5; ++i) v.push_back({"the mouth speaks", "ba xq lo"});
  for (int i = 0; i < 15; ++i) v.push_back({i % 2 ? "the hand speaks" : "the tree speaks", i % 2 ? "ba aq lo" : "ba ax lo"});
  return v;
}

/// 40 verses: 10 "mouth" and 4 "entrance" verses share "xq"; 6 further
/// "entrance" verses use another word; 20 fillers.
inline std::vector<Verse> mouth_entrance_verses() {
  std::vector<Verse> v;
  for (int i = 0; i < 10; ++i) v.push_back({"the mouth opens", "ba xq lo"});
  for (int i = 0; i < 4; ++i) v.push_back({"the entrance opens", "ba xq lo"});
  for (int i = 0; i < 6; ++i) v.push_back({"the entrance opens", "ba ku lo"});
  for (int i = 0; i < 20; ++i) v.push_back({i % 2 ? "the hand opens" : "the tree opens", i % 2 ? "ba aq lo" : "ba ax lo"});
  return v;
}

/// Chinese-style target: 口 is written in every "mouth" verse and also in
/// the compound 门口 of 4 of the 10 "entrance" verses.
inline std::vector<Verse> kou_verses() {
  std::vector<Verse> v;
  for (int i = 0; i < 10; ++i) v.push_back({"the mouth opens", i % 2 ? "他 张口" : "他 口中 说"});
  for (int i = 0; i < 4; ++i) v.push_back({"the entrance opens", "他 到 门口"});
  for (int i = 0; i < 6; ++i) v.push_back({"the entrance opens", "他 到 大门"});
  for (int i = 0; i < 20; ++i) v.push_back({i % 2 ? "the hand opens" : "the tree opens", i % 2 ? "他 举手" : "他 看 树"});
  return v;
}

/// Random corpus of at most 50 verses over a small vocabulary with a few
/// planted correlates.
inline std::vector<Verse> random_verses(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> src{"mouth", "hand", "tree", "water", "fire", "stone", "road"};
  static const std::vector<std::string> tgt{"xq", "bo", "kal", "mi", "sut", "aq", "ax", "ren"};
  std::vector<Verse> out;
  for (std::size_t i = 0; i < n; ++i) {
    Verse v;
    const std::size_t words = 1 + rng() % 3;
    for (std::size_t w = 0; w < words; ++w) {
      const std::size_t k = rng() % src.size();
      v.eng += (w ? " " : "") + src[k];
      v.tgt += (w ? " " : "") + (rng() % 4 ? tgt[k] : tgt[rng() % tgt.size()]);
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace fixture
