#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lingdist/ingest.hpp"
#include "support/expect.hpp"

using namespace lingdist;

namespace {

const std::string kData = LINGDIST_TEST_DATA;

template <typename Parse>
auto parse(const std::string& text, Parse p) {
  std::istringstream in(text);
  return p(in);
}

std::size_t error_line(const std::string& text, auto p) {
  try {
    parse(text, p);
  } catch (const Error& e) {
    return e.line();
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Word lists

TEST(Wordlist, TwoRowFixture) {
  auto t = load_wordlist(kData + "/wordlist.tsv");
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.concepts().size(), 1u);
  EXPECT_EQ(*t.form(LanguageId("eng"), "hand"), "h8nd");

  std::ostringstream out;
  write_wordlist(t, out);
  EXPECT_EQ(parse(out.str(), parse_wordlist), t);
}

TEST(Wordlist, EmptyAndHeaderOnly) {
  EXPECT_EQ(parse("lang\tconcept\tform\n", parse_wordlist).size(), 0u);
  EXPECT_EQ(parse("", parse_wordlist).size(), 0u);
}

TEST(Wordlist, Errors) {
  EXPECT_CODE(parse("lang\tconcept\tform\ndeu\thand\n", parse_wordlist), ErrorCode::MalformedRow);
  EXPECT_EQ(error_line("lang\tconcept\tform\ndeu\thand\n", parse_wordlist), 2u);
  EXPECT_CODE(parse("lang\tform\n", parse_wordlist), ErrorCode::MalformedHeader);
  EXPECT_CODE(load_wordlist(kData + "/wordlist_duplicate.tsv"), ErrorCode::DuplicateEntry);
  EXPECT_EQ(error_line("lang\tconcept\tform\ndeu\thand\thant\ndeu\thand\tx\n", parse_wordlist), 3u);
  EXPECT_CODE(parse("lang\tconcept\tform\ndeu\thand\t  \n", parse_wordlist), ErrorCode::EmptyForm);
  EXPECT_CODE(parse("lang\tconcept\tform\ndeu\thand\t\xFF\n", parse_wordlist), ErrorCode::InvalidUtf8);
}

TEST(Wordlist, CrlfAndBlankLines) {
  auto t = parse("lang\tconcept\tform\r\n\r\ndeu\thand\thant\r\n\neng\tfoot\tfut\r\n", parse_wordlist);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(*t.form(LanguageId("deu"), "hand"), "hant");
  EXPECT_EQ((t.concepts()), (std::vector<std::string>{"hand", "foot"}));
}

TEST(Wordlist, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    WordListTable t;
    const char* alphabet[] = {"a", "b", "\xC3\xA9", "8", "\xD0\xB6", "7", "E"};
    for (int l = 0; l < 5; ++l)
      for (int c = 0; c < 6; ++c) {
        if (rng() % 3 == 0) continue;
        std::string form;
        for (std::size_t k = 0; k < 1 + rng() % 6; ++k) form += alphabet[rng() % 7];
        t.add(LanguageId("l" + std::to_string(l)), "c" + std::to_string((c * 7 + trial) % 6), form);
      }
    std::ostringstream out;
    write_wordlist(t, out);
    EXPECT_EQ(parse(out.str(), parse_wordlist), t);
  }
}

// ---------------------------------------------------------------------------
// Feature tables

TEST(FeatureTableFormat, CellGrammar) {
  auto t = load_feature_table(kData + "/features.csv");
  EXPECT_EQ(t.cell(LanguageId("hun"), 2).state(), CellValue::State::Unknown);
  EXPECT_EQ(t.cell(LanguageId("ekk"), 1).state(), CellValue::State::Missing);
  EXPECT_EQ(t.cell(LanguageId("fin"), 0), CellValue::coded(2));
  EXPECT_EQ(t.arity(0), 3u);
  EXPECT_EQ(t.symbols(0), (std::set<uint8_t>{0, 1, 2}));

  std::ostringstream out;
  write_feature_table(t, out);
  EXPECT_EQ(parse(out.str(), parse_feature_table), t);
}

TEST(FeatureTableFormat, Errors) {
  try {
    load_feature_table(kData + "/features_badcell.csv");
    ADD_FAILURE() << "bad cell accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadCell);
    EXPECT_EQ(e.line(), 3u);
    const std::string what = e.what();
    EXPECT_NE(what.find("ekk"), std::string::npos);
    EXPECT_NE(what.find("F2"), std::string::npos);
  }
  EXPECT_CODE(parse("lang,F1\na,0\na,1\n", parse_feature_table), ErrorCode::DuplicateLanguageRow);
  EXPECT_CODE(parse("lang,F1\na,10\n", parse_feature_table), ErrorCode::BadCell);
  EXPECT_CODE(parse("lang,F1\na,-1\n", parse_feature_table), ErrorCode::BadCell);
  EXPECT_CODE(parse("lang,F1\na,0,1\n", parse_feature_table), ErrorCode::MalformedRow);
  EXPECT_CODE(parse("language,F1\n", parse_feature_table), ErrorCode::MalformedHeader);
  EXPECT_CODE(parse("lang,F1,F1\n", parse_feature_table), ErrorCode::MalformedHeader);
}

TEST(FeatureTableFormat, RandomRoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    FeatureTable t({"A", "B", "C", "D"});
    for (int l = 0; l < 8; ++l) {
      std::vector<CellValue> row;
      for (int f = 0; f < 4; ++f) {
        const auto r = rng() % 12;
        row.push_back(r < 10 ? CellValue::coded(static_cast<uint8_t>(r)) : r == 10 ? CellValue::unknown() : CellValue::missing());
      }
      t.add_row(LanguageId("x" + std::to_string(l)), row);
    }
    std::ostringstream out;
    write_feature_table(t, out);
    EXPECT_EQ(parse(out.str(), parse_feature_table), t);
  }
}

// ---------------------------------------------------------------------------
// Lineages

TEST(Lineages, Examples) {
  auto l = load_lineages(kData + "/lineages.tsv");
  EXPECT_EQ(l.at(LanguageId("hun")).lineage.nodes(), (std::vector<std::string>{"Uralic", "Hungarian"}));
  EXPECT_EQ(l.at(LanguageId("ekk")).lineage.size(), 6u);
  EXPECT_EQ(l.at(LanguageId("ekk")).lineage.nodes()[2], "Coastal Finnic");

  std::ostringstream out;
  write_lineages(l, out);
  EXPECT_EQ(parse(out.str(), parse_lineages), l);
}

TEST(Lineages, Errors) {
  EXPECT_CODE(parse("xxx\t\n", parse_lineages), ErrorCode::EmptyPath);
  EXPECT_CODE(parse("xxx\tA>>B\n", parse_lineages), ErrorCode::EmptyPath);
  EXPECT_CODE(parse("a\tX>Y\na\tX>Z\n", parse_lineages), ErrorCode::DuplicateLanguage);
  EXPECT_EQ(error_line("a\tX>Y\na\tX>Z\n", parse_lineages), 2u);
  EXPECT_CODE(parse("a\tX>Y\tZ\n", parse_lineages), ErrorCode::MalformedRow);
  EXPECT_CODE(parse("a\tX>Y>X\n", parse_lineages), ErrorCode::MalformedRow);
}

// ---------------------------------------------------------------------------
// Concept vectors

TEST(ConceptVectors, SparseDefaults) {
  auto set = load_concept_vectors(kData + "/vectors.tsv");
  EXPECT_EQ(set.dims_per_concept(), 3u);
  EXPECT_EQ(*set.vector(LanguageId("hun"), "water"), (std::vector<double>{1.0, 0.0, 0.25}));
  EXPECT_EQ(*set.vector(LanguageId("ekk"), "water"), (std::vector<double>{0.5, 1.0, 0.0}));
  EXPECT_EQ(set.labels("water")[1], "river");

  std::string text;
  for (int d = 1; d <= 100; ++d) text += "#label\tc\t" + std::to_string(d) + "\tl" + std::to_string(d) + "\n";
  auto e1 = parse(text + "hun\tc\t1\t1.0\n", parse_concept_vectors);
  EXPECT_EQ(e1.dims_per_concept(), 100u);
  const auto& v = *e1.vector(LanguageId("hun"), "c");
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(std::count(v.begin(), v.end(), 0.0), 99);
}

TEST(ConceptVectors, HundredDimsFiveNonzero) {
  std::ostringstream text;
  for (int d = 1; d <= 100; ++d) text << "#label\tc\t" << d << "\tlabel" << d << '\n';
  for (int d : {1, 7, 20, 55, 100}) text << "x\tc\t" << d << "\t0." << d % 10 + 1 << '\n';
  auto set = parse(text.str(), parse_concept_vectors);
  const auto& v = *set.vector(LanguageId("x"), "c");
  EXPECT_EQ(v.size(), 100u);
  EXPECT_EQ(std::count(v.begin(), v.end(), 0.0), 95);
}

TEST(ConceptVectors, Errors) {
  const std::string labels = "#label\tc\t1\tc\n#label\tc\t2\td\n";
  EXPECT_CODE(parse(labels + "x\tc\t1\t1.2\n", parse_concept_vectors), ErrorCode::ValueOutOfRange);
  EXPECT_CODE(parse(labels + "x\tc\t3\t0.5\n", parse_concept_vectors), ErrorCode::DimOutOfRange);
  EXPECT_CODE(parse(labels + "x\tc\t0\t0.5\n", parse_concept_vectors), ErrorCode::DimOutOfRange);
  EXPECT_CODE(parse(labels + "x\tother\t1\t0.5\n", parse_concept_vectors), ErrorCode::MissingLabelBlock);
  EXPECT_CODE(parse("#label\tc\t1\tc\n#label\tc\t3\te\nx\tc\t1\t1\n", parse_concept_vectors), ErrorCode::MissingLabelBlock);
  EXPECT_CODE(parse(labels + "#label\tc\t2\tzz\n", parse_concept_vectors), ErrorCode::LabelConflict);
  EXPECT_CODE(parse(labels + "x\tc\t1\t0.5\nx\tc\t1\t0.5\n", parse_concept_vectors), ErrorCode::DuplicateEntry);
  EXPECT_CODE(parse(labels + "x\tc\t1\t0.5\n#label\tc\t3\te\n", parse_concept_vectors), ErrorCode::MalformedRow);
  EXPECT_CODE(parse(labels + "x\tc\t1\tabc\n", parse_concept_vectors), ErrorCode::MalformedRow);
}

TEST(ConceptVectors, RoundTripIncludingZeroBlocks) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::string, std::vector<std::string>> labels{{"a", {"a", "x", "<pad>"}}, {"b", {"b", "y", "z"}}};
  ConceptVectorSet set({"b", "a"}, 3, labels);
  set.set_vector(LanguageId("l1"), "a", {u(rng), 0.0, u(rng)});
  set.set_vector(LanguageId("l1"), "b", {0.0, 0.0, 0.0});
  set.set_vector(LanguageId("l2"), "b", {1.0, u(rng) / 3, 0.0});
  std::ostringstream out;
  write_concept_vectors(set, out);
  auto back = parse(out.str(), parse_concept_vectors);
  EXPECT_EQ(back, set);
  EXPECT_EQ(back.concepts(), (std::vector<std::string>{"b", "a"}));
  ASSERT_NE(back.vector(LanguageId("l1"), "b"), nullptr);
}

// ---------------------------------------------------------------------------
// Parallel corpus

TEST(Corpus, Fixture) {
  auto c = load_parallel_corpus(kData + "/corpus.tsv");
  EXPECT_EQ(c.languages(), (std::set<LanguageId>{LanguageId("a"), LanguageId("b")}));
  EXPECT_EQ(c.verses().size(), 2u);
  EXPECT_EQ(c.text("v002", LanguageId("b")), nullptr);  // partial alignment is fine

  std::ostringstream out;
  write_parallel_corpus(c, out);
  EXPECT_EQ(parse(out.str(), parse_parallel_corpus), c);
}

TEST(Corpus, NormalizesAndRejectsDuplicates) {
  auto c = parse("v1\tfr\tcafe\xCC\x81\n", parse_parallel_corpus);
  EXPECT_EQ(*c.text("v1", LanguageId("fr")), "caf\xC3\xA9");
  EXPECT_CODE(parse("v1\ta\tx\nv1\ta\ty\n", parse_parallel_corpus), ErrorCode::DuplicateVerseText);
  EXPECT_CODE(parse("v1\ta\n", parse_parallel_corpus), ErrorCode::MalformedRow);
}

// ---------------------------------------------------------------------------
// Distance matrices

TEST(Matrix, TwoByTwoRoundTripsExactly) {
  DistanceMatrix m({LanguageId("a"), LanguageId("b")}, "ldn_mean", MatrixKind::Distance);
  m.set(0, 1, 0.5);
  std::ostringstream out;
  write_distance_matrix(m, out);
  EXPECT_EQ(out.str(), "ldn_mean:distance,a,b\na,0,0.5\nb,0.5,0\n");
  EXPECT_EQ(parse(out.str(), read_distance_matrix), m);
}

TEST(Matrix, SimilarityFixtureRoundTrips) {
  auto m = load_distance_matrix(kData + "/similarity3.csv");
  EXPECT_EQ(m.kind(), MatrixKind::Similarity);
  EXPECT_EQ(m.metric_tag(), "path_jaccard");
  EXPECT_EQ(m(0, 0), 1.0);
  EXPECT_EQ(m(2, 0), 0.25);
  std::ostringstream out;
  write_distance_matrix(m, out);
  EXPECT_EQ(parse(out.str(), read_distance_matrix), m);
}

TEST(Matrix, RandomRoundTripNineDigits) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<LanguageId> ids;
    for (int i = 0; i < 7; ++i) ids.emplace_back("q" + std::to_string(i));
    DistanceMatrix m(ids, "t", MatrixKind::Distance);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = i + 1; j < 7; ++j) m.set(i, j, u(rng));
    m.set(0, 6, std::numeric_limits<double>::infinity());
    std::ostringstream out;
    write_distance_matrix(m, out);
    auto back = parse(out.str(), read_distance_matrix);
    for (std::size_t i = 0; i < 7; ++i)
      for (std::size_t j = 0; j < 7; ++j) {
        if (std::isinf(m(i, j))) {
          EXPECT_TRUE(std::isinf(back(i, j)));
          continue;
        }
        EXPECT_NEAR(back(i, j), m(i, j), 5e-9 * std::max(1.0, m(i, j)));
      }
    std::ostringstream again;
    write_distance_matrix(back, again);
    EXPECT_EQ(again.str(), out.str());
  }
}

TEST(Matrix, Errors) {
  EXPECT_CODE(load_distance_matrix(kData + "/asymmetric.csv"), ErrorCode::AsymmetryDetected);
  EXPECT_CODE(parse("t:distance,a,b\na,0.1,0.5\nb,0.5,0\n", read_distance_matrix), ErrorCode::NonzeroDiagonal);
  EXPECT_NO_THROW(parse("t:distance,a,b\na,0,0.5\nb,0.5000000001,0\n", read_distance_matrix));
  EXPECT_CODE(parse("t:metric,a\na,0\n", read_distance_matrix), ErrorCode::MalformedHeader);
  EXPECT_CODE(parse("t,a\na,0\n", read_distance_matrix), ErrorCode::MalformedHeader);
  EXPECT_CODE(parse("t:distance,a,a\na,0,0\na,0,0\n", read_distance_matrix), ErrorCode::DuplicateLanguage);
  EXPECT_CODE(parse("t:distance,a,b\nb,0,1\na,1,0\n", read_distance_matrix), ErrorCode::MalformedRow);
  EXPECT_CODE(parse("t:distance,a,b\na,0,1\n", read_distance_matrix), ErrorCode::MalformedRow);
  EXPECT_CODE(parse("t:distance,a,b\na,0,-1\nb,-1,0\n", read_distance_matrix), ErrorCode::ValueOutOfRange);
  EXPECT_CODE(load_distance_matrix(kData + "/does-not-exist.csv"), ErrorCode::Io);
}

}  // namespace
