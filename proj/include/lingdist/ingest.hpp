#pragma once

// Line-oriented readers and writers for the toolkit's file grammars:
//
//   word list       TSV  lang<TAB>concept<TAB>form            (header required)
//   feature table   CSV  lang,F1,...,Fn                       (header required)
//                        cell: "" missing, "?" unknown, 0-9 coded
//   lineages        TSV  lang<TAB>Node1>Node2>...>Leaf
//   concept vectors TSV  #label<TAB>concept<TAB>dim<TAB>text  (preamble)
//                        lang<TAB>concept<TAB>dim<TAB>value   (sparse, 1-based)
//   parallel corpus TSV  verse_id<TAB>lang<TAB>text
//   distance matrix CSV  tag:kind,L1,...,Ln / Li,v_i1,...,v_in
//
// Input lines may end in "\n" or "\r\n"; blank lines are skipped. Output always
// uses "\n". All text is NFC-normalized on the way in.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include "lingdist/core.hpp"
#include "lingdist/error.hpp"
#include "lingdist/unicode.hpp"

namespace lingdist {

/// Verse-aligned multi-language corpus (Bible-style). Coverage may be partial:
/// a verse need not exist in every language.
class VerseAlignedCorpus {
 public:
  void add(const std::string& verse_id, const LanguageId& lang, std::string_view text) {
    if (verse_id.empty()) throw Error(ErrorCode::InvalidArgument, "empty verse id");
    auto& by_lang = verses_[verse_id];
    if (!by_lang.try_emplace(lang, unicode::to_nfc(text)).second)
      throw Error(ErrorCode::DuplicateVerseText, verse_id + "/" + lang.str());
    languages_.insert(lang);
  }

  /// verse id -> language -> text, ordered by verse id.
  const std::map<std::string, std::map<LanguageId, std::string>>& verses() const noexcept { return verses_; }
  const std::set<LanguageId>& languages() const noexcept { return languages_; }

  const std::string* text(const std::string& verse_id, const LanguageId& lang) const {
    auto v = verses_.find(verse_id);
    if (v == verses_.end()) return nullptr;
    auto t = v->second.find(lang);
    return t == v->second.end() ? nullptr : &t->second;
  }

  friend bool operator==(const VerseAlignedCorpus&, const VerseAlignedCorpus&) = default;

 private:
  std::map<std::string, std::map<LanguageId, std::string>> verses_;
  std::set<LanguageId> languages_;
};

namespace ingest_detail {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-blank line with any trailing '\r' removed.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  /// Next line including blank ones; used for headers.
  bool next_raw(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++number_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::size_t line_number() const noexcept { return number_; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline LanguageId language(std::string_view field, std::size_t line) {
  try {
    return LanguageId(unicode::to_nfc(field));
  } catch (const Error&) {
    throw Error(ErrorCode::MalformedRow, "bad language id '" + std::string(field) + "'", line);
  }
}

inline std::string text(std::string_view field, std::size_t line) {
  try {
    return unicode::to_nfc(field);
  } catch (const Error&) {
    throw Error(ErrorCode::InvalidUtf8, "ill-formed UTF-8", line);
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline std::string format_shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline std::string format_significant(double v, int digits) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline void require_no(std::string_view s, std::string_view forbidden, std::string_view what) {
  if (s.find_first_of(forbidden) != std::string_view::npos)
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " '" + std::string(s) + "' contains a reserved character");
}

}  // namespace ingest_detail

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Word lists

inline WordListTable parse_wordlist(std::istream& in) {
  using namespace ingest_detail;
  LineReader reader(in);
  std::string line;
  WordListTable table;
  if (!reader.next_raw(line)) return table;
  if (line != "lang\tconcept\tform")
    throw Error(ErrorCode::MalformedHeader, "expected 'lang<TAB>concept<TAB>form'", reader.line_number());
  while (reader.next(line)) {
    const std::size_t n = reader.line_number();
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw Error(ErrorCode::MalformedRow, std::to_string(fields.size()) + " fields, expected 3", n);
    LanguageId lang = language(fields[0], n);
    std::string concept_key = text(fields[1], n);
    try {
      table.add(lang, concept_key, text(fields[2], n));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidArgument) throw Error(ErrorCode::MalformedRow, "empty concept name", n);
      throw Error(e.code(), lang.str() + "/" + concept_key, n);
    }
  }
  return table;
}

inline void write_wordlist(const WordListTable& table, std::ostream& out) {
  using namespace ingest_detail;
  out << "lang\tconcept\tform\n";
  const auto langs = table.languages();
  for (std::size_t c = 0; c < table.concepts().size(); ++c) {
    require_no(table.concepts()[c], "\t\n\r", "concept");
    for (const auto& lang : langs)
      if (const auto* form = table.form(lang, c)) {
        require_no(*form, "\t\n\r", "form");
        out << lang.str() << '\t' << table.concepts()[c] << '\t' << *form << '\n';
      }
  }
}

// ---------------------------------------------------------------------------
// Feature tables

inline CellValue parse_cell(std::string_view raw) {
  if (raw.empty()) return CellValue::missing();
  if (raw == "?") return CellValue::unknown();
  if (raw.size() == 1 && raw[0] >= '0' && raw[0] <= '9') return CellValue::coded(static_cast<uint8_t>(raw[0] - '0'));
  throw Error(ErrorCode::BadCell, std::string(raw));
}

inline FeatureTable parse_feature_table(std::istream& in) {
  using namespace ingest_detail;
  LineReader reader(in);
  std::string line;
  if (!reader.next_raw(line) || line.empty()) throw Error(ErrorCode::MalformedHeader, "missing header", 1);
  auto header = split(line, ',');
  if (header[0] != "lang") throw Error(ErrorCode::MalformedHeader, "first header cell must be 'lang'", 1);
  std::vector<std::string> features;
  for (std::size_t i = 1; i < header.size(); ++i) features.push_back(text(header[i], 1));
  FeatureTable table = [&] {
    try {
      return FeatureTable(features);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), 1);
    }
  }();

  while (reader.next(line)) {
    const std::size_t n = reader.line_number();
    auto fields = split(line, ',');
    if (fields.size() != header.size())
      throw Error(ErrorCode::MalformedRow,
                  std::to_string(fields.size()) + " cells, expected " + std::to_string(header.size()), n);
    LanguageId lang = language(fields[0], n);
    if (table.row(lang)) throw Error(ErrorCode::DuplicateLanguageRow, lang.str(), n);
    std::vector<CellValue> cells;
    cells.reserve(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
      try {
        cells.push_back(parse_cell(fields[f + 1]));
      } catch (const Error&) {
        throw Error(ErrorCode::BadCell,
                    "language " + lang.str() + ", feature " + features[f] + ", raw '" + std::string(fields[f + 1]) + "'", n);
      }
    }
    table.add_row(lang, std::move(cells));
  }
  return table;
}

inline void write_feature_table(const FeatureTable& table, std::ostream& out) {
  using namespace ingest_detail;
  out << "lang";
  for (const auto& f : table.features()) {
    require_no(f, ",\n\r", "feature");
    out << ',' << f;
  }
  out << '\n';
  for (const auto& lang : table.languages()) {
    out << lang.str();
    for (const auto& cell : *table.row(lang)) {
      out << ',';
      switch (cell.state()) {
        case CellValue::State::Coded:
          if (cell.symbol() > 9) throw Error(ErrorCode::InvalidArgument, "coded symbol above 9 is not representable");
          out << static_cast<char>('0' + cell.symbol());
          break;
        case CellValue::State::Unknown: out << '?'; break;
        case CellValue::State::Missing: break;
      }
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Lineages

inline LineageMap parse_lineages(std::istream& in) {
  using namespace ingest_detail;
  LineReader reader(in);
  std::string line;
  LineageMap out;
  while (reader.next(line)) {
    const std::size_t n = reader.line_number();
    auto fields = split(line, '\t');
    if (fields.size() != 2) throw Error(ErrorCode::MalformedRow, std::to_string(fields.size()) + " fields, expected 2", n);
    LanguageId lang = language(fields[0], n);
    std::vector<std::string> nodes;
    if (!unicode::strip(fields[1]).empty()) {
      for (auto node : split(fields[1], '>')) {
        std::string name = unicode::strip(text(node, n));
        if (name.empty()) throw Error(ErrorCode::EmptyPath, lang.str() + ": empty node", n);
        nodes.push_back(std::move(name));
      }
    }
    if (nodes.empty()) throw Error(ErrorCode::EmptyPath, lang.str(), n);
    if (out.contains(lang)) throw Error(ErrorCode::DuplicateLanguage, lang.str(), n);
    try {
      out.emplace(lang, LanguageProfile{lang, LineagePath(std::move(nodes))});
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRow, e.what(), n);
    }
  }
  return out;
}

inline void write_lineages(const LineageMap& lineages, std::ostream& out) {
  using namespace ingest_detail;
  for (const auto& [lang, profile] : lineages) {
    out << lang.str() << '\t';
    const auto& nodes = profile.lineage.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      require_no(nodes[i], ">\t\n\r", "lineage node");
      if (i) out << '>';
      out << nodes[i];
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Concept vectors

inline ConceptVectorSet parse_concept_vectors(std::istream& in) {
  using namespace ingest_detail;
  LineReader reader(in);
  std::string line;

  std::vector<std::string> concepts;
  std::map<std::string, std::map<std::size_t, std::string>> label_rows;
  std::map<std::string, std::vector<std::string>> labels;
  std::size_t dims = 0;
  bool preamble = true;

  auto close_preamble = [&](std::size_t n) {
    preamble = false;
    for (const auto& concept_key : concepts) {
      const auto& rows = label_rows[concept_key];
      const std::size_t d = rows.rbegin()->first;
      if (rows.size() != d)
        throw Error(ErrorCode::MissingLabelBlock, concept_key + ": labels must cover dims 1.." + std::to_string(d), n);
      if (dims == 0) dims = d;
      if (d != dims)
        throw Error(ErrorCode::MissingLabelBlock,
                    concept_key + ": " + std::to_string(d) + " labels, other concepts have " + std::to_string(dims), n);
      auto& block = labels[concept_key];
      for (const auto& [_, label] : rows) block.push_back(label);
    }
    if (dims == 0) dims = ConceptVectorSet::kDefaultDims;
  };

  std::map<std::pair<LanguageId, std::string>, std::vector<double>> values;
  std::set<std::tuple<LanguageId, std::string, std::size_t>> seen;

  while (reader.next(line)) {
    const std::size_t n = reader.line_number();
    auto fields = split(line, '\t');
    if (fields.size() != 4) throw Error(ErrorCode::MalformedRow, std::to_string(fields.size()) + " fields, expected 4", n);
    std::size_t dim = 0;
    if (!parse_number(fields[2], dim)) throw Error(ErrorCode::MalformedRow, "bad dimension index '" + std::string(fields[2]) + "'", n);

    if (fields[0] == "#label") {
      if (!preamble) throw Error(ErrorCode::MalformedRow, "label line after data rows", n);
      if (dim == 0) throw Error(ErrorCode::DimOutOfRange, "dimension indices are 1-based", n);
      std::string concept_key = text(fields[1], n);
      std::string label = text(fields[3], n);
      if (concept_key.empty() || label.empty()) throw Error(ErrorCode::MalformedRow, "empty concept or label", n);
      auto& rows = label_rows[concept_key];
      if (rows.empty()) concepts.push_back(concept_key);
      auto [it, fresh] = rows.try_emplace(dim, label);
      if (!fresh && it->second != label)
        throw Error(ErrorCode::LabelConflict, concept_key + " dim " + std::to_string(dim) + ": '" + it->second + "' vs '" + label + "'", n);
      continue;
    }
    if (!fields[0].empty() && fields[0][0] == '#') throw Error(ErrorCode::MalformedRow, "unknown directive", n);
    if (preamble) close_preamble(n);

    LanguageId lang = language(fields[0], n);
    std::string concept_key = text(fields[1], n);
    if (!labels.contains(concept_key)) throw Error(ErrorCode::MissingLabelBlock, concept_key, n);
    if (dim == 0 || dim > dims)
      throw Error(ErrorCode::DimOutOfRange, std::to_string(dim) + " not in 1.." + std::to_string(dims), n);
    double value = 0.0;
    if (!parse_number(fields[3], value)) throw Error(ErrorCode::MalformedRow, "bad value '" + std::string(fields[3]) + "'", n);
    if (!(value >= 0.0 && value <= 1.0)) throw Error(ErrorCode::ValueOutOfRange, std::string(fields[3]), n);
    if (!seen.emplace(lang, concept_key, dim).second)
      throw Error(ErrorCode::DuplicateEntry, lang.str() + "/" + concept_key + " dim " + std::to_string(dim), n);
    auto& v = values[{lang, concept_key}];
    if (v.empty()) v.assign(dims, 0.0);
    v[dim - 1] = value;
  }
  if (preamble) close_preamble(reader.line_number());

  ConceptVectorSet set(concepts, dims, labels);
  for (auto& [key, v] : values) set.set_vector(key.first, key.second, std::move(v));
  return set;
}

/// Values are written in shortest round-trip form; a block that is entirely
/// zero is written as an explicit zero at dim 1 so its presence survives.
inline void write_concept_vectors(const ConceptVectorSet& set, std::ostream& out) {
  using namespace ingest_detail;
  for (const auto& concept_key : set.concepts()) {
    require_no(concept_key, "\t\n\r", "concept");
    const auto& labels = set.labels(concept_key);
    for (std::size_t d = 0; d < labels.size(); ++d) {
      require_no(labels[d], "\t\n\r", "label");
      out << "#label\t" << concept_key << '\t' << d + 1 << '\t' << labels[d] << '\n';
    }
  }
  for (const auto& lang : set.languages()) {
    for (std::size_t c = 0; c < set.concepts().size(); ++c) {
      const auto* v = set.vector(lang, c);
      if (!v) continue;
      bool any = false;
      for (std::size_t d = 0; d < v->size(); ++d) {
        if ((*v)[d] == 0.0) continue;
        any = true;
        out << lang.str() << '\t' << set.concepts()[c] << '\t' << d + 1 << '\t' << format_shortest((*v)[d]) << '\n';
      }
      if (!any) out << lang.str() << '\t' << set.concepts()[c] << "\t1\t0\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Parallel corpus

inline VerseAlignedCorpus parse_parallel_corpus(std::istream& in) {
  using namespace ingest_detail;
  LineReader reader(in);
  std::string line;
  VerseAlignedCorpus corpus;
  while (reader.next(line)) {
    const std::size_t n = reader.line_number();
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw Error(ErrorCode::MalformedRow, std::to_string(fields.size()) + " fields, expected 3", n);
    if (fields[0].empty()) throw Error(ErrorCode::MalformedRow, "empty verse id", n);
    LanguageId lang = language(fields[1], n);
    std::string verse(fields[0]);
    if (corpus.text(verse, lang)) throw Error(ErrorCode::DuplicateVerseText, verse + "/" + lang.str(), n);
    corpus.add(verse, lang, text(fields[2], n));
  }
  return corpus;
}

inline void write_parallel_corpus(const VerseAlignedCorpus& corpus, std::ostream& out) {
  using namespace ingest_detail;
  for (const auto& [verse, texts] : corpus.verses())
    for (const auto& [lang, t] : texts) {
      require_no(t, "\t\n\r", "verse text");
      out << verse << '\t' << lang.str() << '\t' << t << '\n';
    }
}

// ---------------------------------------------------------------------------
// Distance matrices

inline constexpr int kMatrixDigits = 9;
inline constexpr double kSymmetryTolerance = 1e-9;

inline void write_distance_matrix(const DistanceMatrix& m, std::ostream& out) {
  using namespace ingest_detail;
  require_no(m.metric_tag(), ",\n\r", "metric tag");
  out << m.metric_tag() << ':' << to_string(m.kind());
  for (const auto& lang : m.index()) {
    require_no(lang.str(), ",", "language id");
    out << ',' << lang.str();
  }
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.index()[i].str();
    for (std::size_t j = 0; j < m.size(); ++j) out << ',' << format_significant(m(i, j), kMatrixDigits);
    out << '\n';
  }
}

inline DistanceMatrix read_distance_matrix(std::istream& in) {
  using namespace ingest_detail;
  LineReader reader(in);
  std::string line;
  if (!reader.next_raw(line) || line.empty()) throw Error(ErrorCode::MalformedHeader, "missing header", 1);
  auto header = split(line, ',');
  const auto colon = header[0].rfind(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::MalformedHeader, "first cell must be 'tag:kind'", 1);
  const std::string tag(header[0].substr(0, colon));
  const auto kind_str = header[0].substr(colon + 1);
  MatrixKind kind;
  if (kind_str == "distance")
    kind = MatrixKind::Distance;
  else if (kind_str == "similarity")
    kind = MatrixKind::Similarity;
  else
    throw Error(ErrorCode::MalformedHeader, "unknown matrix kind '" + std::string(kind_str) + "'", 1);

  std::vector<LanguageId> index;
  for (std::size_t i = 1; i < header.size(); ++i) index.push_back(language(header[i], 1));
  const std::size_t n = index.size();
  DistanceMatrix m = [&] {
    try {
      return DistanceMatrix(index, tag, kind);
    } catch (const Error& e) {
      throw Error(e.code(), e.what(), 1);
    }
  }();

  std::vector<double> full(n * n, 0.0);
  std::size_t row = 0;
  while (reader.next(line)) {
    const std::size_t ln = reader.line_number();
    if (row >= n) throw Error(ErrorCode::MalformedRow, "more rows than languages", ln);
    auto fields = split(line, ',');
    if (fields.size() != n + 1)
      throw Error(ErrorCode::MalformedRow, std::to_string(fields.size()) + " cells, expected " + std::to_string(n + 1), ln);
    if (fields[0] != index[row].str())
      throw Error(ErrorCode::MalformedRow, "row label '" + std::string(fields[0]) + "' does not match header position", ln);
    for (std::size_t j = 0; j < n; ++j) {
      double v = 0.0;
      if (!parse_number(fields[j + 1], v)) throw Error(ErrorCode::MalformedRow, "bad value '" + std::string(fields[j + 1]) + "'", ln);
      if (std::isnan(v) || v < 0.0) throw Error(ErrorCode::ValueOutOfRange, std::string(fields[j + 1]), ln);
      full[row * n + j] = v;
    }
    ++row;
  }
  if (row != n) throw Error(ErrorCode::MalformedRow, std::to_string(row) + " rows for " + std::to_string(n) + " languages");

  for (std::size_t i = 0; i < n; ++i) {
    const double d = full[i * n + i];
    if (kind == MatrixKind::Distance && d != 0.0)
      throw Error(ErrorCode::NonzeroDiagonal, index[i].str() + " = " + format_significant(d, kMatrixDigits), i + 2);
    m.set_diagonal(i, d);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = full[i * n + j], b = full[j * n + i];
      const bool both_inf = std::isinf(a) && std::isinf(b);
      const double delta = both_inf ? 0.0 : std::fabs(a - b);
      if (!(delta <= kSymmetryTolerance))
        throw Error(ErrorCode::AsymmetryDetected, "(" + std::to_string(i + 1) + ", " + std::to_string(j + 1) +
                                                      ") delta " + format_significant(delta, 3));
      m.set(i, j, a);
    }
  }
  return m;
}

// File-path conveniences.
inline WordListTable load_wordlist(const std::string& path) { auto in = open_input(path); return parse_wordlist(in); }
inline FeatureTable load_feature_table(const std::string& path) { auto in = open_input(path); return parse_feature_table(in); }
inline LineageMap load_lineages(const std::string& path) { auto in = open_input(path); return parse_lineages(in); }
inline ConceptVectorSet load_concept_vectors(const std::string& path) { auto in = open_input(path); return parse_concept_vectors(in); }
inline VerseAlignedCorpus load_parallel_corpus(const std::string& path) { auto in = open_input(path); return parse_parallel_corpus(in); }
inline DistanceMatrix load_distance_matrix(const std::string& path) { auto in = open_input(path); return read_distance_matrix(in); }

}  // namespace lingdist
