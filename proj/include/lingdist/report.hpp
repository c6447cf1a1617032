#pragma once

// CSV and plain-text renderings of evaluation reports. CSV values keep full
// precision (9 significant digits); text tables round for display only.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lingdist/eval.hpp"
#include "lingdist/ingest.hpp"

namespace lingdist::report {

/// Display label for a family name; falls back to the name itself.
using Labels = std::map<std::string, std::string>;

inline const std::string& label(const Labels& labels, const std::string& family) {
  auto it = labels.find(family);
  return it == labels.end() ? family : it->second;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string num(double v) { return ingest_detail::format_significant(v, kMatrixDigits); }

/// ".78" / "1.00", matching the two-decimal accuracy layout.
inline std::string accuracy_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s.rfind("0.", 0) == 0) s.erase(0, 1);
  return s;
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline void write_accuracy_csv(const FamilyAccuracyReport& r, std::ostream& out, const Labels& labels = {}) {
  out << "family,label,n_languages,correct,accuracy\n";
  for (const auto& f : r.per_family)
    out << csv_field(f.family) << ',' << csv_field(label(labels, f.family)) << ',' << f.n_languages << ',' << f.correct
        << ',' << num(f.accuracy) << '\n';
  out << "all,all," << r.n_languages << ',' << r.correct << ',' << num(r.overall) << '\n';
}

/// One row per k, one column per family, then "all".
inline void write_accuracy_table(std::span<const FamilyAccuracyReport> reports, std::ostream& out, const Labels& labels = {}) {
  if (reports.empty()) return;
  std::vector<std::string> header{"k"};
  for (const auto& f : reports.front().per_family) header.push_back(label(labels, f.family));
  header.push_back("all");
  std::vector<std::size_t> width;
  for (const auto& h : header) width.push_back(std::max<std::size_t>(h.size(), 5));

  out << "# metric " << reports.front().metric_tag << '\n';
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? " " : "") << pad(header[c], width[c]) << (c + 2 == header.size() ? " |" : "");
  out << '\n';
  for (const auto& r : reports) {
    std::vector<std::string> cells{std::to_string(r.k)};
    for (const auto& f : r.per_family) cells.push_back(accuracy_cell(f.accuracy));
    cells.push_back(accuracy_cell(r.overall));
    for (std::size_t c = 0; c < cells.size(); ++c) out << (c ? " " : "") << pad(cells[c], width[c]) << (c + 2 == cells.size() ? " |" : "");
    out << '\n';
  }
}

inline void write_neighbors_csv(const NeighborDistributionReport& r, std::ostream& out, const Labels& labels = {}) {
  out << "source_family,n_languages";
  for (const auto& f : r.families) out << ',' << csv_field(label(labels, f));
  out << ",other\n";
  for (const auto& row : r.rows) {
    out << csv_field(label(labels, row.source_family)) << ',' << row.n_languages;
    for (double p : row.percent) out << ',' << num(p);
    out << ',' << num(row.other) << '\n';
  }
}

inline void write_neighbors_table(const NeighborDistributionReport& r, std::ostream& out, const Labels& labels = {}) {
  std::vector<std::string> header{"src"};
  for (const auto& f : r.families) header.push_back(label(labels, f));
  std::vector<std::size_t> width;
  for (const auto& h : header) width.push_back(std::max<std::size_t>(h.size(), 4));
  for (const auto& row : r.rows) width[0] = std::max(width[0], label(labels, row.source_family).size());

  out << "# metric " << r.metric_tag << ", % of the " << r.k << " nearest neighbours\n";
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? " " : "") << pad(header[c], width[c]);
  out << '\n';
  for (const auto& row : r.rows) {
    out << pad(label(labels, row.source_family), width[0]);
    for (std::size_t c = 0; c < row.percent.size(); ++c)
      out << ' ' << pad(std::to_string(static_cast<long>(std::lround(row.percent[c]))), width[c + 1]);
    out << '\n';
  }
}

/// Feature x family coded coverage; `detailed` adds unknown and missing
/// fractions per family.
inline void write_coverage_csv(std::span<const FeatureCoverageReport> reports, std::ostream& out, bool detailed,
                               const Labels& labels = {}) {
  out << "feature";
  for (const auto& r : reports) {
    const auto& l = label(labels, r.family);
    out << ',' << csv_field(l);
    if (detailed) out << ',' << csv_field(l + ":unknown") << ',' << csv_field(l + ":missing");
  }
  out << '\n';
  if (reports.empty()) return;
  for (std::size_t f = 0; f < reports.front().entries.size(); ++f) {
    out << csv_field(reports.front().entries[f].feature);
    for (const auto& r : reports) {
      const auto& e = r.entries[f];
      out << ',' << num(e.coded);
      if (detailed) out << ',' << num(e.unknown) << ',' << num(e.missing);
    }
    out << '\n';
  }
}

inline void write_tradeoff_csv(std::span<const std::pair<std::size_t, std::size_t>> curve, std::ostream& out) {
  out << "n_features,n_languages\n";
  for (const auto& [n, count] : curve) out << n << ',' << count << '\n';
}

}  // namespace lingdist::report
