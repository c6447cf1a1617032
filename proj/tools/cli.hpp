#pragma once

// lingdist command-line front end. `run` is the whole program minus main(),
// so tests can drive it in-process.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lingdist/lingdist.hpp"

namespace lingdist::cli {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Line-oriented key=value log on the diagnostics stream.
class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {
    if (const char* env = std::getenv("LINGDIST_LOG")) {
      std::string v = env;
      if (v == "error") level_ = LogLevel::Error;
      else if (v == "debug") level_ = LogLevel::Debug;
    }
  }

  void error(const std::string& line) { emit(LogLevel::Error, "error", line); }
  void warn(const std::string& line) { emit(LogLevel::Info, "warn", line); }
  void info(const std::string& line) { emit(LogLevel::Info, "info", line); }
  void debug(const std::string& line) { emit(LogLevel::Debug, "debug", line); }

 private:
  void emit(LogLevel at, const char* tag, const std::string& line) {
    if (static_cast<int>(at) <= static_cast<int>(level_)) err_ << "level=" << tag << ' ' << line << '\n';
  }

  std::ostream& err_;
  LogLevel level_ = LogLevel::Info;
};

namespace detail {

inline std::string quoted(const std::string& s) {
  return s.find_first_of(" \t\"=") == std::string::npos && !s.empty() ? s : "\"" + s + "\"";
}

inline std::vector<std::string> nonempty(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& s : items)
    if (!s.empty()) out.push_back(s);
  return out;
}

inline std::vector<LanguageId> to_languages(const std::vector<std::string>& items) {
  std::vector<LanguageId> out;
  for (const auto& s : nonempty(items)) out.emplace_back(s);
  return out;
}

/// "LABEL=Family Name" or just "Family Name".
inline void parse_families(const std::vector<std::string>& items, std::vector<std::string>& names, report::Labels& labels) {
  for (const auto& item : nonempty(items)) {
    auto eq = item.find('=');
    if (eq == std::string::npos) {
      names.push_back(item);
    } else {
      names.push_back(item.substr(eq + 1));
      labels[names.back()] = item.substr(0, eq);
    }
  }
  if (names.empty()) throw Error(ErrorCode::InvalidArgument, "no families given");
}

/// Write through a buffer so a failed run leaves no partial file.
inline void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  auto file = open_output(path);
  file << content;
  if (!file) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

struct ConceptLine {
  std::string name;
  std::vector<std::string> queries;
};

/// Concept list: `concept<TAB>query[<TAB>query...]`; '#' starts a comment line.
inline std::vector<ConceptLine> load_concept_list(const std::string& path) {
  auto in = open_input(path);
  std::vector<ConceptLine> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = ingest_detail::split(line, '\t');
    if (fields.size() < 2) throw Error(ErrorCode::MalformedRow, "expected concept<TAB>query...", n);
    ConceptLine c{unicode::to_nfc(unicode::strip(fields[0])), {}};
    for (std::size_t i = 1; i < fields.size(); ++i) c.queries.emplace_back(fields[i]);
    out.push_back(std::move(c));
  }
  return out;
}

inline void log_config(Log& log, const CLI::App& sub) {
  std::istringstream resolved(sub.config_to_str(true, false));
  std::string line;
  while (std::getline(resolved, line)) {
    if (line.empty() || line[0] == '[' || line[0] == '#') continue;
    line.erase(std::remove(line.begin(), line.end(), ' '), line.end());
    log.info("config " + line);
  }
}

/// Expands `--config FILE` after the subcommand into `--key=value` arguments
/// placed ahead of the command line, skipping keys the command line sets.
/// Keys may be bare or under a section named after the subcommand.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args, const std::set<std::string>& subcommands) {
  auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) { return subcommands.contains(a); });
  if (sub == args.end()) return args;
  std::string file;
  for (auto it = sub + 1; it != args.end(); ++it) {
    if (*it == "--config" && it + 1 != args.end()) file = *(it + 1);
    else if (it->rfind("--config=", 0) == 0) file = it->substr(9);
  }
  if (file.empty()) return args;
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_file(file);
  } catch (const CLI::FileError&) {
    throw Error(ErrorCode::Io, "cannot read config file '" + file + "'");
  }
  auto given = [&](const std::string& name) {
    return std::any_of(sub + 1, args.end(), [&](const std::string& a) { return a == "--" + name || a.rfind("--" + name + "=", 0) == 0; });
  };
  std::vector<std::string> out(args.begin(), sub + 1);
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--" || item.name == "config") continue;
    if (!item.parents.empty() && (item.parents.size() != 1 || item.parents[0] != *sub)) continue;
    if (given(item.name)) continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    out.push_back("--" + item.name + "=" + value);
  }
  out.insert(out.end(), sub + 1, args.end());
  return out;
}

}  // namespace detail

struct Options {
  unsigned jobs = default_jobs();

  // validate
  std::vector<std::string> v_wordlists, v_features, v_lineages, v_vectors, v_corpora, v_matrices;

  // conceptualize
  std::string corpus, concepts_file, source_lang;
  std::vector<std::string> targets, references;
  ConceptualizerConfig concept_config;
  bool strict = false;

  // distances
  std::string metric, input, languages_file;
  std::vector<std::string> languages, concept_subset, feature_subset;
  std::size_t top_n = 50;
  std::size_t min_shared = 1;

  // evaluate / coverage / tradeoff
  std::string matrix, lineages, report_dir, features_file;
  std::vector<std::string> families;
  std::vector<std::size_t> k_list{2, 4, 6, 8, 10};
  bool neighbors = false;
  std::size_t neighbor_k = 10;
  bool detailed = false;
  std::vector<std::size_t> n_list;

  std::string out;
};

inline int cmd_validate(const Options& o, std::ostream& out, Log& log) {
  int status = 0;
  auto check = [&](const std::string& kind, const std::string& path, auto&& describe) {
    try {
      const std::string shape = describe(path);
      out << "file=" << detail::quoted(path) << " kind=" << kind << " status=ok " << shape << '\n';
    } catch (const Error& e) {
      status = 1;
      out << "file=" << detail::quoted(path) << " kind=" << kind << " status=error code=" << to_string(e.code())
          << " line=" << e.line() << '\n';
      log.error("file=" + detail::quoted(path) + " " + e.what());
    }
  };
  for (const auto& p : o.v_wordlists)
    check("wordlist", p, [](const std::string& path) {
      auto t = load_wordlist(path);
      return "rows=" + std::to_string(t.size()) + " languages=" + std::to_string(t.languages().size()) +
             " concepts=" + std::to_string(t.concepts().size());
    });
  for (const auto& p : o.v_features)
    check("features", p, [](const std::string& path) {
      auto t = load_feature_table(path);
      return "rows=" + std::to_string(t.languages().size()) + " columns=" + std::to_string(t.features().size());
    });
  for (const auto& p : o.v_lineages)
    check("lineages", p, [](const std::string& path) {
      auto t = load_lineages(path);
      std::size_t depth = 0;
      for (const auto& [_, profile] : t) depth = std::max(depth, profile.lineage.size());
      return "rows=" + std::to_string(t.size()) + " max_depth=" + std::to_string(depth);
    });
  for (const auto& p : o.v_vectors)
    check("vectors", p, [](const std::string& path) {
      auto t = load_concept_vectors(path);
      return "languages=" + std::to_string(t.languages().size()) + " concepts=" + std::to_string(t.concepts().size()) +
             " dims_per_concept=" + std::to_string(t.dims_per_concept());
    });
  for (const auto& p : o.v_corpora)
    check("corpus", p, [](const std::string& path) {
      auto t = load_parallel_corpus(path);
      return "verses=" + std::to_string(t.verses().size()) + " languages=" + std::to_string(t.languages().size());
    });
  for (const auto& p : o.v_matrices)
    check("matrix", p, [](const std::string& path) {
      auto t = load_distance_matrix(path);
      return "rows=" + std::to_string(t.size()) + " columns=" + std::to_string(t.size()) + " metric=" + t.metric_tag() +
             " kind=" + std::string(to_string(t.kind()));
    });
  return status;
}

inline int cmd_conceptualize(const Options& o, std::ostream& out, Log& log, bool targets_given, bool refs_given) {
  const auto corpus = load_parallel_corpus(o.corpus);
  const LanguageId source(o.source_lang);
  std::vector<ConceptQuery> queries;
  for (const auto& c : detail::load_concept_list(o.concepts_file)) queries.push_back(ConceptQuery::make(c.name, c.queries, source));

  std::set<LanguageId> targets;
  if (targets_given) {
    for (const auto& t : detail::to_languages(o.targets)) targets.insert(t);
  } else {
    targets = corpus.languages();
  }
  std::set<LanguageId> references = targets;
  if (refs_given) {
    references.clear();
    for (const auto& r : detail::to_languages(o.references)) references.insert(r);
  }
  log.info("event=conceptualize concepts=" + std::to_string(queries.size()) + " targets=" + std::to_string(targets.size()) +
           " references=" + std::to_string(references.size()));

  auto outcome = conceptualize(corpus, queries, targets, references, o.concept_config, o.jobs);
  for (const auto& f : outcome.failures) log.warn("event=concept_failed detail=" + detail::quoted(f));
  std::ostringstream buffer;
  write_concept_vectors(outcome.vectors, buffer);
  detail::emit(o.out, buffer.str(), out);
  log.info("event=written file=" + detail::quoted(o.out) + " failures=" + std::to_string(outcome.failures.size()));
  return (o.strict && !outcome.failures.empty()) ? 1 : 0;
}

inline int cmd_distances(const Options& o, std::ostream& out, Log& log) {
  MetricSpec spec;
  spec.name = parse_metric(o.metric);
  spec.concepts = detail::nonempty(o.concept_subset);
  spec.min_shared = o.min_shared;

  std::vector<LanguageId> requested = detail::to_languages(o.languages);
  if (!o.languages_file.empty()) {
    auto in = open_input(o.languages_file);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) requested.emplace_back(line);
    }
  }
  auto pick = [&](std::vector<LanguageId> available) {
    if (requested.empty()) {
      std::sort(available.begin(), available.end());
      return available;
    }
    return requested;
  };

  MetricData data;
  ConceptVectorSet vectors;
  WordListTable wordlist;
  LineageMap lineages;
  FeatureTable features;
  std::vector<LanguageId> langs;
  switch (spec.name) {
    case Metric::CosineConceptual:
    case Metric::HammingConceptual:
      vectors = load_concept_vectors(o.input);
      data.vectors = &vectors;
      langs = pick(vectors.languages());
      break;
    case Metric::LdnMean:
    case Metric::LcsMean:
      wordlist = load_wordlist(o.input);
      data.wordlist = &wordlist;
      langs = pick(wordlist.languages());
      break;
    case Metric::PathJaccard:
    case Metric::LcaEdges: {
      lineages = load_lineages(o.input);
      data.lineages = &lineages;
      std::vector<LanguageId> all;
      for (const auto& [id, _] : lineages) all.push_back(id);
      langs = pick(all);
      break;
    }
    case Metric::FeatureHamming: {
      features = load_feature_table(o.input);
      data.features = &features;
      spec.features = detail::nonempty(o.feature_subset);
      if (spec.features.empty()) spec.features = select_most_frequent_features(features, o.top_n);
      const auto comparable = comparable_languages(features, spec.features);
      std::vector<LanguageId> candidates = pick(features.languages());
      for (const auto& l : candidates)
        if (comparable.contains(l)) langs.push_back(l);
      log.info("event=feature_selection features=" + std::to_string(spec.features.size()) + " candidates=" +
               std::to_string(candidates.size()) + " retained=" + std::to_string(langs.size()) +
               " dropped=" + std::to_string(candidates.size() - langs.size()));
      break;
    }
  }
  log.info("event=distances metric=" + o.metric + " languages=" + std::to_string(langs.size()));
  const auto m = build_distance_matrix(spec, data, langs, o.jobs);
  std::ostringstream buffer;
  write_distance_matrix(m, buffer);
  detail::emit(o.out, buffer.str(), out);
  log.info("event=written file=" + detail::quoted(o.out));
  return 0;
}

inline int cmd_evaluate(const Options& o, std::ostream& out, Log& log) {
  const auto m = load_distance_matrix(o.matrix);
  const auto lineages = load_lineages(o.lineages);
  std::vector<std::string> families;
  report::Labels labels;
  detail::parse_families(o.families, families, labels);
  if (o.k_list.empty()) throw Error(ErrorCode::InvalidArgument, "empty k list");

  std::filesystem::create_directories(o.report_dir);
  const std::filesystem::path dir(o.report_dir);
  std::vector<FamilyAccuracyReport> reports;
  for (std::size_t k : o.k_list) {
    reports.push_back(family_accuracy(m, lineages, families, k, o.jobs));
    std::ostringstream csv;
    report::write_accuracy_csv(reports.back(), csv, labels);
    detail::emit((dir / ("accuracy_k" + std::to_string(k) + ".csv")).string(), csv.str(), out);
    log.info("event=accuracy k=" + std::to_string(k) + " overall=" + report::num(reports.back().overall) +
             " languages=" + std::to_string(reports.back().n_languages));
  }
  std::ostringstream table;
  report::write_accuracy_table(reports, table, labels);
  detail::emit((dir / "accuracy.txt").string(), table.str(), out);
  out << table.str();

  if (o.neighbors) {
    const auto dist = neighbor_family_distribution(m, lineages, families, o.neighbor_k, o.jobs);
    const std::string stem = "neighbors_k" + std::to_string(o.neighbor_k);
    std::ostringstream csv, text;
    report::write_neighbors_csv(dist, csv, labels);
    report::write_neighbors_table(dist, text, labels);
    detail::emit((dir / (stem + ".csv")).string(), csv.str(), out);
    detail::emit((dir / (stem + ".txt")).string(), text.str(), out);
    out << text.str();
  }
  return 0;
}

inline int cmd_coverage(const Options& o, std::ostream& out, Log& log) {
  const auto table = load_feature_table(o.features_file);
  const auto lineages = load_lineages(o.lineages);
  std::vector<std::string> families;
  report::Labels labels;
  detail::parse_families(o.families, families, labels);
  std::vector<FeatureCoverageReport> reports;
  for (const auto& f : families) {
    reports.push_back(feature_coverage(table, lineages, f));
    log.info("event=coverage family=" + detail::quoted(f) + " languages=" + std::to_string(reports.back().n_languages));
  }
  std::ostringstream csv;
  report::write_coverage_csv(reports, csv, o.detailed, labels);
  detail::emit(o.out, csv.str(), out);
  return 0;
}

inline int cmd_tradeoff(const Options& o, std::ostream& out, Log& log) {
  const auto table = load_feature_table(o.features_file);
  if (o.n_list.empty()) throw Error(ErrorCode::InvalidArgument, "empty n list");
  const auto curve = feature_tradeoff_curve(table, o.n_list);
  for (const auto& [n, c] : curve) log.debug("event=tradeoff n=" + std::to_string(n) + " languages=" + std::to_string(c));
  std::ostringstream csv;
  report::write_tradeoff_csv(curve, csv);
  detail::emit(o.out, csv.str(), out);
  return 0;
}

/// Exit codes: 0 success, 1 user or data error, 2 internal error.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Log log(err);
  Options o;
  CLI::App app{"Language distance toolkit: ingestion, concept alignment, distance matrices and family-classification evaluation"};
  app.require_subcommand(1);
  app.add_option("-j,--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  auto add_common = [&](CLI::App* sub) {
    sub->set_config("--config", "", "key = value file supplying any option; the command line wins");
    sub->add_option("-j,--jobs", o.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "Parse input files and report their shape or first error");
  add_common(validate);
  validate->add_option("--wordlist", o.v_wordlists, "Word list TSV");
  validate->add_option("--features", o.v_features, "Feature table CSV");
  validate->add_option("--lineages", o.v_lineages, "Lineage TSV");
  validate->add_option("--vectors", o.v_vectors, "Concept vector TSV");
  validate->add_option("--corpus", o.v_corpora, "Parallel corpus TSV");
  validate->add_option("--matrix", o.v_matrices, "Distance matrix CSV");

  auto* conceptualize_cmd = app.add_subcommand("conceptualize", "Build concept vectors from a verse-aligned corpus");
  add_common(conceptualize_cmd);
  conceptualize_cmd->add_option("--corpus", o.corpus, "Parallel corpus TSV")->required();
  conceptualize_cmd->add_option("--concepts", o.concepts_file, "Concept list: concept<TAB>query...")->required();
  conceptualize_cmd->add_option("--source-lang", o.source_lang, "Source language id")->required();
  auto* targets_opt = conceptualize_cmd->add_option("--targets", o.targets, "Target languages (default: all)")->delimiter(',');
  auto* refs_opt = conceptualize_cmd->add_option("--reference-langs", o.references, "Languages fixing the labels (default: targets)")->delimiter(',');
  conceptualize_cmd->add_option("--out", o.out, "Output concept vector file ('-' for stdout)")->required();
  conceptualize_cmd->add_option("--min-n", o.concept_config.min_n, "Shortest n-gram")->capture_default_str();
  conceptualize_cmd->add_option("--max-n", o.concept_config.max_n, "Longest n-gram")->capture_default_str();
  conceptualize_cmd->add_option("--min-count", o.concept_config.min_count, "Minimum verses per candidate")->capture_default_str();
  conceptualize_cmd->add_option("--min-score", o.concept_config.min_score, "Minimum association score")->capture_default_str();
  conceptualize_cmd->add_option("--max-targets", o.concept_config.max_targets, "Forward-pass picks")->capture_default_str();
  conceptualize_cmd->add_option("--dims", o.concept_config.dims_per_concept, "Dimensions per concept")->capture_default_str();
  conceptualize_cmd->add_flag("--strict", o.strict, "Exit 1 if any concept fails");

  auto* distances = app.add_subcommand("distances", "Compute a pairwise distance or similarity matrix");
  add_common(distances);
  std::string metric_help = "One of:";
  for (Metric m : kAllMetrics) metric_help += " " + std::string(to_string(m));
  distances->add_option("--metric", o.metric, metric_help)->required();
  distances->add_option("--input", o.input, "Input table for the metric")->required();
  distances->add_option("--languages", o.languages, "Languages in matrix order (default: all, sorted)")->delimiter(',');
  distances->add_option("--languages-file", o.languages_file, "File with one language id per line");
  distances->add_option("--concepts", o.concept_subset, "Concept subset for conceptual metrics")->delimiter(',');
  distances->add_option("--feature-list", o.feature_subset, "Explicit feature subset for feature_hamming")->delimiter(',');
  distances->add_option("--top-n", o.top_n, "Most frequent features used by feature_hamming")->capture_default_str();
  distances->add_option("--min-shared", o.min_shared, "Minimum shared concepts for word-list metrics")->capture_default_str();
  distances->add_option("--out", o.out, "Output matrix CSV ('-' for stdout)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Nearest-neighbour family classification reports");
  add_common(evaluate);
  evaluate->add_option("--matrix", o.matrix, "Distance matrix CSV")->required();
  evaluate->add_option("--lineages", o.lineages, "Lineage TSV")->required();
  evaluate->add_option("--families", o.families, "Families, optionally LABEL=Name")->delimiter(',')->required();
  evaluate->add_option("--k-list", o.k_list, "Neighbourhood sizes")->delimiter(',')->capture_default_str();
  evaluate->add_option("--report-dir", o.report_dir, "Output directory")->required();
  evaluate->add_flag("--neighbors", o.neighbors, "Also report neighbour family distributions");
  evaluate->add_option("--neighbor-k", o.neighbor_k, "k for the neighbour distribution")->capture_default_str();

  auto* coverage = app.add_subcommand("coverage", "Per-family feature coverage");
  add_common(coverage);
  coverage->add_option("--features", o.features_file, "Feature table CSV")->required();
  coverage->add_option("--lineages", o.lineages, "Lineage TSV")->required();
  coverage->add_option("--families", o.families, "Families, optionally LABEL=Name")->delimiter(',')->required();
  coverage->add_option("--out", o.out, "Output CSV ('-' for stdout)")->required();
  coverage->add_flag("--detailed", o.detailed, "Add unknown and missing fractions");

  auto* tradeoff = app.add_subcommand("tradeoff", "Comparable languages as a function of feature count");
  add_common(tradeoff);
  tradeoff->add_option("--features", o.features_file, "Feature table CSV")->required();
  tradeoff->add_option("--n-list", o.n_list, "Feature counts, ascending")->delimiter(',')->required();
  tradeoff->add_option("--out", o.out, "Output CSV ('-' for stdout)")->required();

  std::vector<std::string> reversed;
  try {
    std::set<std::string> names;
    for (const auto* sub : app.get_subcommands([](const CLI::App*) { return true; })) names.insert(sub->get_name());
    const auto expanded = detail::expand_config(args, names);
    reversed.assign(expanded.rbegin(), expanded.rend());
  } catch (const Error& e) {
    log.error("code=" + std::string(to_string(e.code())) + " message=" + detail::quoted(e.what()));
    return 1;
  }
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::ostringstream msg;
    app.exit(e, msg, msg);
    log.error("event=usage message=" + detail::quoted(e.what()));
    err << msg.str();
    return 1;
  }

  CLI::App* chosen = app.get_subcommands().front();
  detail::log_config(log, *chosen);
  try {
    if (chosen == validate) return cmd_validate(o, out, log);
    if (chosen == conceptualize_cmd) return cmd_conceptualize(o, out, log, targets_opt->count() > 0, refs_opt->count() > 0);
    if (chosen == distances) return cmd_distances(o, out, log);
    if (chosen == evaluate) return cmd_evaluate(o, out, log);
    if (chosen == coverage) return cmd_coverage(o, out, log);
    if (chosen == tradeoff) return cmd_tradeoff(o, out, log);
  } catch (const Error& e) {
    log.error("code=" + std::string(to_string(e.code())) + " line=" + std::to_string(e.line()) +
              " message=" + detail::quoted(e.what()));
    return 1;
  } catch (const std::exception& e) {
    log.error("event=internal message=" + detail::quoted(e.what()));
    return 2;
  }
  return 2;
}

}  // namespace lingdist::cli
