#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lingdist {

enum class ErrorCode {
  InvalidArgument,
  InvalidUtf8,
  Io,
  // ingestion
  MalformedHeader,
  MalformedRow,
  DuplicateEntry,
  EmptyForm,
  BadCell,
  DuplicateLanguageRow,
  EmptyPath,
  DuplicateLanguage,
  DimOutOfRange,
  ValueOutOfRange,
  MissingLabelBlock,
  LabelConflict,
  DuplicateVerseText,
  AsymmetryDetected,
  NonzeroDiagonal,
  // model
  MissingConcept,
  // metrics
  LengthMismatch,
  NullVector,
  BothEmpty,
  NoSharedConcepts,
  NotComparable,
  MissingData,
  PairFailed,
  // conceptualizer
  ConceptNotInSource,
  // evaluation
  KTooLarge,
  UnknownLanguage,
  MissingLineage,
  EmptyFamily,
  NTooLarge,
};

inline constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidUtf8: return "InvalidUtf8";
    case ErrorCode::Io: return "Io";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateEntry: return "DuplicateEntry";
    case ErrorCode::EmptyForm: return "EmptyForm";
    case ErrorCode::BadCell: return "BadCell";
    case ErrorCode::DuplicateLanguageRow: return "DuplicateLanguageRow";
    case ErrorCode::EmptyPath: return "EmptyPath";
    case ErrorCode::DuplicateLanguage: return "DuplicateLanguage";
    case ErrorCode::DimOutOfRange: return "DimOutOfRange";
    case ErrorCode::ValueOutOfRange: return "ValueOutOfRange";
    case ErrorCode::MissingLabelBlock: return "MissingLabelBlock";
    case ErrorCode::LabelConflict: return "LabelConflict";
    case ErrorCode::DuplicateVerseText: return "DuplicateVerseText";
    case ErrorCode::AsymmetryDetected: return "AsymmetryDetected";
    case ErrorCode::NonzeroDiagonal: return "NonzeroDiagonal";
    case ErrorCode::MissingConcept: return "MissingConcept";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NullVector: return "NullVector";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::NoSharedConcepts: return "NoSharedConcepts";
    case ErrorCode::NotComparable: return "NotComparable";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::PairFailed: return "PairFailed";
    case ErrorCode::ConceptNotInSource: return "ConceptNotInSource";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::UnknownLanguage: return "UnknownLanguage";
    case ErrorCode::MissingLineage: return "MissingLineage";
    case ErrorCode::EmptyFamily: return "EmptyFamily";
    case ErrorCode::NTooLarge: return "NTooLarge";
  }
  return "Unknown";
}

/// Every failure raised by the library. `line()` is the 1-based input line
/// for parser errors and 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail, std::size_t line = 0)
      : std::runtime_error(format(code, detail, line)), code_(code), line_(line) {}

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(ErrorCode code, const std::string& detail, std::size_t line) {
    std::string out(to_string(code));
    if (line != 0) out += " at line " + std::to_string(line);
    if (!detail.empty()) out += ": " + detail;
    return out;
  }

  ErrorCode code_;
  std::size_t line_;
};

}  // namespace lingdist
