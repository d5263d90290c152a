#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kbq {

// Failure categories surfaced by the library. The CLI maps every Error to
// exit code 2; usage problems never reach this type.
enum class ErrorCode {
  MalformedLine,
  Io,
  DuplicateRelease,
  UnparseableDate,
  UnknownRelease,
  EndpointError,
  MalformedResult,
  MissingBinding,
  NegativeZeroBucket,
  InsufficientReleases,
  UnknownClass,
  MissingProfile,
  ZeroEntityCount,
  EmptyRowSet,
  InsufficientPoints,
  DegenerateFit,
  InvalidSeries,
  EmptyHistogram,
  SingleObservation,
  ZeroFrequency,
  TooFewMinority,
  NotBinary,
  UnknownLabel,
  MissingColumn,
  EmptyDataset,
  SingleClass,
  RaggedFeatures,
  WidthMismatch,
  TooFewPerClass,
  InconsistentInputs,
  EndpointOnlyRelease,
  ShapeSyntax,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::DuplicateRelease: return "DuplicateRelease";
    case ErrorCode::UnparseableDate: return "UnparseableDate";
    case ErrorCode::UnknownRelease: return "UnknownRelease";
    case ErrorCode::EndpointError: return "EndpointError";
    case ErrorCode::MalformedResult: return "MalformedResult";
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::NegativeZeroBucket: return "NegativeZeroBucket";
    case ErrorCode::InsufficientReleases: return "InsufficientReleases";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::MissingProfile: return "MissingProfile";
    case ErrorCode::ZeroEntityCount: return "ZeroEntityCount";
    case ErrorCode::EmptyRowSet: return "EmptyRowSet";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::InvalidSeries: return "InvalidSeries";
    case ErrorCode::EmptyHistogram: return "EmptyHistogram";
    case ErrorCode::SingleObservation: return "SingleObservation";
    case ErrorCode::ZeroFrequency: return "ZeroFrequency";
    case ErrorCode::TooFewMinority: return "TooFewMinority";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::RaggedFeatures: return "RaggedFeatures";
    case ErrorCode::WidthMismatch: return "WidthMismatch";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::InconsistentInputs: return "InconsistentInputs";
    case ErrorCode::EndpointOnlyRelease: return "EndpointOnlyRelease";
    case ErrorCode::ShapeSyntax: return "ShapeSyntax";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Module-tagged error: what() reads "<module>: <Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(std::string_view module, ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(module) + ": " + std::string(to_string(code)) + ": " + detail),
        module_(module),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
  ErrorCode code_;
};

// Raised for N-Triples syntax violations; carries the 1-based line number.
class MalformedLine : public Error {
 public:
  MalformedLine(std::size_t line, const std::string& reason)
      : Error("rdf-core", ErrorCode::MalformedLine, "line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

// SPARQL endpoint failure. status is the HTTP status, or 0 for transport
// failures (timeouts, refused connections).
class EndpointError : public Error {
 public:
  EndpointError(int status, bool timeout, const std::string& detail)
      : Error("acquisition", ErrorCode::EndpointError, detail), status_(status), timeout_(timeout) {}

  int status() const noexcept { return status_; }
  bool timeout() const noexcept { return timeout_; }

 private:
  int status_;
  bool timeout_;
};

}  // namespace kbq
