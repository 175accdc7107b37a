#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cliplab {

enum class ErrorKind {
  // model_store
  MissingFile,
  ParseError,
  ShapeMismatch,
  NonFiniteValue,
  UnsortedActivations,
  InvalidRecord,
  UnsupportedFormat,
  // category_graph / partition
  DegenerateActivations,
  LayerOrderError,
  IndexOutOfRange,
  EmptyCore,
  // statlab
  ZeroNormVector,
  DimMismatch,
  TooFewTokens,
  MissingEmbedding,
  InsufficientData,
  ConstantSample,
  SampleSizeOutOfRange,
  ConstantGroup,
  TooFewGroups,
  NonPositiveExpected,
  LengthMismatch,
  DegenerateMargins,
  EmptyInput,
  // dimred
  DegenerateMatrix,
  SingularCorrelation,
  AxisNotFound,
  PerplexityTooLarge,
  EmptyGroup,
  InvalidArgument,
  // pipeline
  ConfigError,
  NoEligibleClusters,
  SpecTooSmall,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers can map it
/// to an exit code or record it against a (target, precursor) pair.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cliplab
