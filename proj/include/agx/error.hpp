#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agx {

enum class ErrorCode {
  // netlist parsing / structure
  SyntaxError,
  UnknownCell,
  MultipleDrivers,
  UndeclaredNet,
  UndrivenNet,
  UnconnectedPin,
  CombinationalLoop,
  CycleIntroduced,
  UnknownTarget,
  // timing
  MissingCellDelay,
  InvalidFactor,
  UnknownInstance,
  InvalidModel,
  // simulation / metrics
  LayoutMismatch,
  EmptyTraces,
  LengthMismatch,
  EmptyStream,
  UnknownNet,
  // optimisation
  NoCriticalPathCandidates,
  InvalidConfig,
  Infeasible,
  Stuck,
  // io
  FileNotFound,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with source position (1-based) and, once known, the file.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, int line, int column, const std::string& message,
             const std::string& file = {})
      : Error(code, (file.empty() ? "" : file + ":") + std::to_string(line) + ":" +
                        std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        detail_(message) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  int column_;
  std::string detail_;
};

}  // namespace agx
