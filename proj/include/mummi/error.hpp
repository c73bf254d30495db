#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mummi {

/// Failure categories shared by every module. The CLI maps these onto exit
/// codes and the service onto HTTP statuses, so keep the set closed.
enum class ErrorKind {
  schema,       // a declared column is missing
  parse,        // a cell could not be read as a number
  empty,        // an input file or body had no data
  state,        // operation invalid for the object's current state
  domain,       // a value outside the operation's mathematical domain
  split,        // a train/test split would leave one side empty
  dimension,    // mismatched vector or matrix sizes
  name,         // an unknown counter, column, method or id
  input,        // any other caller-supplied input problem
  validation,   // invalid hyperparameters or spec fields
  numeric,      // a linear system could not be solved
  unsupported,  // the operation is not defined for this method
  degenerate,   // the input carries no information (constant data)
  selection,    // no counter passed the relevance filter
  io,           // filesystem failure
  internal,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for errors caused by user input rather than a defect.
  bool is_input_error() const noexcept {
    return kind_ != ErrorKind::internal && kind_ != ErrorKind::numeric;
  }

 private:
  ErrorKind kind_;
};

}  // namespace mummi
