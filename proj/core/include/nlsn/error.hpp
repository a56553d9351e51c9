#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nlsn {

/// Failure categories surfaced by the library. Each maps to a documented
/// condition of the owning operation.
enum class ErrorKind {
  InvalidArgument,   ///< precondition violated (bad dimension, non-positive mass, ...)
  InvalidParams,     ///< Params invariant violated; message names the constraint
  GridMismatch,      ///< fields defined on different grids
  NoMaximizer,       ///< fiber has no interior maximum (K = 0 or A + B = 0)
  NumericalFailure,  ///< iteration failed on input that should be valid
  BracketNotFound,   ///< shooting bracket could not be established
  RefineGrid,        ///< residual target unreachable at this resolution
  RefineDomain,      ///< truncation radius too small for the profile
  NegativeCoupling,  ///< positive ground-state search requested with beta < 0
  Misuse,            ///< operation called outside its regime (e.g. subcritical check)
  Config,            ///< configuration document rejected
  Io,                ///< file could not be read or written
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace nlsn
