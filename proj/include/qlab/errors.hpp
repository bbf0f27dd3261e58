#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qlab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define QLAB_DEFINE_ERROR(Name)              \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  };

QLAB_DEFINE_ERROR(DimensionError)
QLAB_DEFINE_ERROR(NormalizationError)
QLAB_DEFINE_ERROR(RankDeficiencyError)
QLAB_DEFINE_ERROR(DegenerateContextError)
QLAB_DEFINE_ERROR(EmptySharedSetError)
QLAB_DEFINE_ERROR(PartitionError)
QLAB_DEFINE_ERROR(SpanDeficiencyError)
QLAB_DEFINE_ERROR(DegenerateCollapseError)
QLAB_DEFINE_ERROR(InsufficientSupportError)
QLAB_DEFINE_ERROR(ExactnessError)
QLAB_DEFINE_ERROR(DomainError)
QLAB_DEFINE_ERROR(SchmidtFormError)
QLAB_DEFINE_ERROR(SplitConstraintError)
QLAB_DEFINE_ERROR(RuleRegistrationError)
QLAB_DEFINE_ERROR(TableLookupError)
QLAB_DEFINE_ERROR(ConfigError)
QLAB_DEFINE_ERROR(IoError)

#undef QLAB_DEFINE_ERROR

/// Syntax error in a state-description file; carries a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace qlab
