#pragma once

#include <stdexcept>
#include <string>

namespace chordalcov {

// Base class for all library failures. Subclasses name the failure mode so
// callers (and the CLI exit-code mapping) never have to match strings.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define CHORDALCOV_ERROR(Name)                                       \
  struct Name : Error {                                              \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

CHORDALCOV_ERROR(NotDecomposable);
CHORDALCOV_ERROR(InvalidBand);
CHORDALCOV_ERROR(NotInQG);
CHORDALCOV_ERROR(NotPositiveDefinite);
CHORDALCOV_ERROR(TreeMismatch);
CHORDALCOV_ERROR(IndexOutOfRange);
CHORDALCOV_ERROR(DomainError);
CHORDALCOV_ERROR(SampleDeficient);
CHORDALCOV_ERROR(MomentUndefined);
CHORDALCOV_ERROR(NoAdmissiblePoint);
CHORDALCOV_ERROR(DimensionTooLarge);
CHORDALCOV_ERROR(ParseError);
CHORDALCOV_ERROR(MissingValue);
CHORDALCOV_ERROR(SingularBlock);
CHORDALCOV_ERROR(EmptyData);
CHORDALCOV_ERROR(UsageError);

#undef CHORDALCOV_ERROR

}  // namespace chordalcov
