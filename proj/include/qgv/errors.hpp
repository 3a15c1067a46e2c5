#pragma once

#include <stdexcept>
#include <string>

namespace qgv {

/// Base of every error raised by the library. `kind()` is a stable
/// identifier that reports and the CLI print verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define QGV_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  };

QGV_DEFINE_ERROR(ContractViolation)
QGV_DEFINE_ERROR(SignatureError)
QGV_DEFINE_ERROR(NormalDegenerateError)
QGV_DEFINE_ERROR(DomainError)
QGV_DEFINE_ERROR(InvariantError)
QGV_DEFINE_ERROR(JointDiagonalizationError)
QGV_DEFINE_ERROR(EigenCrossingError)
QGV_DEFINE_ERROR(ConstraintError)
QGV_DEFINE_ERROR(DegenerateProfileError)
QGV_DEFINE_ERROR(RegularityError)
QGV_DEFINE_ERROR(ConfigError)
QGV_DEFINE_ERROR(UnknownSuiteError)
QGV_DEFINE_ERROR(ParseError)

#undef QGV_DEFINE_ERROR

}  // namespace qgv
