#ifndef DYNPOP_ERROR_HPP
#define DYNPOP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dynpop {

/// Base of every domain error raised by the library. `kind()` is the stable
/// machine-readable class name surfaced by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DYNPOP_DEFINE_ERROR(Name, Base)                                  \
  class Name : public Base {                                             \
   public:                                                               \
    explicit Name(const std::string& message) : Base(#Name, message) {}  \
                                                                         \
   protected:                                                            \
    Name(std::string kind, const std::string& message)                   \
        : Base(std::move(kind), message) {}                              \
  };

// Malformed game definition (dimensions, masses, masks, rates).
DYNPOP_DEFINE_ERROR(SpecError, Error)
// An evaluator failed or produced an unusable value at a social state.
DYNPOP_DEFINE_ERROR(EvalError, Error)
// Game-file and expression parsing.
DYNPOP_DEFINE_ERROR(ParseError, SpecError)
DYNPOP_DEFINE_ERROR(SyntaxError, ParseError)
DYNPOP_DEFINE_ERROR(UnknownIdentifierError, ParseError)
DYNPOP_DEFINE_ERROR(ArityError, ParseError)
DYNPOP_DEFINE_ERROR(IndexError, ParseError)
DYNPOP_DEFINE_ERROR(MissingTransitionRowError, ParseError)
// Parameters outside their documented ranges.
DYNPOP_DEFINE_ERROR(ConfigError, Error)
DYNPOP_DEFINE_ERROR(IntegrationError, Error)
DYNPOP_DEFINE_ERROR(NumericalError, Error)
DYNPOP_DEFINE_ERROR(CertificateError, Error)
DYNPOP_DEFINE_ERROR(EquivalenceViolation, Error)

#undef DYNPOP_DEFINE_ERROR

}  // namespace dynpop

#endif  // DYNPOP_ERROR_HPP
