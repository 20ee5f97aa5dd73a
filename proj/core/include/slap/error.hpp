#pragma once

#include <stdexcept>
#include <string>

namespace slap {

/// Base of all library errors. `kind()` returns the stable error name
/// used in CLI output ("DimError", "ShapeError", ...).
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define SLAP_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                        \
    public:                                                            \
        explicit Name(const std::string& msg) : Error(#Name, msg) {}   \
    }

SLAP_DEFINE_ERROR(NameError);
SLAP_DEFINE_ERROR(DimError);
SLAP_DEFINE_ERROR(IndexError);
SLAP_DEFINE_ERROR(ShapeError);
SLAP_DEFINE_ERROR(ArityError);
SLAP_DEFINE_ERROR(DeadlockError);
SLAP_DEFINE_ERROR(FormatError);
SLAP_DEFINE_ERROR(IoError);
SLAP_DEFINE_ERROR(BudgetError);
SLAP_DEFINE_ERROR(StochasticityError);

#undef SLAP_DEFINE_ERROR

} // namespace slap
