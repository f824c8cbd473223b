#pragma once

#include <stdexcept>
#include <string>

namespace dyadic {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define DYADIC_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

DYADIC_DEFINE_ERROR(AncestorOutOfRange);
DYADIC_DEFINE_ERROR(InsufficientShiftDepth);
DYADIC_DEFINE_ERROR(LevelOutOfRange);
DYADIC_DEFINE_ERROR(LayoutMismatch);
DYADIC_DEFINE_ERROR(ShapeMismatch);
DYADIC_DEFINE_ERROR(InvalidExponent);
DYADIC_DEFINE_ERROR(NotAdapted);
DYADIC_DEFINE_ERROR(EntryOutOfRange);
DYADIC_DEFINE_ERROR(DimensionTooLarge);
DYADIC_DEFINE_ERROR(InsufficientPoints);
DYADIC_DEFINE_ERROR(SingularOverlap);
DYADIC_DEFINE_ERROR(QuadratureFailure);
DYADIC_DEFINE_ERROR(ConfigInvalid);
DYADIC_DEFINE_ERROR(FormatError);
DYADIC_DEFINE_ERROR(NotPositiveSemidefinite);

#undef DYADIC_DEFINE_ERROR

} // namespace dyadic
