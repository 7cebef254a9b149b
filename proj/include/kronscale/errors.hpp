/**
 * @file errors.hpp
 * @brief Exception hierarchy shared by every kronscale module.
 *
 * Every failure mode named in the public API is a distinct subclass of
 * kronscale::Error so callers (and the CLI) can dispatch on the kind of
 * failure without parsing messages.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace kronscale {

/// Base class of all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define KRONSCALE_DEFINE_ERROR(Name)                                         \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

// algebra
KRONSCALE_DEFINE_ERROR(DivisionByZero);
KRONSCALE_DEFINE_ERROR(FieldMismatch);
KRONSCALE_DEFINE_ERROR(InvalidField);
// circuit
KRONSCALE_DEFINE_ERROR(UnassignedInput);
KRONSCALE_DEFINE_ERROR(DegreeBound);
KRONSCALE_DEFINE_ERROR(SingleOutputRequired);
KRONSCALE_DEFINE_ERROR(InvalidCircuit);
// tensor
KRONSCALE_DEFINE_ERROR(TooLarge);
KRONSCALE_DEFINE_ERROR(GroundOverlap);
KRONSCALE_DEFINE_ERROR(ShapeError);
// steinitz
KRONSCALE_DEFINE_ERROR(TooManyClasses);
KRONSCALE_DEFINE_ERROR(PartitionSizeError);
// scaling
KRONSCALE_DEFINE_ERROR(InternalError);
KRONSCALE_DEFINE_ERROR(ProviderError);
// coeffx
KRONSCALE_DEFINE_ERROR(NotSkew);
// counting
KRONSCALE_DEFINE_ERROR(DivisibilityError);
KRONSCALE_DEFINE_ERROR(ParityError);
// sieving
KRONSCALE_DEFINE_ERROR(FieldTooSmall);
KRONSCALE_DEFINE_ERROR(CharacteristicError);
KRONSCALE_DEFINE_ERROR(BipartitenessError);
// generic argument validation
KRONSCALE_DEFINE_ERROR(InvalidArgument);

#undef KRONSCALE_DEFINE_ERROR

/// Malformed text input; carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("ParseError: line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace kronscale
