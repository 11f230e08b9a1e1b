#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aircal {

// Base class for every error thrown by this library. Catching aircal::Error
// is enough to distinguish our failures from generic std exceptions.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define AIRCAL_ERROR(Name)                                                   \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

AIRCAL_ERROR(EmptySeries);
AIRCAL_ERROR(EmptyInput);
AIRCAL_ERROR(EmptyTruth);
AIRCAL_ERROR(TooFewValues);
AIRCAL_ERROR(TooFewSamples);
AIRCAL_ERROR(LengthMismatch);
AIRCAL_ERROR(ZeroVariance);
AIRCAL_ERROR(ZeroVarianceTruth);
AIRCAL_ERROR(ZeroVarianceColumn);
AIRCAL_ERROR(ZeroTruthValue);
AIRCAL_ERROR(InvalidWindow);
AIRCAL_ERROR(InvalidConfig);
AIRCAL_ERROR(NonFiniteInput);
AIRCAL_ERROR(NonFiniteLoss);
AIRCAL_ERROR(BadRowWidth);
AIRCAL_ERROR(EmptyFile);
AIRCAL_ERROR(FormatVersionMismatch);
AIRCAL_ERROR(CorruptPayload);

#undef AIRCAL_ERROR

// Parse errors remember the 1-based line of the offending record.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class MalformedLine : public ParseError {
public:
    MalformedLine(const std::string& what, std::size_t line)
        : ParseError("MalformedLine: " + what, line) {}
};

class NonIntegerValue : public ParseError {
public:
    NonIntegerValue(const std::string& what, std::size_t line)
        : ParseError("NonIntegerValue: " + what, line) {}
};

class InvalidValue : public ParseError {
public:
    InvalidValue(const std::string& what, std::size_t line)
        : ParseError("InvalidValue: " + what, line) {}
};

}  // namespace aircal
