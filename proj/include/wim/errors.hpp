#pragma once

#include <stdexcept>
#include <string>

namespace wim {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument or malformed input data.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// Vector dimension mismatch between operands or against a provider contract.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

// Zero-norm vector where a direction is required.
class DegenerateInputError : public Error {
public:
    explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

// Bad run configuration (out-of-range zeta, invalid scale, ...).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Remote provider unreachable or returned an unusable payload.
class TransportError : public Error {
public:
    explicit TransportError(const std::string& msg) : Error(msg) {}
};

// Missing key in a scripted transcript.
class LookupError : public Error {
public:
    explicit LookupError(const std::string& msg) : Error(msg) {}
};

// Judge output carried no parseable [[n]] rating span.
class MissingRatingError : public Error {
public:
    explicit MissingRatingError(const std::string& msg) : Error(msg) {}
};

// Judge output carried no [[[...]]] span at all. Distinct from the empty
// [[[]]] span, which parses successfully as "nothing missing".
class MissingWimError : public Error {
public:
    explicit MissingWimError(const std::string& msg) : Error(msg) {}
};

// Parsed rating lies outside the configured scale. Carries the value.
class OutOfScaleError : public Error {
public:
    OutOfScaleError(const std::string& msg, int rating)
        : Error(msg), rating_(rating) {}
    int rating() const { return rating_; }

private:
    int rating_;
};

// Malformed dataset or audit record.
class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(msg) {}
};

}  // namespace wim
