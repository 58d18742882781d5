#pragma once

#include <stdexcept>
#include <string>

namespace wnav {

/// Bad caller input: malformed documents, invalid requests, out-of-range cells.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed JSON. The message carries line and column of the failure.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, int line, int column)
        : InputError(what), line_(line), column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

/// Cell coordinates that do not sit on a consistent rectangular lattice.
class GeometryError : public InputError {
public:
    using InputError::InputError;
};

class EmptyMapError : public InputError {
public:
    using InputError::InputError;
};

/// Cached or serialized artifact written by an incompatible format version.
class VersionError : public InputError {
public:
    using InputError::InputError;
};

/// Model reply without a usable JSON block, or with points that cannot be snapped.
class ReplyError : public InputError {
public:
    using InputError::InputError;
};

/// Model endpoint unreachable, timed out, or returned a non-success status.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wnav
