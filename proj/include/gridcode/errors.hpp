#pragma once

#include <stdexcept>
#include <string>

namespace gridcode {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Syntax error in a constraint (.fct) or array (.g2d) file; carries the
/// 1-based line number of the offending line.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

class AlphabetOutOfRangeError : public ParseError {
public:
    AlphabetOutOfRangeError(int line, int q)
        : ParseError(line, "alphabet size " + std::to_string(q) + " out of range [2,16]") {}
};

/// An operation would enumerate more states than the configured budget allows.
/// `required` is the decimal enumeration count that would have been needed.
class BudgetExceededError : public Error {
public:
    BudgetExceededError(std::string required, const std::string& what)
        : Error(what + " (required enumerations: " + required + ")"),
          required_(std::move(required)) {}
    const std::string& required() const noexcept { return required_; }

private:
    std::string required_;
};

/// The alphabet is too large for an exhaustive 3x3-window enumeration.
class AlphabetTooLargeError : public Error {
public:
    using Error::Error;
};

class NoEdgesError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public Error {
public:
    using Error::Error;
};

/// rate_exact on a graph whose best core has min out-degree 0.
class DegenerateCoreError : public Error {
public:
    using Error::Error;
};

class EmptyCoreError : public Error {
public:
    using Error::Error;
};

class MessageOutOfRangeError : public Error {
public:
    MessageOutOfRangeError(std::size_t index, const std::string& what)
        : Error(what), index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Decoder-side failures. The kind distinguishes a column pair that is not a
/// code state, a successor column outside the label map, and a constraint
/// hash that does not match the codebook.
class CodecError : public Error {
public:
    enum class Kind { UnknownState, UnknownTransition, HashMismatch };

    CodecError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

} // namespace gridcode
