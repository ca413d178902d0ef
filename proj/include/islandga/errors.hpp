#ifndef ISLANDGA_ERRORS_HPP
#define ISLANDGA_ERRORS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace islandga {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or usage (bad parameter values, malformed plans).
/// The message names the offending field or option.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Problems with input data (files, datasets) as opposed to configuration.
class DataError : public Error {
public:
    using Error::Error;
};

/// Structured parse failure; carries the byte offset (binary formats) or
/// the 1-based line number (text formats) where parsing stopped.
class ParseError : public DataError {
public:
    static ParseError at_offset(std::uint64_t offset, const std::string& what) {
        ParseError e("parse error at byte " + std::to_string(offset) + ": " + what);
        e.byte_offset_ = offset;
        return e;
    }
    static ParseError at_line(std::uint64_t line, const std::string& what) {
        ParseError e("parse error at line " + std::to_string(line) + ": " + what);
        e.line_ = line;
        return e;
    }

    std::optional<std::uint64_t> byte_offset() const { return byte_offset_; }
    std::optional<std::uint64_t> line() const { return line_; }

private:
    explicit ParseError(const std::string& what) : DataError(what) {}
    std::optional<std::uint64_t> byte_offset_;
    std::optional<std::uint64_t> line_;
};

/// A documented precondition was violated by the caller or by a
/// user-supplied operator implementation.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Failure inside one pipeline phase; names the phase and the split or
/// partition the failing task was processing.
class PhaseError : public Error {
public:
    PhaseError(std::string phase, std::size_t index, const std::string& detail)
        : Error("phase '" + phase + "' failed on split " + std::to_string(index) + ": " + detail),
          phase_(std::move(phase)),
          index_(index),
          detail_(detail) {}

    PhaseError(std::uint64_t generation, std::string phase, std::size_t index,
               const std::string& detail)
        : Error("generation " + std::to_string(generation) + ", phase '" + phase +
                "', split " + std::to_string(index) + ": " + detail),
          phase_(std::move(phase)),
          index_(index),
          detail_(detail),
          generation_(generation) {}

    const std::string& phase() const { return phase_; }
    std::size_t split_index() const { return index_; }
    const std::string& detail() const { return detail_; }
    std::optional<std::uint64_t> generation() const { return generation_; }

private:
    std::string phase_;
    std::size_t index_ = 0;
    std::string detail_;
    std::optional<std::uint64_t> generation_;
};

} // namespace islandga

#endif // ISLANDGA_ERRORS_HPP
