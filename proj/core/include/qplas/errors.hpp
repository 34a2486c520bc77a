#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qplas {

// Input outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Caller broke a documented precondition on data layout (e.g. unsorted stream).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class DegenerateFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoResonanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string source, std::size_t line, const std::string& what)
        : std::runtime_error(source + ":" + std::to_string(line) + ": " + what),
          source_(std::move(source)),
          line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

}  // namespace qplas
