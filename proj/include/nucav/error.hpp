#pragma once

#include <stdexcept>
#include <string>

namespace nucav {

// Base for every failure raised by the library. kind() is a short
// machine-readable tag used by the CLI's single-line error output.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, int line, const std::string& what)
        : Error("parse", source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

struct InvariantError : Error {
    explicit InvariantError(const std::string& what) : Error("invariant", what) {}
};

struct LookupError : Error {
    explicit LookupError(const std::string& what) : Error("lookup", what) {}
};

struct MissingDataError : Error {
    explicit MissingDataError(const std::string& what) : Error("missing-data", what) {}
};

// Precondition on an argument violated.
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error("domain", what) {}
};

struct SingularError : Error {
    explicit SingularError(const std::string& what) : Error("singular", what) {}
};

struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string& what) : Error("convergence", what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error("io", what) {}
};

}  // namespace nucav
