#pragma once

#include <stdexcept>
#include <string>

namespace certqr {

// Invalid call-site input: bad entity index, |Q| < 2, unknown algorithm name, ...
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed input data (graph files, index files, workload files).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Loading a graph yielded no arcs after filtering. Carries the load counters so
// callers can still report what was filtered out.
class EmptyGraphError : public std::runtime_error {
public:
    EmptyGraphError(const std::string& what, std::uint64_t skipped)
        : std::runtime_error(what), skipped_(skipped) {}
    std::uint64_t skipped() const { return skipped_; }

private:
    std::uint64_t skipped_;
};

// A persisted distance index does not match the graph it is loaded against.
class StaleIndexError : public std::runtime_error {
public:
    explicit StaleIndexError(const std::string& what) : std::runtime_error(what) {}
};

// Brute-force enumeration hit its step cap before reaching a verdict.
class InconclusiveError : public std::runtime_error {
public:
    explicit InconclusiveError(const std::string& what) : std::runtime_error(what) {}
};

// A wall-clock deadline expired mid-computation.
class TimeoutError : public std::runtime_error {
public:
    explicit TimeoutError(const std::string& what) : std::runtime_error(what) {}
};

// Workload generation could not satisfy its constraints.
class GenerationError : public std::runtime_error {
public:
    explicit GenerationError(const std::string& what) : std::runtime_error(what) {}
};

// A structural guarantee the algorithms rely on was violated; indicates a bug
// in this library, not a user error.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

} // namespace certqr
