#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spraylab {

// Byte range of a sub-expression inside a source text. Lines and columns are 1-based.
struct SourceSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    int line = 1;
    int column = 1;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, unknown families, invalid parameters.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(const std::string& what, SourceSpan span)
        : InputError(what + " at line " + std::to_string(span.line) + ", column " +
                     std::to_string(span.column)),
          span_(span) {}

    const SourceSpan& span() const noexcept { return span_; }

private:
    SourceSpan span_;
};

// sqrt/log/division outside the smooth domain. When raised by the expression
// evaluator the offending sub-expression is attached.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
    DomainError(const std::string& what, SourceSpan span, std::string snippet)
        : Error(what + " in '" + snippet + "' at line " + std::to_string(span.line) +
                ", column " + std::to_string(span.column)),
          span_(span), snippet_(std::move(snippet)), located_(true) {}

    bool located() const noexcept { return located_; }
    const SourceSpan& span() const noexcept { return span_; }
    const std::string& snippet() const noexcept { return snippet_; }

private:
    SourceSpan span_{};
    std::string snippet_;
    bool located_ = false;
};

// A quantity needs more derivatives than the jets it was built from carry.
class OrderError : public Error {
public:
    using Error::Error;
};

// Fundamental tensor (or metric) singular or too ill-conditioned to invert.
class DegenerateMetric : public Error {
public:
    using Error::Error;
};

}  // namespace spraylab
