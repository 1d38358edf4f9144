#pragma once

#include <stdexcept>
#include <string>

namespace stpdft {

enum class ErrorKind {
    invalid_argument,
    shape,
    size_budget,
    non_factorizable,
    degenerate_row,
    non_finite,
};

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::invalid_argument, what) {}
};

/// Operand shapes do not fit together.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};

/// An intermediate size would not fit the element-count budget.
class SizeBudgetError : public Error {
public:
    explicit SizeBudgetError(const std::string& what) : Error(ErrorKind::size_budget, what) {}
};

class NonFactorizable : public Error {
public:
    explicit NonFactorizable(const std::string& what) : Error(ErrorKind::non_factorizable, what) {}
};

/// A softmax row whose entries are all masked.
class DegenerateRow : public Error {
public:
    explicit DegenerateRow(const std::string& what) : Error(ErrorKind::degenerate_row, what) {}
};

class NonFiniteError : public Error {
public:
    explicit NonFiniteError(const std::string& what) : Error(ErrorKind::non_finite, what) {}
};

/// Rethrows `e` as the same concrete kind with `context` prepended to the message.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
    const std::string msg = context + ": " + e.what();
    switch (e.kind()) {
        case ErrorKind::invalid_argument: throw InvalidArgument(msg);
        case ErrorKind::shape: throw ShapeError(msg);
        case ErrorKind::size_budget: throw SizeBudgetError(msg);
        case ErrorKind::non_factorizable: throw NonFactorizable(msg);
        case ErrorKind::degenerate_row: throw DegenerateRow(msg);
        case ErrorKind::non_finite: throw NonFiniteError(msg);
    }
    throw Error(e.kind(), msg);
}

}  // namespace stpdft
