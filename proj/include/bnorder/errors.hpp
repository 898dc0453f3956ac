#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bnorder {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class OrderViolation : public Error {
public:
    OrderViolation(std::size_t child, std::size_t parent)
        : Error("parent " + std::to_string(parent) + " does not precede child " +
                std::to_string(child) + " in the node ordering"),
          child_(child), parent_(parent) {}
    std::size_t child() const { return child_; }
    std::size_t parent() const { return parent_; }

private:
    std::size_t child_;
    std::size_t parent_;
};

class UnknownVariable : public Error {
public:
    explicit UnknownVariable(std::size_t v)
        : Error("unknown variable index " + std::to_string(v)), variable_(v) {}
    std::size_t variable() const { return variable_; }

private:
    std::size_t variable_;
};

class OutOfRange : public Error {
public:
    using Error::Error;
};

class UndefinedCptRow : public Error {
public:
    UndefinedCptRow(std::size_t child, std::size_t row)
        : Error("CPT row " + std::to_string(row) + " of variable " + std::to_string(child) +
                " is undefined but reachable"),
          child_(child), row_(row) {}
    std::size_t child() const { return child_; }
    std::size_t row() const { return row_; }

private:
    std::size_t child_;
    std::size_t row_;
};

class StateSpaceTooLarge : public Error {
public:
    using Error::Error;
};

class ScopeOverlap : public Error {
public:
    using Error::Error;
};

class NotNested : public Error {
public:
    using Error::Error;
};

class RuleInputMismatch : public Error {
public:
    using Error::Error;
};

class TooManyPredecessors : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

// Raised when a summation produces a negative entropy beyond round-off.
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

}  // namespace bnorder
