#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kirflow {

// Argument outside the mathematical domain of a relation (S <= 0, theta out of range, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Invalid parameter set or scenario setup detected at construction time.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Local Gram matrix too ill-conditioned for the working precision.
class IllConditionedError : public std::runtime_error {
public:
    IllConditionedError(std::size_t node, double condition, const std::string& what)
        : std::runtime_error(what), node_(node), condition_(condition) {}
    std::size_t node() const noexcept { return node_; }
    double condition() const noexcept { return condition_; }

private:
    std::size_t node_;
    double condition_;
};

// Picard loop hit its iteration cap.
class NonconvergenceError : public std::runtime_error {
public:
    NonconvergenceError(long step, double time, double delta, const std::string& what)
        : std::runtime_error(what), step_(step), time_(time), delta_(delta) {}
    long step() const noexcept { return step_; }
    double time() const noexcept { return time_; }
    double delta() const noexcept { return delta_; }

private:
    long step_;
    double time_;
    double delta_;
};

// Sparse factorization or iterative solve failed.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scenario / table file problems; message already carries file:line:col.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& file, int line, int column, const std::string& msg)
        : std::runtime_error(file + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
          line_(line), column_(column) {}
    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kirflow
