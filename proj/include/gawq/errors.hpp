// errors.hpp: exception types shared by the gawq modules.

#pragma once

#include <stdexcept>
#include <string>

namespace gawq {

// Invalid or inconsistent chain configuration (bad rates, non-coprime beta, ...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// (Delta*I - H) is too close to singular for a trustworthy direct solve.
class IllConditioned : public std::runtime_error {
public:
    IllConditioned(const std::string& what, double condition)
        : std::runtime_error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

// Two connection points share a phase; the real-space oracle is undefined there.
class CoincidentPoints : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularSystem : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CountMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotNormalized : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace gawq
