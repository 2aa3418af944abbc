#pragma once

#include <stdexcept>
#include <string>

namespace hallsand {

/// Malformed or inconsistent input data (files, tables, parameters).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure while the sandpile engine or an experiment is running.
class EngineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Power iteration ran out of iterations. Carries the last two estimates so
/// the caller can judge how close it came.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double previous, double last)
        : std::runtime_error(what), previous_(previous), last_(last) {}

    double previous_estimate() const noexcept { return previous_; }
    double last_estimate() const noexcept { return last_; }

private:
    double previous_;
    double last_;
};

}  // namespace hallsand
