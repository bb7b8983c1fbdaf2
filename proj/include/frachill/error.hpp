#pragma once

#include <stdexcept>
#include <string>

namespace frachill {

/// Invalid user input: bad grid, unknown config key, inadmissible data.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
    ConfigError(const std::string& what, int line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    /// Source line for config-file errors, 0 otherwise.
    int line() const noexcept { return line_; }

private:
    int line_ = 0;
};

/// An iterative solver (root finder, CG, Newton, outer fixed point) did not converge.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A harness check was evaluated and failed.
class CheckFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace frachill
