#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vfl {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative elliptic solve did not reach its tolerance.
/// Carries the relative residual after each iteration.
class SolveError : public Error {
public:
    SolveError(const std::string& what, std::vector<double> residual_history)
        : Error(what), history_(std::move(residual_history)) {}

    const std::vector<double>& residual_history() const { return history_; }
    double final_residual() const { return history_.empty() ? -1.0 : history_.back(); }

private:
    std::vector<double> history_;
};

/// NaN or Inf showed up during time integration. `stage` identifies the
/// Runge-Kutta stage (0-based) or IMEX substep that produced it.
class NumericsError : public Error {
public:
    NumericsError(const std::string& what, int stage) : Error(what), stage_(stage) {}
    int stage() const { return stage_; }

private:
    int stage_;
};

struct ConfigIssue {
    int line;  // 0 when no line applies
    std::string message;
};

/// Config text failed to parse or validate; carries all issues at once.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues)
        : Error(format(issues)), issues_(std::move(issues)) {}

    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    static std::string format(const std::vector<ConfigIssue>& issues) {
        std::string s;
        for (const auto& i : issues) {
            if (!s.empty()) s += "; ";
            if (i.line > 0) s += "line " + std::to_string(i.line) + ": ";
            s += i.message;
        }
        return s.empty() ? std::string("invalid config") : s;
    }

    std::vector<ConfigIssue> issues_;
};

}  // namespace vfl
