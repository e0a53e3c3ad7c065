#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcfm {

/// Base of every error raised by the library. `kind()` is a stable short tag
/// used by the CLI when it prints machine-readable error summaries.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// Input outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain"; }
};

/// Series or quadrature did not reach the requested accuracy.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, double estimate, double error_bound,
                    std::size_t work)
        : Error(what), estimate_(estimate), error_bound_(error_bound), work_(work) {}
    const char* kind() const noexcept override { return "evaluation"; }

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }
    /// Terms summed or integrand evaluations spent.
    std::size_t work() const noexcept { return work_; }

private:
    double estimate_;
    double error_bound_;
    std::size_t work_;
};

/// Raman boundary-value solve failed (non-convergence or negative power).
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    const char* kind() const noexcept override { return "solver"; }
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ConditioningError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "conditioning"; }
};

class UnsupportedDegreeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "unsupported_degree"; }
};

/// Schema or unit problem in a scenario file. `path()` is a JSON-pointer-like
/// location of the offending field.
class ConfigError : public Error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : Error(path + ": " + what), path_(path) {}
    const char* kind() const noexcept override { return "config"; }
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// The oracle ran out of its evaluation budget. Carries the islands that did
/// finish, as "m,k,n" labels.
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, std::vector<std::string> completed)
        : Error(what), completed_(std::move(completed)) {}
    const char* kind() const noexcept override { return "budget"; }
    const std::vector<std::string>& completed() const noexcept { return completed_; }

private:
    std::vector<std::string> completed_;
};

}  // namespace pcfm
