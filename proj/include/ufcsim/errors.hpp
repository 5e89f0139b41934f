#pragma once

#include <stdexcept>
#include <string>

namespace ufcsim {

/// Bad user input: out-of-range parameters, inconsistent config, invalid data.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed file content (CSV/JSON that does not parse as declared).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Network or IO failure while fetching an external resource; safe to retry.
struct FetchError : std::runtime_error {
    explicit FetchError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A dispatch problem has no feasible solution under the given battery limits.
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical solver failed to converge; message carries iterate diagnostics.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ufcsim
