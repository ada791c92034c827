#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace dtn {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or unreadable input: missing files, malformed rows, invalid config.
class InputError : public Error {
public:
    explicit InputError(const std::string& what, std::optional<std::size_t> line = std::nullopt)
        : Error(line ? what + " (line " + std::to_string(*line) + ")" : what), line_(line) {}

    std::optional<std::size_t> line() const { return line_; }

private:
    std::optional<std::size_t> line_;
};

/// No feasible plan exists for the request.
class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& what, std::optional<std::size_t> agent = std::nullopt)
        : Error(what), agent_(agent) {}

    std::optional<std::size_t> agent() const { return agent_; }

private:
    std::optional<std::size_t> agent_;
};

/// A result or input record violates a structural invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A search ran past its deadline.
class TimeoutError : public Error {
public:
    using Error::Error;
};

}  // namespace dtn
