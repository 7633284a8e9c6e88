#pragma once

#include <stdexcept>
#include <string>

namespace pimorch {

// Malformed input document (not valid JSON, wrong top-level shape).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed document that violates a documented invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unknown enum value, unsupported option or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// No schedule satisfies the constraints. `constraint()` names the binding one.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(std::string constraint, const std::string& what)
        : std::runtime_error(what), constraint_(std::move(constraint)) {}

    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string constraint_;
};

}  // namespace pimorch
