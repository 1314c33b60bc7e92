#pragma once

#include <stdexcept>
#include <string>

namespace grpx {

// Base for everything the library throws on purpose. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
    const std::string& module() const { return module_; }

private:
    std::string module_;
};

struct DomainError : Error {
    using Error::Error;
};

// Gram matrix not PSD even after jitter, or singular block where an inverse is needed.
struct FactorizationError : Error {
    using Error::Error;
};

// gamma + 1/rho <= 1, a Young pairing that does not exist
struct IncompatibleError : Error {
    using Error::Error;
};

struct BlowUpError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace grpx
