#pragma once

#include <stdexcept>
#include <string>

namespace bohm {

// Bad user input: malformed config, out-of-domain parameters, packet outside
// grid, and similar. CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical guard tripped at run time: boundary leakage, norm drift, node
// encounter, adiabaticity failure. CLI maps this to exit code 3.
struct NumericalGuardError : std::runtime_error {
    explicit NumericalGuardError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem / serialization trouble. CLI maps this to exit code 4.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bohm
