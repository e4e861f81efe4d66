#pragma once

#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcqed {

// Bad input: parameters, dimensions, or configuration that violate a
// documented invariant. The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that could not complete (step underflow, broken encoding,
// lost unitarity). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Collects soft warnings (hierarchy violations, resolution limits) so
// callers can put them into a report instead of aborting.
class Diagnostics {
public:
    void warn(std::string message) { warnings_.push_back(std::move(message)); }
    const std::vector<std::string>& warnings() const { return warnings_; }
    bool empty() const { return warnings_.empty(); }

private:
    std::vector<std::string> warnings_;
};

inline void warn(Diagnostics* diag, std::string message) {
    if (diag) {
        diag->warn(std::move(message));
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

} // namespace mcqed
