#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hybcs {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoSolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// base for everything that aborts a time integration
struct IntegrationError : std::runtime_error {
    double t;
    IntegrationError(const std::string& what, double time)
        : std::runtime_error(what), t(time) {}
};

struct BlowupError : IntegrationError {
    std::size_t mode;
    BlowupError(std::size_t m, double time)
        : IntegrationError("non-finite derivative at mode " + std::to_string(m) +
                               " (t = " + std::to_string(time) + ")",
                           time),
          mode(m) {}
};

struct StepUnderflowError : IntegrationError {
    double dt;
    StepUnderflowError(double time, double step)
        : IntegrationError("step size underflow at t = " + std::to_string(time), time),
          dt(step) {}
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace hybcs
