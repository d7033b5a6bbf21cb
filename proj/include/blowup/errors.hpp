#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Invalid scenario or model configuration.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A similarity frame cannot be built from the available data.
struct FrameError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Not enough samples to decide a geometric or fitting question.
struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The trajectory never reached the amplitude cap.
struct NoBlowupDetected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A step produced a non-finite value. Carries the last finite time.
struct BlowupReached : std::runtime_error {
    explicit BlowupReached(double t)
        : std::runtime_error("non-finite state after t = " + std::to_string(t)), last_finite_time(t) {}
    double last_finite_time;
};

} // namespace blowup
