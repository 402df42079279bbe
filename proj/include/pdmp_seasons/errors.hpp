#pragma once

#include <stdexcept>
#include <string>

namespace pdmp_seasons {

// Base for everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class StepFailure : public Error {
public:
    using Error::Error;
};

class BoundsViolation : public Error {
public:
    using Error::Error;
};

class RateBoundViolation : public Error {
public:
    using Error::Error;
};

class NotAtBoundary : public Error {
public:
    using Error::Error;
};

class EmptyChain : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

/// Runtime failure inside the event loop, annotated with where it happened.
class SimulationError : public Error {
public:
    SimulationError(const std::string& what, double time, std::size_t event_index)
        : Error(what + " (t=" + std::to_string(time) + ", event #" +
                std::to_string(event_index) + ")"),
          time_(time),
          event_index_(event_index)
    {
    }

    double time() const noexcept { return time_; }
    std::size_t event_index() const noexcept { return event_index_; }

private:
    double time_;
    std::size_t event_index_;
};

} // namespace pdmp_seasons
