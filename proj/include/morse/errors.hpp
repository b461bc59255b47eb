#pragma once

#include <stdexcept>
#include <string>

#include "morse/model.hpp"

namespace morse {

// Input outside an operation's domain (bad parameters, wrong energy regime,
// classically forbidden position).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A quadrature or root search that did not reach its tolerance.
class NumericFailure : public std::runtime_error {
public:
    NumericFailure(const std::string& what, double achieved_estimate)
        : std::runtime_error(what), achieved_estimate_(achieved_estimate) {}
    double achieved_estimate() const noexcept { return achieved_estimate_; }

private:
    double achieved_estimate_;
};

// Integration stopped before reaching its end time. Carries the last valid
// state and its time.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, PhaseState last_state, double last_time)
        : std::runtime_error(what), last_state_(last_state), last_time_(last_time) {}
    const PhaseState& last_state() const noexcept { return last_state_; }
    double last_time() const noexcept { return last_time_; }

private:
    PhaseState last_state_;
    double last_time_;
};

// The state became non-finite or left the configured domain box.
class EscapeError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

// The step budget (IntegratorConfig::max_steps) ran out.
class StepLimitError : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
};

}  // namespace morse
