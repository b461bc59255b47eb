#pragma once

// Numerical integration of the (optionally forced) Morse vector field.
//
// Backward integration is done by reparametrising s = -(t - t0), so the step
// controller only ever advances a positive variable.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "morse/analytic.hpp"
#include "morse/model.hpp"

namespace morse {

enum class Method { Rk4, Dopri45 };

const char* to_string(Method method) noexcept;

// Axis-aligned admissible region; leaving it is an escape.
struct PhaseBox {
    double q_min = -std::numeric_limits<double>::infinity();
    double q_max = std::numeric_limits<double>::infinity();
    double p_min = -std::numeric_limits<double>::infinity();
    double p_max = std::numeric_limits<double>::infinity();

    bool contains(const PhaseState& s) const noexcept {
        return s.q >= q_min && s.q <= q_max && s.p >= p_min && s.p <= p_max;
    }
};

struct IntegratorConfig {
    Method method = Method::Dopri45;
    double step = 1e-3;         // fixed step for Rk4; ignored by Dopri45
    double rtol = 1e-9;
    double atol = 1e-12;
    std::size_t max_steps = 2'000'000;
    PhaseBox domain;
};

// Throws DomainError on non-positive step/tolerances or max_steps == 0.
void validate(const IntegratorConfig& cfg);

struct StroboscopicOrbit {
    double t_start = 0.0;
    double forcing_period = 0.0;
    std::vector<PhaseState> states;  // states[n] sits at t_start + n * forcing_period
    bool escaped = false;
};

// Integrates from (s0, t0) to t1 (either direction). Rows are returned at the
// requested sample times, which must lie in the closed interval between t0 and
// t1; with no sample times the rows are the two endpoints. Rows are ordered by
// increasing t. Throws EscapeError / StepLimitError.
TrajectorySample integrate_to(const MorseParams& params, const PhaseState& s0, double t0,
                              double t1, const IntegratorConfig& cfg,
                              std::span<const double> sample_times = {});

// Convenience: the state at t1 only.
PhaseState flow(const MorseParams& params, const PhaseState& s0, double t0, double t1,
                const IntegratorConfig& cfg);

// Iterates of the time-(2 pi / omega) map starting at forcing phase t_start.
// Throws EscapeError if the trajectory leaves cfg.domain.
StroboscopicOrbit stroboscopic_map(const MorseParams& params, const PhaseState& s0,
                                   double t_start, std::size_t n_iterates,
                                   const IntegratorConfig& cfg);

// As stroboscopic_map, but an escape ends the orbit early with escaped = true
// instead of throwing.
StroboscopicOrbit stroboscopic_orbit(const MorseParams& params, const PhaseState& s0,
                                     double t_start, std::size_t n_iterates,
                                     const IntegratorConfig& cfg);

// Start of the free-flight region: e^{-alpha q} < 1e-8.
double default_q_ceiling(const MorseParams& params) noexcept;

struct DescriptorValue {
    double value = 0.0;
    bool escaped = false;   // crossed the q ceiling (or became non-finite)
    bool failed = false;    // ran out of steps
};

// Forward plus backward arclength of the trajectory through (s0, t_center)
// over [t_center - tau, t_center + tau]. Escaping trajectories are truncated at
// the crossing and flagged instead of raising. A non-positive or NaN
// q_ceiling selects default_q_ceiling.
DescriptorValue arclength_descriptor(const MorseParams& params, const PhaseState& s0,
                                     double t_center, double tau, const IntegratorConfig& cfg,
                                     double q_ceiling = 0.0);

}  // namespace morse
