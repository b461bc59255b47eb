#pragma once

// Independent numerical evaluation of the integrals that the analytic module
// solves in closed form. Used as ground truth by the test suites.

#include <cstddef>

#include "morse/model.hpp"

namespace morse::oracle {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t evaluations = 0;
};

struct QuadratureOptions {
    double relative_tolerance = 1e-10;
    unsigned max_depth = 20;
};

// T(h) = sqrt(2m) * integral of dq / sqrt(h - V(q)) between the turning points.
QuadratureResult period_quadrature(const MorseParams& params, double h,
                                   const QuadratureOptions& opts = {});

// I(h) = (sqrt(2m) / pi) * integral of sqrt(h - V(q)) dq between the turning points.
QuadratureResult action_quadrature(const MorseParams& params, double h,
                                   const QuadratureOptions& opts = {});

// Travel time sqrt(m/2) * integral of dq / sqrt(h - V) from q_- to q, for h > D.
QuadratureResult time_of_flight_quadrature(const MorseParams& params, double h, double q,
                                           const QuadratureOptions& opts = {});

// Angle 2 pi t / T accumulated from q_+ inward to q along the p <= 0 half of a
// bounded orbit, with T itself from period_quadrature.
QuadratureResult angle_quadrature(const MorseParams& params, double h, double q,
                                  const QuadratureOptions& opts = {});

struct MelnikovOptions {
    double relative_tolerance = 1e-10;
    unsigned max_depth = 15;
    // Truncation of the improper integral; 0 selects 1e4 / omega.
    double t_cut = 0.0;
};

// Integral over [-T_cut, T_cut] of (p0(t)/m) eps cos(omega t + omega t0 + phi0)
// along the homoclinic orbit, plus the boundary terms of one integration by
// parts on each tail. error_estimate = panel error + explicit tail remainder bound.
QuadratureResult melnikov_quadrature(const MorseParams& params, double t0, double phi0,
                                     const MelnikovOptions& opts = {});

// The tail remainder bound alone, for a given truncation.
double melnikov_tail_bound(const MorseParams& params, double t_cut);

}  // namespace morse::oracle
