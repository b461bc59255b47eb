#pragma once

// Homoclinic Melnikov function of the periodically forced Morse oscillator.
//
// Two routes are kept side by side: the closed form as usually printed,
//   M(t0, phi0) = -eps (2m / alpha) sin(omega t0 + phi0) exp(-omega sqrt(m / (2 D alpha^2))),
// and direct quadrature of the defining integral (oracle::melnikov_quadrature).
// They share the sine and exponential dependence but differ in the constant
// prefactor; melnikov_scan reports the fitted ratio.

#include <optional>
#include <string>
#include <vector>

#include "morse/model.hpp"
#include "morse/oracle.hpp"

namespace morse {

// sqrt(m / (2 D alpha^2)): the decay rate of the Melnikov amplitude in omega.
double melnikov_decay_rate(const MorseParams& params) noexcept;

double melnikov_analytic(const MorseParams& params, double t0, double phi0);

// dM/dt0 of the closed form.
double melnikov_analytic_derivative(const MorseParams& params, double t0, double phi0);

struct MelnikovZero {
    double t0 = 0.0;
    int derivative_sign = 0;  // sign of dM/dt0 at the zero
    bool simple = false;
};

// All zeros t0 = (k pi - phi0) / omega inside [t_begin, t_end], ascending.
std::vector<MelnikovZero> melnikov_zeros(const MorseParams& params, double phi0,
                                         double t_begin, double t_end);

struct MelnikovRow {
    double t0 = 0.0;
    double phi0 = 0.0;
    double m_analytic = 0.0;
    double m_numeric = 0.0;
    double tail_bound = 0.0;     // full error estimate of m_numeric
    std::optional<std::string> error;  // oracle failure; m_numeric is NaN
};

struct MelnikovScan {
    MorseParams params;
    std::vector<MelnikovRow> rows;
    // Least-squares constant r minimising sum (M_analytic - r M_numeric)^2 over
    // rows with |M_numeric| > 10 tail_bound, and the largest relative deviation
    // of a per-row ratio from r. NaN when no row qualifies.
    double ratio = 0.0;
    double ratio_spread = 0.0;
    std::size_t ratio_rows = 0;
};

// Rows are evaluated concurrently and assembled in grid order.
MelnikovScan melnikov_scan(const MorseParams& params, const std::vector<double>& t0_grid,
                           double phi0, const oracle::MelnikovOptions& oracle_cfg = {});

// Zeros of the numeric Melnikov function in [t_begin, t_end], located by
// sign changes on a grid of `samples_per_half_period` points per half forcing
// period and refined by bracketing to `tolerance` in t0.
std::vector<double> melnikov_numeric_zeros(const MorseParams& params, double phi0,
                                           double t_begin, double t_end, double tolerance,
                                           const oracle::MelnikovOptions& oracle_cfg = {},
                                           int samples_per_half_period = 4);

}  // namespace morse
