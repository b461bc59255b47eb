#pragma once

// Closed-form solutions of the unforced Morse oscillator.
//
// Bounded orbits (0 < h < D) are parametrised by the angle
//   theta = alpha sqrt(2 (D - h) / m) t,
// so that theta = 0 is the outer turning point q_+ and theta = pi the inner
// turning point q_-. Momentum is negative on (0, pi) and positive on (pi, 2 pi).

#include <numbers>
#include <vector>

#include "morse/model.hpp"

namespace morse {

struct ActionAngle {
    double I = 0.0;
    double theta = 0.0;  // in [0, 2 pi)
    EnergyRegime regime;
};

struct TrajectoryRow {
    double t = 0.0;
    double q = 0.0;
    double p = 0.0;
    double h = 0.0;
};

// Rows in strictly increasing t.
struct TrajectorySample {
    std::vector<TrajectoryRow> rows;
};

// T(h) for 0 <= h < D.
double period(const MorseParams& params, double h);

// Angular frequency 2 pi / T(h) of the bounded orbit.
double orbit_frequency(const MorseParams& params, double h);

// Bounded orbit starting at (q_+, 0) when t = 0.
PhaseState bounded_trajectory(const MorseParams& params, double h, double t);

// Separatrix orbit through (-ln 2 / alpha, 0) at t = 0, outgoing for t > 0.
PhaseState homoclinic_orbit(const MorseParams& params, double t) noexcept;

// Time to travel outward from q_- to q on the h > D level set.
double unbounded_time_of_position(const MorseParams& params, double h, double q);

// Unbounded orbit through (q_-, 0) at t = 0; incoming for t < 0.
PhaseState unbounded_trajectory(const MorseParams& params, double h, double t);

// I(h) = (sqrt(2m) / alpha) (sqrt(D) - sqrt(D - h)), 0 <= h <= D.
double action(const MorseParams& params, double h);

// Supremum of the action over bounded orbits, reached on the separatrix.
double max_action(const MorseParams& params) noexcept;

// Inverse of action(): the energy of the orbit with action I.
double energy_of_action(const MorseParams& params, double I);

ActionAngle angle_of_state(const MorseParams& params, const PhaseState& s);

PhaseState state_of_action_angle(const MorseParams& params, const ActionAngle& aa);

// State on the bounded orbit of energy h at angle theta.
PhaseState state_of_energy_angle(const MorseParams& params, double h, double theta);

// Samples the closed-form trajectory of the regime selected by h at the
// given times: bounded, homoclinic (h within the separatrix band) or
// unbounded. Elliptic energies return the origin.
TrajectorySample sample_closed_form(const MorseParams& params, double h,
                                    const std::vector<double>& times);

inline double wrap_angle(double theta) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(theta, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi || r == 0.0) r = 0.0;  // also folds -0 to +0
    return r;
}

}  // namespace morse
