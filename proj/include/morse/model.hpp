#pragma once

// Morse oscillator model: H(q, p) = p^2/(2m) + D (1 - e^{-alpha q})^2,
// optionally forced by epsilon cos(omega t) in the momentum equation.

#include <array>
#include <cmath>
#include <complex>
#include <variant>
#include <vector>

namespace morse {

struct MorseParams {
    double D = 10.0;        // well depth (dissociation energy)
    double alpha = 1.0;     // inverse width
    double m = 8.0;         // mass
    double epsilon = 0.0;   // forcing amplitude, 0 = unperturbed
    double omega = 0.0;     // forcing angular frequency

    bool forced() const noexcept { return epsilon > 0.0; }
};

// Throws DomainError naming the offending field.
void validate(const MorseParams& params);

struct PhaseState {
    double q = 0.0;
    double p = 0.0;

    friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

struct PhaseVelocity {
    double dq = 0.0;
    double dp = 0.0;
};

enum class Regime { Elliptic, Bounded, Separatrix, Unbounded };

const char* to_string(Regime regime) noexcept;

struct EnergyRegime {
    Regime tag = Regime::Elliptic;
    double h = 0.0;
};

// Relative width (in units of D) of the bands around h = 0 and h = D that
// classify as Elliptic and Separatrix.
inline constexpr double kRegimeTolerance = 1e-12;

// The parabolic fixed point (q, p) = (+inf, 0), kept out of PhaseState.
struct PointAtInfinity {
    friend bool operator==(const PointAtInfinity&, const PointAtInfinity&) = default;
};

enum class Stability { Elliptic, Parabolic };

struct Equilibrium {
    std::variant<PhaseState, PointAtInfinity> location;
    Stability classification = Stability::Elliptic;
    std::array<std::complex<double>, 2> eigenvalues{};
};

struct TurningPoints {
    double q_minus = 0.0;
    double q_plus = 0.0;        // meaningful only when bounded
    bool q_plus_infinite = false;
};

using Jacobian = std::array<std::array<double, 2>, 2>;

double potential(const MorseParams& params, double q) noexcept;

double hamiltonian(const MorseParams& params, const PhaseState& s) noexcept;

// Right-hand side of Hamilton's equations; the forcing term is added only
// when epsilon > 0, so the unperturbed field ignores t entirely.
inline PhaseVelocity vector_field(const MorseParams& params, const PhaseState& s,
                                  double t) noexcept {
    const double u = std::exp(-params.alpha * s.q);
    double force = -2.0 * params.D * params.alpha * (u - u * u);
    if (params.epsilon > 0.0) force += params.epsilon * std::cos(params.omega * t);
    return {s.p / params.m, force};
}

// Linearisation of the unperturbed field at position q.
Jacobian jacobian(const MorseParams& params, double q) noexcept;

// Elliptic origin and parabolic point at infinity. Unforced systems only.
std::vector<Equilibrium> equilibria(const MorseParams& params);

// Requires h > 0. q_plus is infinite for h >= D.
TurningPoints turning_points(const MorseParams& params, double h);

// Requires h >= 0.
EnergyRegime classify_energy(const MorseParams& params, double h);

}  // namespace morse
