#include "morse/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "morse/errors.hpp"

namespace morse {

namespace {

constexpr double kPi = std::numbers::pi;

// Boundary slack for the arcsin argument of the angle formula.
constexpr double kArcsinSlack = 1e-12;

EnergyRegime require_bounded(const MorseParams& params, double h, const char* op) {
    if (!std::isfinite(h)) throw DomainError(std::string(op) + ": energy must be finite");
    const EnergyRegime regime = classify_energy(params, h);
    if (regime.tag != Regime::Bounded)
        throw DomainError(std::string(op) + ": requires a bounded orbit (0 < h < D), got " +
                          to_string(regime.tag) + " regime");
    return regime;
}

void require_unbounded(const MorseParams& params, double h, const char* op) {
    if (!std::isfinite(h)) throw DomainError(std::string(op) + ": energy must be finite");
    const EnergyRegime regime = classify_energy(params, h);
    if (regime.tag != Regime::Unbounded)
        throw DomainError(std::string(op) + ": requires an unbounded orbit (h > D), got " +
                          to_string(regime.tag) + " regime");
}

// log cosh(x) without overflow.
double log_cosh(double x) noexcept {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double sech(double x) noexcept {
    const double e = std::exp(-std::abs(x));
    return 2.0 * e / (1.0 + e * e);
}

}  // namespace

double period(const MorseParams& params, double h) {
    validate(params);
    if (!(h >= 0.0)) throw DomainError("period: energy below the potential minimum (h < 0)");
    if (!(h < params.D)) throw DomainError("period: no finite period for h >= D");
    return kPi * std::sqrt(2.0 * params.m) / (params.alpha * std::sqrt(params.D - h));
}

double orbit_frequency(const MorseParams& params, double h) {
    validate(params);
    if (!(h >= 0.0 && h < params.D))
        throw DomainError("orbit_frequency: requires 0 <= h < D");
    return params.alpha * std::sqrt(2.0 * (params.D - h) / params.m);
}

PhaseState state_of_energy_angle(const MorseParams& params, double h, double theta) {
    require_bounded(params, h, "state_of_energy_angle");
    const double D = params.D;
    const double root_dh = std::sqrt(D * h);
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double numer = root_dh * c + D;  // (D - h) e^{alpha q}
    PhaseState out;
    out.q = std::log(numer / (D - h)) / params.alpha;
    out.p = -std::sqrt(2.0 * params.m * (D - h)) * root_dh * s / numer;
    return out;
}

PhaseState bounded_trajectory(const MorseParams& params, double h, double t) {
    require_bounded(params, h, "bounded_trajectory");
    return state_of_energy_angle(params, h, orbit_frequency(params, h) * t);
}

PhaseState homoclinic_orbit(const MorseParams& params, double t) noexcept {
    const double k = 2.0 * params.D * params.alpha * params.alpha / params.m;
    PhaseState out;
    out.q = std::log((1.0 + k * t * t) / 2.0) / params.alpha;
    out.p = 4.0 * params.m * params.D * params.alpha * t /
            (2.0 * params.D * params.alpha * params.alpha * t * t + params.m);
    return out;
}

double unbounded_time_of_position(const MorseParams& params, double h, double q) {
    require_unbounded(params, h, "unbounded_time_of_position");
    const TurningPoints tp = turning_points(params, h);
    if (!(q >= tp.q_minus))
        throw DomainError("unbounded_time_of_position: q below the turning point q_- is forbidden");
    const double D = params.D;
    const double u = std::exp(-params.alpha * q);
    // h - D (1 - u)^2 factored so the root at q_- is computed without cancellation.
    const double rh = std::sqrt(h);
    const double rd = std::sqrt(D);
    double vanishing = rh + rd - rd * u;
    if (std::abs(vanishing) <= 8.0 * std::numeric_limits<double>::epsilon() * (rh + rd)) vanishing = 0.0;
    const double radicand = std::max(0.0, (h - D) * (rh - rd + rd * u) * vanishing);
    const double beta = params.alpha * std::sqrt(2.0 * (h - D) / params.m);
    // log of (h - D + D u + sqrt(...)) / (sqrt(hD) u), with the 1/u folded into alpha q.
    const double log_arg = std::log(h - D + D * u + std::sqrt(radicand)) -
                           0.5 * std::log(h * D) + params.alpha * q;
    return std::max(0.0, log_arg) / beta;
}

PhaseState unbounded_trajectory(const MorseParams& params, double h, double t) {
    require_unbounded(params, h, "unbounded_trajectory");
    const double D = params.D;
    const double beta = params.alpha * std::sqrt(2.0 * (h - D) / params.m);
    const double x = beta * t;
    const double root_hd = std::sqrt(h * D);
    // sqrt(hD) cosh(x) - D, divided through by cosh(x).
    const double reduced = root_hd - D * sech(x);
    PhaseState out;
    out.q = (log_cosh(x) + std::log(reduced) - std::log(h - D)) / params.alpha;
    out.p = std::sqrt(2.0 * params.m * (h - D)) * root_hd * std::tanh(x) / reduced;
    return out;
}

double action(const MorseParams& params, double h) {
    validate(params);
    if (!(h >= 0.0 && h <= params.D)) throw DomainError("action: requires 0 <= h <= D");
    // sqrt(D) - sqrt(D - h), rewritten without cancellation.
    const double gap = h / (std::sqrt(params.D) + std::sqrt(params.D - h));
    return std::sqrt(2.0 * params.m) / params.alpha * gap;
}

double max_action(const MorseParams& params) noexcept {
    return std::sqrt(2.0 * params.m * params.D) / params.alpha;
}

double energy_of_action(const MorseParams& params, double I) {
    validate(params);
    if (!(I >= 0.0 && I <= max_action(params)))
        throw DomainError("energy_of_action: requires 0 <= I <= I_max");
    const double w = params.alpha * I / std::sqrt(2.0 * params.m);
    return std::min(params.D, w * (2.0 * std::sqrt(params.D) - w));
}

ActionAngle angle_of_state(const MorseParams& params, const PhaseState& s) {
    validate(params);
    const double h = hamiltonian(params, s);
    const EnergyRegime regime = require_bounded(params, h, "angle_of_state");
    const double D = params.D;
    const double root_dh = std::sqrt(D * h);
    const double e = std::exp(params.alpha * s.q);

    // Argument of the arcsin in the closed-form angle; equals -cos(theta).
    double x = ((h - D) * e + D) / root_dh;
    if (std::abs(x) > 1.0 + kArcsinSlack)
        throw DomainError("angle_of_state: arcsin argument outside [-1, 1]");
    x = std::clamp(x, -1.0, 1.0);

    // The arcsin form alone loses the momentum sign and is ill-conditioned at
    // the turning points; the matching sine component resolves both.
    const double sin_theta = -s.p * e * std::sqrt(D - h) / (std::sqrt(2.0 * params.m) * root_dh);
    const double theta = wrap_angle(std::atan2(sin_theta, -x));
    return {action(params, h), theta, regime};
}

PhaseState state_of_action_angle(const MorseParams& params, const ActionAngle& aa) {
    validate(params);
    if (!(aa.I > 0.0 && aa.I < max_action(params)))
        throw DomainError("state_of_action_angle: requires 0 < I < I_max");
    if (!std::isfinite(aa.theta)) throw DomainError("state_of_action_angle: angle must be finite");
    const double h = energy_of_action(params, aa.I);
    return state_of_energy_angle(params, h, aa.theta);
}

TrajectorySample sample_closed_form(const MorseParams& params, double h,
                                    const std::vector<double>& times) {
    const EnergyRegime regime = classify_energy(params, h);
    TrajectorySample out;
    out.rows.reserve(times.size());
    for (double t : times) {
        PhaseState s;
        switch (regime.tag) {
            case Regime::Elliptic: s = {0.0, 0.0}; break;
            case Regime::Bounded: s = bounded_trajectory(params, h, t); break;
            case Regime::Separatrix: s = homoclinic_orbit(params, t); break;
            case Regime::Unbounded: s = unbounded_trajectory(params, h, t); break;
        }
        out.rows.push_back({t, s.q, s.p, hamiltonian(params, s)});
    }
    return out;
}

}  // namespace morse
