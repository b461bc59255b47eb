#include "morse/model.hpp"

#include <cmath>
#include <string>

#include "morse/errors.hpp"

namespace morse {

namespace {

void require(bool ok, const char* field, const char* rule) {
    if (!ok) throw DomainError(std::string("MorseParams.") + field + " must be " + rule);
}

}  // namespace

void validate(const MorseParams& params) {
    require(std::isfinite(params.D) && params.D > 0.0, "D", "finite and > 0");
    require(std::isfinite(params.alpha) && params.alpha > 0.0, "alpha", "finite and > 0");
    require(std::isfinite(params.m) && params.m > 0.0, "m", "finite and > 0");
    require(std::isfinite(params.epsilon) && params.epsilon >= 0.0, "epsilon", "finite and >= 0");
    if (params.epsilon > 0.0)
        require(std::isfinite(params.omega) && params.omega > 0.0, "omega",
                "finite and > 0 when epsilon > 0");
}

const char* to_string(Regime regime) noexcept {
    switch (regime) {
        case Regime::Elliptic: return "elliptic";
        case Regime::Bounded: return "bounded";
        case Regime::Separatrix: return "separatrix";
        case Regime::Unbounded: return "unbounded";
    }
    return "unknown";
}

double potential(const MorseParams& params, double q) noexcept {
    const double w = -std::expm1(-params.alpha * q);  // 1 - e^{-alpha q}
    return params.D * w * w;
}

double hamiltonian(const MorseParams& params, const PhaseState& s) noexcept {
    return s.p * s.p / (2.0 * params.m) + potential(params, s.q);
}

Jacobian jacobian(const MorseParams& params, double q) noexcept {
    const double u = std::exp(-params.alpha * q);
    const double dforce = -2.0 * params.D * params.alpha * params.alpha * (-u + 2.0 * u * u);
    return {{{0.0, 1.0 / params.m}, {dforce, 0.0}}};
}

std::vector<Equilibrium> equilibria(const MorseParams& params) {
    validate(params);
    if (params.forced())
        throw DomainError("equilibria: only defined for the unforced system (epsilon = 0)");

    // Eigenvalues of [[0, a], [b, 0]] are +-sqrt(a b).
    const Jacobian j = jacobian(params, 0.0);
    const std::complex<double> root = std::sqrt(std::complex<double>(j[0][1] * j[1][0], 0.0));

    std::vector<Equilibrium> out;
    out.push_back({PhaseState{0.0, 0.0}, Stability::Elliptic, {root, -root}});
    out.push_back({PointAtInfinity{}, Stability::Parabolic, {{{0.0, 0.0}, {0.0, 0.0}}}});
    return out;
}

TurningPoints turning_points(const MorseParams& params, double h) {
    validate(params);
    if (!(h > 0.0)) throw DomainError("turning_points: energy h must be > 0");
    const double r = std::sqrt(h / params.D);
    TurningPoints tp;
    tp.q_minus = -std::log1p(r) / params.alpha;
    if (r < 1.0) {
        tp.q_plus = -std::log1p(-r) / params.alpha;
    } else {
        tp.q_plus = 0.0;
        tp.q_plus_infinite = true;
    }
    return tp;
}

EnergyRegime classify_energy(const MorseParams& params, double h) {
    validate(params);
    if (!(h >= 0.0)) throw DomainError("classify_energy: energy below the potential minimum (h < 0)");
    const double band = kRegimeTolerance * params.D;
    Regime tag;
    if (h <= band)
        tag = Regime::Elliptic;
    else if (std::abs(h - params.D) <= band)
        tag = Regime::Separatrix;
    else if (h < params.D)
        tag = Regime::Bounded;
    else
        tag = Regime::Unbounded;
    return {tag, h};
}

}  // namespace morse
