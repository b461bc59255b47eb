#include "morse/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "morse/analytic.hpp"
#include "morse/errors.hpp"

namespace morse::oracle {

namespace {

constexpr double kPi = std::numbers::pi;
using Kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Adaptive {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

// One 31-point Kronrod node on [a, b]. Boost is only asked for the fixed rule
// on [-1, 1]: its own recursion (1.74) leaves the error of each sub-interval
// unscaled by the interval length.
template <class F>
Adaptive kronrod_node(F& f, double a, double b) {
    const double mean = 0.5 * (a + b);
    const double scale = 0.5 * (b - a);
    auto mapped = [&](double x) { return f(mean + scale * x); };
    double error = 0.0;
    double l1 = 0.0;
    const double value = Kronrod::integrate(mapped, -1.0, 1.0, 0, 0.0, &error, &l1);
    return {scale * value, std::abs(scale) * error, std::abs(scale) * l1};
}

// Bisects until a sub-interval meets the relative tolerance or its share of
// the absolute budget set by the first estimate.
template <class F>
Adaptive bisect(F& f, double a, double b, const Adaptive& node, double tol, double budget,
                unsigned depth) {
    if (depth == 0 || node.error <= std::max(tol * std::abs(node.value), budget)) return node;
    const double mid = 0.5 * (a + b);
    const Adaptive left = bisect(f, a, mid, kronrod_node(f, a, mid), tol, budget / 2, depth - 1);
    const Adaptive right = bisect(f, mid, b, kronrod_node(f, mid, b), tol, budget / 2, depth - 1);
    return {left.value + right.value, left.error + right.error, left.l1 + right.l1};
}

template <class F>
Adaptive adaptive_kronrod(F& f, double a, double b, double tol, unsigned max_depth) {
    const Adaptive first = kronrod_node(f, a, b);
    return bisect(f, a, b, first, tol, tol * std::abs(first.value), max_depth);
}

// Adaptive Gauss-Kronrod on [a, b]; counts integrand calls.
template <class F>
QuadratureResult kronrod(F&& f, double a, double b, const QuadratureOptions& opts) {
    std::size_t calls = 0;
    auto counted = [&](double x) {
        ++calls;
        return f(x);
    };
    const Adaptive r = adaptive_kronrod(counted, a, b, opts.relative_tolerance, opts.max_depth);
    return {r.value, r.error, calls};
}

// Same, for integrands peaked at a with width ~ sqrt(2 gap). Panels growing
// geometrically from a resolve the peak when gap is small.
template <class F>
QuadratureResult kronrod_clustered(F&& f, double a, double b, double gap,
                                   const QuadratureOptions& opts) {
    if (gap > 0.05) return kronrod(f, a, b, opts);
    QuadratureResult total;
    double lo = a;
    double edge = std::sqrt(2.0 * gap);
    while (lo < b) {
        const double hi = std::min(b, a + edge);
        const QuadratureResult part = kronrod(f, lo, hi, opts);
        total.value += part.value;
        total.error_estimate += part.error_estimate;
        total.evaluations += part.evaluations;
        lo = hi;
        edge *= 4.0;
    }
    return total;
}

void require_converged(const QuadratureResult& r, double rel_tol, const char* op) {
    const double allowed = rel_tol * std::abs(r.value) + 1e3 * std::numeric_limits<double>::min();
    if (!std::isfinite(r.value) || !(r.error_estimate <= allowed))
        throw NumericFailure(std::string(op) + ": quadrature did not converge", r.error_estimate);
}

void require_bounded_energy(const MorseParams& params, double h, const char* op) {
    validate(params);
    if (!(h > 0.0 && h < params.D))
        throw DomainError(std::string(op) + ": requires 0 < h < D");
}

// With u = e^{-alpha q} the radicand h - V becomes D (r^2 - (1 - u)^2), whose
// roots u = 1 -+ r are the turning points. Writing u = 1 + r sin(phi) maps
// [q_+, q_-] onto phi in [-pi/2, pi/2] and cancels the inverse square root:
//   dq / sqrt(h - V) = -dphi / (alpha sqrt(D) (1 + r sin phi)).
// For bounded orbits phi = psi - pi/2 with psi in [0, pi], and
//   1 + r sin(phi) = (1 - r) + 2 r sin^2(psi / 2)
// avoids the cancellation near the outer turning point as r -> 1.
struct BoundedKernel {
    double r;
    double gap;  // 1 - r, computed from D - h

    BoundedKernel(const MorseParams& params, double h)
        : r(std::sqrt(h / params.D)), gap((params.D - h) / params.D / (1.0 + std::sqrt(h / params.D))) {}

    double denominator(double psi) const {
        const double s = std::sin(0.5 * psi);
        return gap + 2.0 * r * s * s;
    }
};

}  // namespace

QuadratureResult period_quadrature(const MorseParams& params, double h,
                                   const QuadratureOptions& opts) {
    require_bounded_energy(params, h, "period_quadrature");
    const BoundedKernel k(params, h);
    auto integrand = [&k](double psi) { return 1.0 / k.denominator(psi); };
    QuadratureResult res = kronrod_clustered(integrand, 0.0, kPi, k.gap, opts);
    const double scale = std::sqrt(2.0 * params.m) / (params.alpha * std::sqrt(params.D));
    res.value *= scale;
    res.error_estimate *= scale;
    require_converged(res, opts.relative_tolerance, "period_quadrature");
    return res;
}

QuadratureResult action_quadrature(const MorseParams& params, double h,
                                   const QuadratureOptions& opts) {
    require_bounded_energy(params, h, "action_quadrature");
    // sqrt(h - V) dq = sqrt(D) r^2 cos^2(phi) dphi / (alpha (1 + r sin phi)).
    const BoundedKernel k(params, h);
    const double r = k.r;
    auto integrand = [&k](double psi) {
        const double c = std::sin(psi);
        return c * c / k.denominator(psi);
    };
    QuadratureResult res = kronrod_clustered(integrand, 0.0, kPi, k.gap, opts);
    const double scale =
        std::sqrt(2.0 * params.m) / kPi * std::sqrt(params.D) * r * r / params.alpha;
    res.value *= scale;
    res.error_estimate *= scale;
    require_converged(res, opts.relative_tolerance, "action_quadrature");
    return res;
}

QuadratureResult time_of_flight_quadrature(const MorseParams& params, double h, double q,
                                           const QuadratureOptions& opts) {
    validate(params);
    if (!(h > params.D)) throw DomainError("time_of_flight_quadrature: requires h > D");
    const TurningPoints tp = turning_points(params, h);
    if (!(q >= tp.q_minus))
        throw DomainError("time_of_flight_quadrature: q below the turning point q_-");
    // Same substitution; only the root u = 1 + r is positive, so phi runs
    // from the image of q up to pi/2 (the turning point q_-).
    const double r = std::sqrt(h / params.D);
    const double u = std::exp(-params.alpha * q);
    const double phi_q = std::asin(std::clamp((u - 1.0) / r, -1.0, 1.0));
    auto integrand = [r](double phi) { return 1.0 / (1.0 + r * std::sin(phi)); };
    QuadratureResult res = kronrod(integrand, phi_q, kPi / 2, opts);
    const double scale =
        std::sqrt(params.m / 2.0) / (params.alpha * std::sqrt(params.D));
    res.value *= scale;
    res.error_estimate *= scale;
    if (res.value != 0.0) require_converged(res, opts.relative_tolerance, "time_of_flight_quadrature");
    return res;
}

QuadratureResult angle_quadrature(const MorseParams& params, double h, double q,
                                  const QuadratureOptions& opts) {
    require_bounded_energy(params, h, "angle_quadrature");
    const TurningPoints tp = turning_points(params, h);
    if (!(q >= tp.q_minus && q <= tp.q_plus))
        throw DomainError("angle_quadrature: q outside the turning points");
    const BoundedKernel k(params, h);
    const double u = std::exp(-params.alpha * q);
    const double psi_q = std::acos(std::clamp((1.0 - u) / k.r, -1.0, 1.0));
    auto integrand = [&k](double psi) { return 1.0 / k.denominator(psi); };
    QuadratureResult elapsed = kronrod_clustered(integrand, 0.0, psi_q, k.gap, opts);
    const double scale =
        std::sqrt(params.m / 2.0) / (params.alpha * std::sqrt(params.D));
    const QuadratureResult T = period_quadrature(params, h, opts);
    const double factor = 2.0 * kPi * scale / T.value;
    QuadratureResult res;
    res.value = factor * elapsed.value;
    res.error_estimate = factor * elapsed.error_estimate +
                         std::abs(res.value) * T.error_estimate / T.value;
    res.evaluations = elapsed.evaluations + T.evaluations;
    return res;
}

double melnikov_tail_bound(const MorseParams& params, double t_cut) {
    // After one integration by parts each tail leaves
    //   (eps / omega) * |integral_T^inf f'(t) sin(...) dt| <= 2 eps |f'(T)| / omega^2,
    // valid once |f'| is monotone, i.e. T beyond sqrt(3) times the orbit time scale.
    const double A = 2.0 * params.D * params.alpha * params.alpha;
    const double dfdt = 4.0 * params.D * params.alpha * (params.m - A * t_cut * t_cut) /
                        ((A * t_cut * t_cut + params.m) * (A * t_cut * t_cut + params.m));
    return 2.0 * 2.0 * params.epsilon * std::abs(dfdt) / (params.omega * params.omega);
}

QuadratureResult melnikov_quadrature(const MorseParams& params, double t0, double phi0,
                                     const MelnikovOptions& opts) {
    validate(params);
    if (!params.forced()) throw DomainError("melnikov_quadrature: requires epsilon > 0");
    const double omega = params.omega;
    const double eps = params.epsilon;
    const double t_cut = opts.t_cut > 0.0 ? opts.t_cut : 1e4 / omega;
    const double shift = omega * t0 + phi0;
    const double time_scale = std::sqrt(params.m / (2.0 * params.D * params.alpha * params.alpha));
    if (!(t_cut > std::sqrt(3.0) * time_scale))
        throw DomainError("melnikov_quadrature: T_cut too short for the tail bound");

    auto velocity = [&](double t) { return homoclinic_orbit(params, t).p / params.m; };
    std::size_t calls = 0;
    auto integrand = [&](double t) {
        ++calls;
        return velocity(t) * eps * std::cos(omega * t + shift);
    };

    // Panels of one half forcing period, laid out symmetrically about t = 0.
    const double half = kPi / omega;
    const auto panels = static_cast<long>(std::ceil(t_cut / half));
    const double width = t_cut / static_cast<double>(panels);
    double sum = 0.0;
    double error = 0.0;
    double magnitude = 0.0;
    for (long k = -panels; k < panels; ++k) {
        const double a = static_cast<double>(k) * width;
        const double b = static_cast<double>(k + 1) * width;
        const Adaptive panel = adaptive_kronrod(integrand, a, b, opts.relative_tolerance, opts.max_depth);
        if (!(panel.error <= opts.relative_tolerance * panel.l1))
            throw NumericFailure("melnikov_quadrature: panel quadrature did not converge", panel.error);
        sum += panel.value;
        error += panel.error;
        magnitude += panel.l1;
    }
    if (!(error <= opts.relative_tolerance * magnitude))
        throw NumericFailure("melnikov_quadrature: panel quadrature did not converge", error);

    // Integration-by-parts boundary terms of the two tails.
    const double upper = -velocity(t_cut) * eps * std::sin(omega * t_cut + shift) / omega;
    const double lower = velocity(-t_cut) * eps * std::sin(-omega * t_cut + shift) / omega;
    calls += 2;

    QuadratureResult res;
    res.value = sum + upper + lower;
    res.error_estimate = error + melnikov_tail_bound(params, t_cut);
    res.evaluations = calls;
    if (!std::isfinite(res.value))
        throw NumericFailure("melnikov_quadrature: non-finite result", res.error_estimate);
    return res;
}

}  // namespace morse::oracle
