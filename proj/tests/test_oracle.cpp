#include <cmath>
#include <numbers>

#include "doctest.h"
#include "morse/analytic.hpp"
#include "morse/errors.hpp"
#include "morse/oracle.hpp"

using namespace morse;
using std::numbers::pi;

namespace {

const MorseParams kFig{10.0, 1.0, 8.0, 0.0, 0.0};
const MorseParams kSets[] = {kFig, MorseParams{3.0, 0.7, 1.5}, MorseParams{40.0, 2.0, 0.25}};

MorseParams forced(double omega, double eps = 1.0) {
    MorseParams p = kFig;
    p.epsilon = eps;
    p.omega = omega;
    return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Phase offset putting omega t0 + phi0 at x, with t0 = 0.
double peak_phase(double x) { return x; }

}  // namespace

TEST_CASE("period quadrature") {
    const oracle::QuadratureResult r = oracle::period_quadrature(kFig, 6.0);
    CHECK(std::abs(r.value - 2 * pi) <= 1e-9);
    CHECK(r.error_estimate >= 0.0);
    CHECK(r.error_estimate <= 1e-10 * r.value);
    CHECK(r.evaluations > 0);

    for (const MorseParams& p : kSets) {
        CHECK(rel(oracle::period_quadrature(p, 0.5 * p.D).value,
                  pi * std::sqrt(2 * p.m) / (p.alpha * std::sqrt(0.5 * p.D))) <= 1e-9);
        CHECK(rel(oracle::period_quadrature(p, 0.99 * p.D).value,
                  pi * std::sqrt(2 * p.m) / (p.alpha * std::sqrt(0.01 * p.D))) <= 1e-8);
    }
    CHECK_THROWS_AS(oracle::period_quadrature(kFig, 0.0), DomainError);
    CHECK_THROWS_AS(oracle::period_quadrature(kFig, 10.0), DomainError);
}

TEST_CASE("action quadrature") {
    const oracle::QuadratureResult r = oracle::action_quadrature(kFig, 6.0);
    CHECK(std::abs(r.value - 4.0 * (std::sqrt(10.0) - 2.0)) <= 1e-9);
    CHECK(r.error_estimate >= 0.0);
    CHECK(r.evaluations > 0);

    CHECK(oracle::action_quadrature(kFig, 1e-8).value < 1e-4);
    CHECK(oracle::action_quadrature(kFig, 1e-8).value > 0.0);
    // Approach to the separatrix: I_max - I(D - d) = sqrt(2m d) / alpha.
    const double near = oracle::action_quadrature(kFig, 10.0 - 1e-6).value;
    CHECK(std::abs(near - (std::sqrt(160.0) - std::sqrt(16.0 * 1e-6))) <= 1e-9);
    CHECK(std::abs(oracle::action_quadrature(kFig, 10.0 - 1e-10).value - std::sqrt(160.0)) <= 1e-4);
    CHECK_THROWS_AS(oracle::action_quadrature(kFig, 10.5), DomainError);
}

TEST_CASE("quadratures match the closed forms across energies") {
    for (const MorseParams& p : kSets) {
        for (double f : {0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
            const double h = f * p.D;
            CHECK(rel(oracle::period_quadrature(p, h).value, period(p, h)) <= 1e-8);
            CHECK(rel(oracle::action_quadrature(p, h).value, action(p, h)) <= 1e-8);
        }
    }
}

TEST_CASE("time of flight quadrature") {
    const double h = 12.0;
    const double t = oracle::time_of_flight_quadrature(kFig, h, 1.0).value;
    CHECK(std::abs(t - unbounded_time_of_position(kFig, h, 1.0)) <= 1e-9);
    for (const MorseParams& p : kSets) {
        const double hu = 1.5 * p.D;
        for (double q : {0.0, 0.5 / p.alpha, 3.0 / p.alpha}) {
            CHECK(std::abs(oracle::time_of_flight_quadrature(p, hu, q).value -
                           unbounded_time_of_position(p, hu, q)) <= 1e-9);
        }
    }
    const double qm = turning_points(kFig, h).q_minus;
    CHECK(std::abs(oracle::time_of_flight_quadrature(kFig, h, qm).value) < 1e-12);
    CHECK_THROWS_AS(oracle::time_of_flight_quadrature(kFig, h, qm - 0.5), DomainError);
    CHECK_THROWS_AS(oracle::time_of_flight_quadrature(kFig, 9.0, 0.0), DomainError);
}

TEST_CASE("angle quadrature matches angle_of_state on the inbound half") {
    for (const MorseParams& p : kSets) {
        const double h = 0.6 * p.D;
        const TurningPoints tp = turning_points(p, h);
        for (double s : {0.05, 0.3, 0.5, 0.8, 0.97}) {
            const double q = tp.q_plus + s * (tp.q_minus - tp.q_plus);
            const double mom = -std::sqrt(2.0 * p.m * (h - potential(p, q)));
            const double analytic = angle_of_state(p, {q, mom}).theta;
            CHECK(std::abs(oracle::angle_quadrature(p, h, q).value - analytic) <= 1e-8);
        }
    }
}

TEST_CASE("nonconvergence is reported with the achieved estimate") {
    oracle::QuadratureOptions starved;
    starved.relative_tolerance = 1e-17;
    starved.max_depth = 0;
    try {
        oracle::period_quadrature(kFig, 9.99, starved);
        FAIL("expected NumericFailure");
    } catch (const NumericFailure& e) {
        CHECK(e.achieved_estimate() > 0.0);
    }

    oracle::MelnikovOptions mstarved;
    mstarved.relative_tolerance = 1e-18;
    mstarved.max_depth = 0;
    CHECK_THROWS_AS(oracle::melnikov_quadrature(forced(1.0), 0.0, pi / 2, mstarved), NumericFailure);
}

TEST_CASE("melnikov quadrature") {
    const MorseParams p1 = forced(1.0);

    SUBCASE("vanishes at the zero of the phase") {
        const oracle::QuadratureResult z = oracle::melnikov_quadrature(p1, 0.0, 0.0);
        CHECK(std::abs(z.value) <= z.error_estimate + 1e-15);
        const oracle::QuadratureResult z2 = oracle::melnikov_quadrature(p1, 1.0, -1.0);
        CHECK(std::abs(z2.value) <= z2.error_estimate + 1e-15);
    }

    SUBCASE("golden value at the sine peak") {
        const oracle::QuadratureResult v = oracle::melnikov_quadrature(p1, 0.0, peak_phase(pi / 2));
        CHECK(v.value == doctest::Approx(-3.3381659454371726).epsilon(1e-9));
        // Direct contour evaluation of the defining integral.
        CHECK(std::abs(v.value - (-2.0 * pi * std::exp(-std::sqrt(0.4)))) <= v.error_estimate);
        CHECK(v.error_estimate > 0.0);
        CHECK(v.error_estimate < 1e-6);
    }

    SUBCASE("exponential scaling with frequency") {
        const double m1 = oracle::melnikov_quadrature(p1, 0.0, pi / 2).value;
        const double m2 = oracle::melnikov_quadrature(forced(2.0), 0.0, pi / 2).value;
        CHECK(std::abs(m2 / m1 - std::exp(-std::sqrt(0.4))) <= 1e-4);
    }

    SUBCASE("odd in the phase") {
        for (double x : {0.3, 1.0, pi / 2, 2.5}) {
            const oracle::QuadratureResult a = oracle::melnikov_quadrature(p1, 0.0, x);
            const oracle::QuadratureResult b = oracle::melnikov_quadrature(p1, 0.0, -x);
            CHECK(std::abs(a.value + b.value) <= 2.0 * std::max(a.error_estimate, b.error_estimate));
        }
    }

    SUBCASE("linear in epsilon") {
        const double a = oracle::melnikov_quadrature(forced(1.0, 1.0), 0.0, 1.0).value;
        const double b = oracle::melnikov_quadrature(forced(1.0, 0.25), 0.0, 1.0).value;
        CHECK(b == doctest::Approx(0.25 * a).epsilon(1e-9));
    }

    SUBCASE("truncation is covered by the tail bound") {
        for (double omega : {0.5, 1.0, 5.0}) {
            const MorseParams p = forced(omega);
            oracle::MelnikovOptions once;
            once.t_cut = 1e4 / omega;
            oracle::MelnikovOptions twice;
            twice.t_cut = 2e4 / omega;
            const oracle::QuadratureResult a = oracle::melnikov_quadrature(p, 0.0, pi / 2, once);
            const oracle::QuadratureResult b = oracle::melnikov_quadrature(p, 0.0, pi / 2, twice);
            CHECK(std::abs(a.value - b.value) < oracle::melnikov_tail_bound(p, once.t_cut));
            CHECK(oracle::melnikov_tail_bound(p, once.t_cut) <= a.error_estimate);
        }
    }

    CHECK(oracle::melnikov_tail_bound(p1, 2e4) < oracle::melnikov_tail_bound(p1, 1e4));
    CHECK_THROWS_AS(oracle::melnikov_quadrature(kFig, 0.0, 0.0), DomainError);
    oracle::MelnikovOptions tiny;
    tiny.t_cut = 0.5;
    CHECK_THROWS_AS(oracle::melnikov_quadrature(p1, 0.0, 0.0, tiny), DomainError);
}
