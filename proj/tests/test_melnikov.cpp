#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "morse/errors.hpp"
#include "morse/melnikov.hpp"

using namespace morse;
using std::numbers::pi;

namespace {

MorseParams forced(double omega, double D = 10.0, double eps = 1.0) {
    return MorseParams{D, 1.0, 8.0, eps, omega};
}

// Ordinary least-squares slope of y on x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("closed form") {
    const MorseParams p = forced(1.0);
    CHECK(melnikov_decay_rate(p) == doctest::Approx(std::sqrt(0.4)).epsilon(1e-15));
    CHECK(melnikov_analytic(p, 0.0, 0.0) == 0.0);
    CHECK(melnikov_analytic(p, 0.0, pi / 2) == doctest::Approx(-16.0 * std::exp(-std::sqrt(0.4))).epsilon(1e-15));
    CHECK(melnikov_analytic(p, 0.0, pi / 2) == doctest::Approx(-8.5005697461274856).epsilon(1e-14));
    CHECK(melnikov_analytic(p, pi / 2, 0.0) == melnikov_analytic(p, 0.0, pi / 2));
    CHECK(melnikov_analytic(forced(2.0, 10.0, 0.5), 0.3, 0.1) ==
          doctest::Approx(-0.5 * 16.0 * std::sin(0.7) * std::exp(-2.0 * std::sqrt(0.4))).epsilon(1e-14));

    const double d = melnikov_analytic_derivative(p, 0.4, 0.2);
    const double fd = (melnikov_analytic(p, 0.4 + 1e-6, 0.2) - melnikov_analytic(p, 0.4 - 1e-6, 0.2)) / 2e-6;
    CHECK(d == doctest::Approx(fd).epsilon(1e-8));

    CHECK_THROWS_AS(melnikov_analytic(forced(1.0, 10.0, 0.0), 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(melnikov_analytic(MorseParams{10.0, 1.0, 8.0}, 0.0, 0.0), DomainError);
}

TEST_CASE("magnitude bound and monotonicity") {
    for (double omega : {0.5, 1.0, 2.0, 5.0}) {
        const MorseParams p = forced(omega);
        REQUIRE(p.D > p.m / (p.alpha * p.alpha));
        const double peak = std::abs(melnikov_analytic(p, 0.0, pi / 2));
        CHECK(peak > p.epsilon * 2.0 * p.m / p.alpha * std::exp(-omega / std::sqrt(2.0)));
    }
    double previous = 0.0;
    for (double D : {5.0, 10.0, 20.0, 40.0}) {
        const double peak = std::abs(melnikov_analytic(forced(1.0, D), 0.0, pi / 2));
        CHECK(peak > previous);
        previous = peak;
    }
}

TEST_CASE("half a forcing period flips the sign") {
    for (double omega : {0.5, 1.0, 3.0}) {
        const MorseParams p = forced(omega);
        for (double t0 : {0.0, 0.2, 1.7, 9.3}) {
            const double a = melnikov_analytic(p, t0, 0.4);
            const double b = melnikov_analytic(p, t0 + pi / omega, 0.4);
            CHECK(std::abs(a + b) <= 8.0 * std::numeric_limits<double>::epsilon() * 16.0);
        }
    }
}

TEST_CASE("zeros") {
    const auto z = melnikov_zeros(forced(1.0), 0.0, 0.0, 10.0);
    REQUIRE(z.size() == 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(z[k].t0 == doctest::Approx(k * pi).epsilon(1e-15));
        CHECK(z[k].simple);
    }
    CHECK(z[0].derivative_sign == -1);
    for (int k = 1; k < 4; ++k) CHECK(z[k].derivative_sign == -z[k - 1].derivative_sign);

    // (k pi - pi/2) / 2: only pi/4, 3pi/4 and 5pi/4 fall inside [0, 5].
    const auto z2 = melnikov_zeros(forced(2.0), pi / 2, 0.0, 5.0);
    REQUIRE(z2.size() == 3);
    for (int k = 0; k < 3; ++k) CHECK(z2[k].t0 == doctest::Approx((2 * k + 1) * pi / 4).epsilon(1e-15));
    const auto z3 = melnikov_zeros(forced(2.0), pi / 2, 0.0, 7.5);
    REQUIRE(z3.size() == 5);
    for (int k = 0; k < 5; ++k) CHECK(z3[k].t0 == doctest::Approx((2 * k + 1) * pi / 4).epsilon(1e-15));

    for (const MelnikovZero& zero : melnikov_zeros(forced(5.0, 10.0, 1e-6), 1.0, -3.0, 3.0)) {
        CHECK(zero.simple);
        CHECK(zero.derivative_sign != 0);
    }
    CHECK(melnikov_zeros(forced(1.0), 0.0, 0.5, 0.6).empty());
    CHECK(melnikov_zeros(forced(1.0), 0.0, 5.0, 1.0).empty());
}

TEST_CASE("scan against the oracle") {
    std::vector<double> grid;
    for (int k = 0; k <= 40; ++k) grid.push_back(-5.0 + 0.25 * k);
    for (double omega : {1.0, 5.0}) {
        const MelnikovScan scan = melnikov_scan(forced(omega), grid, 0.3);
        REQUIRE(scan.rows.size() == grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(scan.rows[i].t0 == grid[i]);
            CHECK(scan.rows[i].phi0 == 0.3);
            CHECK_FALSE(scan.rows[i].error.has_value());
            CHECK(scan.rows[i].tail_bound > 0.0);
        }
        CHECK(scan.ratio_rows > grid.size() / 2);
        CHECK(scan.ratio_spread < 1e-4);
        // The constant factor separating the printed prefactor from the integral.
        CHECK(scan.ratio == doctest::Approx(8.0 / pi).epsilon(1e-6));
    }

    SUBCASE("row failures do not abort the scan") {
        oracle::MelnikovOptions starved;
        starved.relative_tolerance = 1e-18;
        starved.max_depth = 0;
        const std::vector<double> few{0.0, 1.0};
        const MelnikovScan scan = melnikov_scan(forced(1.0), few, 0.3, starved);
        REQUIRE(scan.rows.size() == 2);
        for (const MelnikovRow& r : scan.rows) {
            CHECK(r.error.has_value());
            CHECK(std::isnan(r.m_numeric));
            CHECK(std::isfinite(r.m_analytic));
        }
        CHECK(scan.ratio_rows == 0);
        CHECK(std::isnan(scan.ratio));
    }
}

TEST_CASE("exponential law in the forcing frequency") {
    std::vector<double> omegas{0.5, 1.0, 2.0, 5.0}, logs;
    for (double omega : omegas) {
        const MorseParams p = forced(omega);
        logs.push_back(std::log(std::abs(oracle::melnikov_quadrature(p, 0.0, pi / 2).value)));
    }
    CHECK(std::abs(slope(omegas, logs) + 0.632456) <= 1e-3);
    CHECK(std::abs(slope(omegas, logs) + std::sqrt(0.4)) <= 1e-6);
}

TEST_CASE("numeric zeros coincide with the closed-form zeros") {
    for (double omega : {0.5, 1.0, 2.0, 5.0}) {
        const MorseParams p = forced(omega);
        const double phi0 = 0.3;
        const auto exact = melnikov_zeros(p, phi0, -2.0, 8.0);
        const auto found = melnikov_numeric_zeros(p, phi0, -2.0, 8.0, 1e-9 / omega);
        REQUIRE(found.size() == exact.size());
        for (std::size_t i = 0; i < found.size(); ++i)
            CHECK(std::abs(found[i] - exact[i].t0) <= 1e-6 / omega);
    }
}
