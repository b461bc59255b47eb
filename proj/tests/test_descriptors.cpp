#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include "doctest.h"
#include "morse/descriptors.hpp"
#include "morse/errors.hpp"

using namespace morse;
using std::numbers::pi;

namespace {

MorseParams forced(double omega, double eps = 1.0) { return MorseParams{10.0, 1.0, 8.0, eps, omega}; }

GridSpec small_grid(std::size_t nq, std::size_t np, double tau = 10.0) {
    GridSpec g;
    g.nq = nq;
    g.np = np;
    g.tau = tau;
    return g;
}

bool bitwise_equal(const ScalarField& a, const ScalarField& b) {
    return a.values.size() == b.values.size() &&
           std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0 &&
           a.flags == b.flags;
}

ScalarField constant_field(double c, std::size_t n = 4) {
    ScalarField f;
    f.grid = small_grid(n, n);
    f.values.assign(n * n, c);
    f.flags.assign(n * n, CellStatus::Ok);
    return f;
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_NOTHROW(validate(GridSpec{}));
    GridSpec g;
    g.q_max = g.q_min;
    CHECK_THROWS_AS(validate(g), DomainError);
    g = {};
    g.np = 1;
    CHECK_THROWS_AS(validate(g), DomainError);
    g = {};
    g.tau = 0.0;
    CHECK_THROWS_AS(validate(g), DomainError);
    g = {};
    g.p_min = 13.0;
    CHECK_THROWS_AS(validate(g), DomainError);
}

TEST_CASE("cell centres") {
    const GridSpec g = small_grid(7, 10);
    CHECK(cell_q(g, 0) == doctest::Approx(-1.0 + 0.5));
    CHECK(cell_q(g, 6) == doctest::Approx(6.0 - 0.5));
    CHECK(cell_p(g, 0) == doctest::Approx(-12.0 + 1.2));
    for (std::size_t j = 0; j < g.np; ++j) CHECK(cell_p(g, j) == -cell_p(g, g.np - 1 - j));

    SUBCASE("odd refinement reproduces coarse centres exactly") {
        for (std::size_t n : {2u, 5u, 8u, 13u}) {
            const GridSpec coarse = small_grid(n, n);
            const GridSpec fine = small_grid(3 * n, 3 * n);
            for (std::size_t i = 0; i < n; ++i) {
                CHECK(cell_q(coarse, i) == cell_q(fine, 3 * i + 1));
                CHECK(cell_p(coarse, i) == cell_p(fine, 3 * i + 1));
            }
        }
    }
}

TEST_CASE("ld field") {
    const MorseParams p = forced(1.0);
    const GridSpec g = small_grid(9, 8);
    const ScalarField f = ld_field(p, g);
    REQUIRE(f.values.size() == 72);
    REQUIRE(f.flags.size() == 72);
    for (double v : f.values) CHECK(std::isfinite(v));
    CHECK(f.metadata.code_version == code_version());
    CHECK(f.metadata.q_ceiling == doctest::Approx(default_q_ceiling(p)));
    CHECK(f.metadata.params.omega == 1.0);
    CHECK_FALSE(f.metadata.rescaled);

    const DescriptorValue cell = ld_cell(p, g, LdConfig{}, 3, 5);
    CHECK(cell.value == f.at(3, 5));
    CHECK((cell.escaped || cell.failed) == f.flagged(3, 5));
    const DescriptorValue direct =
        arclength_descriptor(p, {cell_q(g, 3), cell_p(g, 5)}, g.t_center, g.tau, IntegratorConfig{});
    CHECK(direct.value == cell.value);

    SUBCASE("parallel sweep equals the serial reference bitwise") {
        CHECK(bitwise_equal(f, ld_field_serial(p, g)));
        for (int threads : {1, 2, 3}) {
            LdConfig cfg;
            cfg.threads = threads;
            CHECK(bitwise_equal(f, ld_field(p, g, cfg)));
        }
    }

    SUBCASE("refinement by three reproduces coarse cells") {
        const GridSpec fine = small_grid(27, 24);
        const ScalarField ff = ld_field(p, fine);
        for (std::size_t j = 0; j < g.np; ++j)
            for (std::size_t i = 0; i < g.nq; ++i) {
                CHECK(ff.at(3 * i + 1, 3 * j + 1) == f.at(i, j));
                CHECK(ff.flagged(3 * i + 1, 3 * j + 1) == f.flagged(i, j));
            }
    }

    SUBCASE("per-cell failures are flagged, not raised") {
        LdConfig starved;
        starved.integrator.max_steps = 3;
        const ScalarField s = ld_field(p, g, starved);
        CHECK(std::count(s.flags.begin(), s.flags.end(), CellStatus::Failed) > 0);
    }

    CHECK_THROWS_AS(ld_field(p, small_grid(1, 5)), DomainError);
}

TEST_CASE("p -> -p symmetry of the descriptor field") {
    for (const MorseParams& p : {MorseParams{10.0, 1.0, 8.0}, forced(1.0), forced(5.0)}) {
        const GridSpec g = small_grid(10, 12, 40.0);
        const ScalarField f = ld_field(p, g);
        std::size_t compared = 0;
        for (std::size_t j = 0; j < g.np; ++j)
            for (std::size_t i = 0; i < g.nq; ++i) {
                const std::size_t jm = g.np - 1 - j;
                CHECK(f.flags[f.index(i, j)] == f.flags[f.index(i, jm)]);
                if (f.flagged(i, j) || f.flagged(i, jm)) continue;
                ++compared;
                CHECK(std::abs(f.at(i, j) - f.at(i, jm)) <= 1e-6 * std::abs(f.at(i, j)));
            }
        CHECK(compared > 0);
    }
}

TEST_CASE("arctan rescale") {
    const ScalarField c = arctan_rescale(constant_field(3.5));
    for (double v : c.values) CHECK(v == doctest::Approx(pi / 4));
    CHECK(c.metadata.rescaled);
    CHECK(c.metadata.rescale_scale == 3.5);

    const ScalarField f = ld_field(forced(1.0), small_grid(8, 8));
    const ScalarField r = arctan_rescale(f);
    CHECK(std::max_element(r.values.begin(), r.values.end()) - r.values.begin() ==
          std::max_element(f.values.begin(), f.values.end()) - f.values.begin());
    for (std::size_t k = 0; k < f.values.size(); ++k) {
        CHECK(r.values[k] > -pi / 2);
        CHECK(r.values[k] < pi / 2);
        CHECK(r.flags[k] == f.flags[k]);
        for (std::size_t l = 0; l < f.values.size(); ++l)
            if (f.values[k] < f.values[l]) CHECK(r.values[k] < r.values[l]);
    }

    SUBCASE("scale is the median of unflagged cells") {
        ScalarField g = constant_field(0.0, 2);
        g.values = {1.0, 2.0, 100.0, 3.0};
        g.flags = {CellStatus::Ok, CellStatus::Ok, CellStatus::Escaped, CellStatus::Ok};
        const ScalarField s = arctan_rescale(g);
        CHECK(s.metadata.rescale_scale == 2.0);
        CHECK(s.values[2] == doctest::Approx(std::atan(50.0)));
    }

    SUBCASE("non-positive median falls back to unit scale") {
        const ScalarField z = arctan_rescale(constant_field(0.0));
        CHECK(z.metadata.rescale_scale == 1.0);
        for (double v : z.values) CHECK(v == 0.0);
    }

    ScalarField all = constant_field(1.0);
    std::fill(all.flags.begin(), all.flags.end(), CellStatus::Escaped);
    CHECK_THROWS_AS(arctan_rescale(all), DomainError);
}

TEST_CASE("poincare scatter") {
    const MorseParams p = forced(5.0);
    const std::vector<PhaseState> seeds{{0.0, 0.0}, {0.3, -1.0}, {0.0, 0.0}};
    const auto orbits = poincare_scatter(p, seeds, 500, IntegratorConfig{});
    REQUIRE(orbits.size() == 3);

    // Fixture from the first verified run: the well-centre seed stays within
    // |q| < 0.012, |p| < 0.07.
    const StroboscopicOrbit& centre = orbits[0];
    CHECK_FALSE(centre.escaped);
    REQUIRE(centre.states.size() == 501);
    for (const PhaseState& s : centre.states) {
        CHECK(std::abs(s.q) < 0.012);
        CHECK(std::abs(s.p) < 0.07);
    }
    CHECK(centre.states.back().q == doctest::Approx(-0.0013061553122209271).epsilon(1e-6));
    CHECK(centre.forcing_period == doctest::Approx(2 * pi / 5.0));

    REQUIRE(orbits[2].states.size() == centre.states.size());
    CHECK(std::memcmp(orbits[2].states.data(), centre.states.data(),
                      centre.states.size() * sizeof(PhaseState)) == 0);

    const auto echoed = poincare_scatter(p, seeds, 0, IntegratorConfig{});
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        REQUIRE(echoed[k].states.size() == 1);
        CHECK(echoed[k].states[0] == seeds[k]);
    }

    SUBCASE("escapes are recorded per seed") {
        IntegratorConfig boxed;
        boxed.domain.q_max = 5.0;
        const std::vector<PhaseState> mixed{{0.0, 0.0}, {0.0, 14.0}};
        const auto res = poincare_scatter(forced(1.0), mixed, 50, boxed);
        CHECK_FALSE(res[0].escaped);
        CHECK(res[0].states.size() == 51);
        CHECK(res[1].escaped);
    }

    CHECK_THROWS_AS(poincare_scatter(MorseParams{10.0, 1.0, 8.0}, seeds, 5, IntegratorConfig{}), DomainError);
}
