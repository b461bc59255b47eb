#include "morse/descriptors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>

#include "field_common.hpp"
#include "morse/errors.hpp"

#ifndef MORSE_VERSION
#define MORSE_VERSION "unknown"
#endif

namespace morse {

namespace {

double centre(double lo, double hi, std::size_t k, std::size_t n) noexcept {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double offset = (2.0 * static_cast<double>(k) + 1.0 - static_cast<double>(n)) /
                          static_cast<double>(n);
    return mid + half * offset;
}

int thread_count(int requested) {
    return requested > 0 ? requested : omp_get_max_threads();
}

}  // namespace

const char* code_version() noexcept { return MORSE_VERSION; }

void validate(const GridSpec& grid) {
    if (!(grid.q_min < grid.q_max)) throw DomainError("GridSpec: q_min must be < q_max");
    if (!(grid.p_min < grid.p_max)) throw DomainError("GridSpec: p_min must be < p_max");
    if (grid.nq < 2 || grid.np < 2) throw DomainError("GridSpec: nq and np must be >= 2");
    if (!(grid.tau > 0.0)) throw DomainError("GridSpec: tau must be > 0");
    if (!std::isfinite(grid.t_center)) throw DomainError("GridSpec: t_center must be finite");
}

double cell_q(const GridSpec& grid, std::size_t i) noexcept {
    return centre(grid.q_min, grid.q_max, i, grid.nq);
}

double cell_p(const GridSpec& grid, std::size_t j) noexcept {
    return centre(grid.p_min, grid.p_max, j, grid.np);
}

DescriptorValue ld_cell(const MorseParams& params, const GridSpec& grid, const LdConfig& cfg,
                        std::size_t i, std::size_t j) {
    const PhaseState s0{cell_q(grid, i), cell_p(grid, j)};
    return arclength_descriptor(params, s0, grid.t_center, grid.tau, cfg.integrator,
                                cfg.q_ceiling);
}

namespace detail {

ScalarField empty_field(const MorseParams& params, const GridSpec& grid, const LdConfig& cfg) {
    validate(params);
    validate(grid);
    validate(cfg.integrator);
    ScalarField field;
    field.grid = grid;
    field.values.assign(grid.nq * grid.np, 0.0);
    field.flags.assign(grid.nq * grid.np, CellStatus::Ok);
    field.metadata.params = params;
    field.metadata.integrator = cfg.integrator;
    field.metadata.q_ceiling = cfg.q_ceiling > 0.0 ? cfg.q_ceiling : default_q_ceiling(params);
    field.metadata.code_version = code_version();
    return field;
}

void store(ScalarField& field, std::size_t k, const DescriptorValue& v) {
    field.values[k] = v.value;
    field.flags[k] = v.failed ? CellStatus::Failed
                              : (v.escaped ? CellStatus::Escaped : CellStatus::Ok);
}

}  // namespace detail

ScalarField ld_field(const MorseParams& params, const GridSpec& grid, const LdConfig& cfg) {
    ScalarField field = detail::empty_field(params, grid, cfg);
    const std::size_t nq = grid.nq;
    const auto cells = static_cast<long long>(grid.nq * grid.np);

#pragma omp parallel for schedule(dynamic, 16) num_threads(thread_count(cfg.threads))
    for (long long c = 0; c < cells; ++c) {
        const auto k = static_cast<std::size_t>(c);
        detail::store(field, k, ld_cell(params, grid, cfg, k % nq, k / nq));
    }
    return field;
}

ScalarField arctan_rescale(const ScalarField& field) {
    std::vector<double> ok;
    ok.reserve(field.values.size());
    for (std::size_t k = 0; k < field.values.size(); ++k)
        if (field.flags[k] == CellStatus::Ok && std::isfinite(field.values[k]))
            ok.push_back(field.values[k]);
    if (ok.empty()) throw DomainError("arctan_rescale: every cell is flagged");

    const std::size_t mid = ok.size() / 2;
    std::nth_element(ok.begin(), ok.begin() + static_cast<std::ptrdiff_t>(mid), ok.end());
    double scale = ok[mid];
    if (ok.size() % 2 == 0) {
        const double lower = *std::max_element(ok.begin(), ok.begin() + static_cast<std::ptrdiff_t>(mid));
        scale = 0.5 * (scale + lower);
    }
    // A field whose median is zero (mostly stationary points) falls back to unit scale.
    if (!(scale > 0.0)) scale = 1.0;

    ScalarField out = field;
    for (double& v : out.values)
        if (std::isfinite(v)) v = std::atan(v / scale);
    out.metadata.rescaled = true;
    out.metadata.rescale_scale = scale;
    return out;
}

std::vector<StroboscopicOrbit> poincare_scatter(const MorseParams& params,
                                                const std::vector<PhaseState>& seeds,
                                                std::size_t n_iterates,
                                                const IntegratorConfig& cfg, double t_start,
                                                int threads) {
    validate(params);
    validate(cfg);
    if (!params.forced()) throw DomainError("poincare_scatter: requires epsilon > 0");
    std::vector<StroboscopicOrbit> orbits(seeds.size());
    const auto n = static_cast<long long>(seeds.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count(threads))
    for (long long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        orbits[k] = stroboscopic_orbit(params, seeds[k], t_start, n_iterates, cfg);
    }
    return orbits;
}

}  // namespace morse
