#pragma once

// Lagrangian-descriptor fields and Poincare scatter data over phase-space
// windows. Sweeps run one independent trajectory per cell (or seed) and are
// parallelised with OpenMP; ld_field_serial is the single-threaded reference
// the parallel kernel is tested against.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "morse/integrate.hpp"
#include "morse/model.hpp"

namespace morse {

struct GridSpec {
    double q_min = -1.0;
    double q_max = 6.0;
    double p_min = -12.0;
    double p_max = 12.0;
    std::size_t nq = 200;
    std::size_t np = 200;
    double t_center = 0.0;
    double tau = 40.0;
};

void validate(const GridSpec& grid);

// Cell centres. Computed as mid + half_width * (2i + 1 - n) / n so that a
// window symmetric about zero gives exactly mirrored centres, and refining by
// an odd factor reproduces the coarse centres bit for bit.
double cell_q(const GridSpec& grid, std::size_t i) noexcept;
double cell_p(const GridSpec& grid, std::size_t j) noexcept;

enum class CellStatus : std::uint8_t { Ok = 0, Escaped = 1, Failed = 2 };

struct LdConfig {
    IntegratorConfig integrator;   // defaults: Dopri45, rtol 1e-9, atol 1e-12
    double q_ceiling = 0.0;        // <= 0 selects default_q_ceiling(params)
    int threads = 0;               // <= 0 uses the OpenMP default
};

struct FieldMetadata {
    MorseParams params;
    IntegratorConfig integrator;
    double q_ceiling = 0.0;
    std::string code_version;
    bool rescaled = false;
    double rescale_scale = 0.0;
};

// values and flags are stored row by row in p: index = j * nq + i.
struct ScalarField {
    GridSpec grid;
    std::vector<double> values;
    std::vector<CellStatus> flags;
    FieldMetadata metadata;

    std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * grid.nq + i; }
    double at(std::size_t i, std::size_t j) const noexcept { return values[index(i, j)]; }
    bool flagged(std::size_t i, std::size_t j) const noexcept {
        return flags[index(i, j)] != CellStatus::Ok;
    }
};

const char* code_version() noexcept;

// One cell: the descriptor at the cell-centre state.
DescriptorValue ld_cell(const MorseParams& params, const GridSpec& grid, const LdConfig& cfg,
                        std::size_t i, std::size_t j);

ScalarField ld_field(const MorseParams& params, const GridSpec& grid, const LdConfig& cfg = {});

ScalarField ld_field_serial(const MorseParams& params, const GridSpec& grid,
                            const LdConfig& cfg = {});

// x -> atan(x / s) with s the median of the unflagged values. Flagged cells are
// mapped too when their value is finite.
ScalarField arctan_rescale(const ScalarField& field);

std::vector<StroboscopicOrbit> poincare_scatter(const MorseParams& params,
                                                const std::vector<PhaseState>& seeds,
                                                std::size_t n_iterates,
                                                const IntegratorConfig& cfg,
                                                double t_start = 0.0, int threads = 0);

}  // namespace morse
