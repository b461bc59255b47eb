#include "field_common.hpp"

namespace morse {

ScalarField ld_field_serial(const MorseParams& params, const GridSpec& grid, const LdConfig& cfg) {
    ScalarField field = detail::empty_field(params, grid, cfg);
    for (std::size_t j = 0; j < grid.np; ++j)
        for (std::size_t i = 0; i < grid.nq; ++i)
            detail::store(field, field.index(i, j), ld_cell(params, grid, cfg, i, j));
    return field;
}

}  // namespace morse
