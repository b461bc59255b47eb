#pragma once

#include "morse/descriptors.hpp"

namespace morse::detail {

// Validates inputs and returns a zeroed field with metadata filled in.
ScalarField empty_field(const MorseParams& params, const GridSpec& grid, const LdConfig& cfg);

void store(ScalarField& field, std::size_t k, const DescriptorValue& v);

}  // namespace morse::detail
