#pragma once

#include "chaosbound/simd.hpp"

namespace chaosbound::simd::detail {

const KernelTable& scalar_table();
// nullptr when the backend was not compiled for this target.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace chaosbound::simd::detail
