#pragma once

#include <cstddef>

#include "stratlab/kernels/kernels.hpp"

namespace stratlab::kernels {

// Column range [begin, end) of the scalar Montgomery kernel; shared with the
// SIMD variants for their remainder columns.
void montgomery_scalar_columns(double* out, const double* g, const double* rho, const double* w,
                               std::size_t n_r, std::size_t stride, std::size_t begin,
                               std::size_t end, bool divide_by_rho);

#if defined(STRATLAB_WITH_AVX2)
const KernelTable& avx2_table();
#endif

}  // namespace stratlab::kernels
