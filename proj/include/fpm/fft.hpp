#pragma once

#include "fpm/field.hpp"

namespace fpm {

/// Unitary 2-D DFT. Input is a spatial array indexed from (0,0); the output
/// spectrum is centered (DC at (rows/2, cols/2)). Norm-preserving:
/// ||fft2(f)|| == ||f|| up to rounding.
Field2D fft2(const Field2D& f);

/// Exact unitary inverse (and adjoint) of fft2. Input is a centered
/// spectrum, output a spatial array indexed from (0,0).
Field2D ifft2(const Field2D& f);

}  // namespace fpm
