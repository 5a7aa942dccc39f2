#pragma once

#include "lab/grid.hpp"

namespace lab::fft {

// Unnormalized in-place transforms backed by FFTW. sign = -1 forward, +1 backward.
// Plans are cached per shape; execution is safe from concurrent threads.
void transform(cplx* data, std::size_t n, int sign);
void transform2d(cplx* data, std::size_t rows, std::size_t cols, int sign);

} // namespace lab::fft
