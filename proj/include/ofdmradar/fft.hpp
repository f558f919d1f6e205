#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "ofdmradar/grid.hpp"

namespace ofdmradar::fft {

/// In-place complex FFT, forward sign e^{-j2pi nk/N}, unscaled.
void forward(cplx* data, std::size_t n);
/// In-place complex inverse transform, sign e^{+j2pi nk/N}, unscaled.
void inverse(cplx* data, std::size_t n);

inline void forward(std::vector<cplx>& v) { forward(v.data(), v.size()); }
inline void inverse(std::vector<cplx>& v) { inverse(v.data(), v.size()); }

/// Out-of-place forward transform (input preserved).
void forward_copy(const cplx* in, cplx* out, std::size_t n);

/// Batched transform of every row of a row-major rows x cols matrix.
void forward_rows(cplx* data, std::size_t rows, std::size_t cols);
void inverse_rows(cplx* data, std::size_t rows, std::size_t cols);

/// Batched transform of every column of a row-major rows x cols matrix.
void forward_cols(cplx* data, std::size_t rows, std::size_t cols);
void inverse_cols(cplx* data, std::size_t rows, std::size_t cols);

}  // namespace ofdmradar::fft
