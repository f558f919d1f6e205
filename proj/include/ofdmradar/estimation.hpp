#pragma once

#include "ofdmradar/grid.hpp"

namespace ofdmradar {

/// LS channel estimate: elementwise Y / X. X must be zero-free (enforced by
/// build_frame; rechecked here).
ComplexGrid spectral_division(const ComplexGrid& y, const ComplexGrid& x);

/// Delay-domain denoising: per symbol column, inverse DFT (1/N scaling),
/// zero every tap at or beyond n_cp, forward DFT back. An orthogonal
/// projection, identity on channels confined to the CP window.
ComplexGrid dft_ce(const ComplexGrid& h, std::size_t n_cp);

/// Mean squared complex error over the grid.
double channel_mse(const ComplexGrid& h_est, const ComplexGrid& h_true);

}  // namespace ofdmradar
