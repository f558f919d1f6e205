#pragma once

#include <cstdint>
#include <vector>

#include "ofdmradar/grid.hpp"
#include "ofdmradar/waveform.hpp"

namespace ofdmradar {

/// One estimated target.
struct Detection {
    long delay_bin = 0;    // in [0, N')
    long doppler_bin = 0;  // signed, in [-floor(M'/2), M' - floor(M'/2))
    double peak_power = 0.0;
    double range_m = 0.0;
    double velocity_mps = 0.0;
};

/// Separable 2-D window as its two 1-D factors.
struct Window2d {
    std::vector<double> subcarrier;  // length N
    std::vector<double> symbol;      // length M

    /// Normalization constant for the detection threshold:
    /// sum |w_{k,l}|^2 / (N M); equals 1 for the rectangular window.
    double power_factor() const;
    /// Coherent gain (sum w)^2 / (N M); scales the on-bin peak power.
    double coherent_gain() const;
};

Window2d make_window(WindowKind kind, std::size_t n, std::size_t m);

/// Eq.-style 2-D periodogram of the channel grid: window, M'-point forward
/// DFT along the symbol axis (Doppler), N'-point inverse DFT along the
/// subcarrier axis (delay), |.|^2 / (N M). Rows = delay bin in [0, N'),
/// columns = Doppler stored fft-shifted so the zero-Doppler bin sits at
/// column floor(M'/2).
RealGrid periodogram(const ComplexGrid& h, const Window2d& window, std::size_t n_prime,
                     std::size_t m_prime);

/// Column index <-> signed Doppler bin for an fft-shifted axis of length mp.
inline long doppler_bin_of_col(std::size_t col, std::size_t mp) {
    return static_cast<long>(col) - static_cast<long>(mp / 2);
}
inline std::size_t col_of_doppler_bin(long bin, std::size_t mp) {
    return static_cast<std::size_t>(bin + static_cast<long>(mp / 2));
}

/// Neyman-Pearson cell threshold: eta = -sigma2 * ln(pfa) * window power
/// factor. Calibrated so a noise-only cell exceeds it with probability pfa.
double detection_threshold(double sigma2, double pfa, double window_power_factor);

/// Binary mask of cells at or above the threshold.
std::vector<std::uint8_t> threshold_mask(const RealGrid& p, double eta);

/// Greedy peak picking: repeatedly the strongest unclaimed masked cell that
/// is a strict local maximum in its circular 3x3 neighborhood; claiming a
/// peak suppresses the neighborhood. Ties break on (delay, doppler) order.
std::vector<Detection> extract_peaks(const RealGrid& p, const std::vector<std::uint8_t>& mask,
                                     std::size_t max_targets, const WaveformConfig& cfg);

/// Bin-to-physics mapping (velocity uses the symbol duration Ts).
void bins_to_physics(Detection& det, const WaveformConfig& cfg);

/// Robust noise-power estimate from the periodogram floor: median cell over
/// ln(2) (exponential-tail median). Used by the --estimate-noise mode.
double estimate_noise_power(const RealGrid& p, double window_power_factor);

}  // namespace ofdmradar
