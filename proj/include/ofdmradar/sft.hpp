#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ofdmradar/grid.hpp"
#include "ofdmradar/periodogram.hpp"
#include "ofdmradar/waveform.hpp"

namespace ofdmradar {

/// Iterative sparse 2-D spectrum estimation settings.
struct SftConfig {
    std::size_t i_max = 10;
    /// Per-bin power threshold on the 1/Q-scaled slice spectrum.
    /// 0 = derive from sigma2/pfa plus a relative floor.
    double detect_threshold = 0.0;
    std::uint64_t seed = 0;
    double sigma2 = 0.0;  // known noise variance per grid cell
    double pfa = 1e-2;
    /// Offset slices are evaluated at candidate bins from every
    /// decimation-th sample (exact for tones that do not alias mod
    /// Q/decimation). The factor backs off automatically when the
    /// phase-decode noise would endanger the weakest candidate; g = 1 uses
    /// plain Q-point DFTs of both offset slices.
    std::size_t decimation = 8;
    /// Joint distance (in bins) allowed between the phase decode and the
    /// congruence-consistent lattice point it snaps to, in units of 1/5th;
    /// the default 0.25 permits 1.25 bins.
    double frac_tol = 0.25;
    double amp_tol = 0.35;   // relative spread of the three slice readings
};

struct SparseEntry {
    long k = 0;  // frequency index along the subcarrier axis, [0, N)
    long l = 0;  // frequency index along the symbol axis, [0, M)
    cplx amplitude;
};

struct SparseSpectrum {
    std::vector<SparseEntry> entries;  // unique by (k,l)
    double residual_energy = 0.0;      // mean per-sample power left in the last slice
    bool converged = false;
    std::size_t iterations = 0;
    std::size_t samples_used = 0;      // grid cells read (<= 3 Q iterations)
};

/// Discrete line through the grid: s_q = H[(a1 + v1 q) mod N, (a2 + v2 q) mod M],
/// q = 0..Q-1. The slope must make the line visit Q distinct cells:
/// lcm(N / gcd(v1, N), M / gcd(v2, M)) == Q.
std::vector<cplx> sample_slice(const ComplexGrid& h, std::pair<long, long> offset,
                               std::pair<long, long> slope, std::size_t q_len);

/// True when the slope satisfies the distinct-cell condition above.
bool slope_admissible(long v1, long v2, std::size_t n, std::size_t m);

/// Iterative projection-slice recovery of the K dominant 2-D tones of H,
/// modeled as H[n,m] = sum A e^{j2pi(n k/N + m l/M)}. Per iteration: one
/// random line, reference slice FFT, per-candidate phase decoding against
/// the two +1-offset slices, consistency gating, analytic subtraction.
SparseSpectrum sft_iterate(const ComplexGrid& h, const SftConfig& cfg);

/// Maps recovered tones to periodogram-compatible detections: tone (k,l)
/// lands on delay bin (N-k) mod N and fft-shifted Doppler bin l; |A|^2 N M
/// is compared against the rectangular-window cell threshold.
std::vector<Detection> detections_from_spectrum(const SparseSpectrum& spec, std::size_t n,
                                                std::size_t m, const WaveformConfig& cfg,
                                                double sigma2, double pfa,
                                                std::size_t max_targets);

/// Convenience wrapper: sft_iterate followed by detections_from_spectrum.
std::vector<Detection> sft_detect(const ComplexGrid& h, const WaveformConfig& cfg,
                                  const SftConfig& sft_cfg, double sigma2, double pfa,
                                  std::size_t max_targets);

}  // namespace ofdmradar
