#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ofdmradar/grid.hpp"
#include "ofdmradar/rng.hpp"

namespace ofdmradar {

/// Propagation speed used throughout (Table-style round value, not CODATA).
inline constexpr double kSpeedOfLight = 3.0e8;

enum class WindowKind { Rectangular, Hamming };

/// OFDM numerology. All derived quantities (durations, resolutions, limits)
/// hang off this record.
struct WaveformConfig {
    std::size_t n_subcarriers = 2048;   // N
    std::size_t n_symbols = 560;        // M
    double subcarrier_spacing_hz = 240e3;  // delta-f
    double carrier_hz = 77e9;           // fc
    std::size_t n_cp = 512;             // CP length in samples
    int qam_order = 16;                 // {4,16,64,256}
    std::size_t n_prime = 2048;         // periodogram delay-axis length N'
    std::size_t m_prime = 560;          // periodogram Doppler-axis length M'
    WindowKind window = WindowKind::Hamming;
    double pfa = 1e-2;

    double useful_time() const { return 1.0 / subcarrier_spacing_hz; }           // T
    double sample_time() const { return useful_time() / double(n_subcarriers); } // T0
    double cp_time() const { return double(n_cp) * sample_time(); }              // Tcp
    double symbol_time() const { return useful_time() + cp_time(); }             // Ts
    std::size_t samples_per_symbol() const { return n_subcarriers + n_cp; }      // Ns
    double bandwidth_hz() const { return subcarrier_spacing_hz * double(n_subcarriers); }

    /// Throws ConfigError when any invariant is broken.
    void validate() const;
};

struct Resolutions {
    double range_resolution_m;        // delta-d = c / (2 N df)
    double velocity_resolution_mps;   // delta-v = c / (2 M fc Ts)
    double unambiguous_range_m;       // d_un = c / (2 df)
    double unambiguous_velocity_mps;  // v_un = c / (2 fc Ts)
    double cp_range_limit_m;          // d_max = c Tcp / 2
    double velocity_model_bound_mps;  // v bound from the ICI condition, c df / (2 fc)
};

Resolutions resolutions(const WaveformConfig& cfg);

/// Gray-mapped square QAM, unit average power. Bit count must be a multiple
/// of log2(order).
std::vector<cplx> map_qam(std::span<const std::uint8_t> bits, int order);

/// Full constellation of the given order, indexed by the Gray-coded word.
std::vector<cplx> qam_constellation(int order);

/// Random unit-modulus QPSK pilot row of length N.
std::vector<cplx> make_pilot_row(const WaveformConfig& cfg, Rng& rng);

/// Random QAM payload covering N x (M-1) cells, drawn as random bits and
/// mapped through map_qam.
std::vector<cplx> make_payload(const WaveformConfig& cfg, Rng& rng);

/// Assembles the frequency-domain frame X: column 0 = pilots, the rest is
/// payload. Rejects zero-valued cells (they would break spectral division).
ComplexGrid build_frame(const WaveformConfig& cfg, std::span<const cplx> payload,
                        std::span<const cplx> pilots);

/// Convenience: seeded pilot+payload frame.
ComplexGrid make_random_frame(const WaveformConfig& cfg, std::uint64_t seed);

/// Per-symbol inverse DFT (1/N scaling) with cyclic prefix. Output length
/// M * (N + Ncp).
std::vector<cplx> ofdm_modulate(const ComplexGrid& x, const WaveformConfig& cfg);

/// Exact inverse of ofdm_modulate for a clean stream: CP strip + forward DFT.
ComplexGrid ofdm_demodulate(std::span<const cplx> stream, const WaveformConfig& cfg);

}  // namespace ofdmradar
