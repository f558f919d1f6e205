#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ofdmradar/grid.hpp"
#include "ofdmradar/waveform.hpp"

namespace ofdmradar {

/// Ground-truth reflector. phase_rad = NaN means "draw a random phase".
struct RadarTarget {
    double range_m = 0.0;
    double velocity_mps = 0.0;  // signed, positive = receding
    double rcs_m2 = 1.0;
    double phase_rad = std::numeric_limits<double>::quiet_NaN();

    bool has_fixed_phase() const { return phase_rad == phase_rad; }
};

/// Fraction of the ICI bound that |v| may reach; quantifies the "much
/// smaller than" condition of the narrowband model.
inline constexpr double kVelocityMargin = 0.1;

struct TargetParams {
    double gain;        // g (Friis) or 1 in normalized mode
    double delay_s;     // tau = 2 d / c
    double doppler_hz;  // f_D = 2 v fc / c
    double phase_rad;   // phi
    double time_scale;  // B = 2 v / c, carried but not applied
};

enum class AmplitudeMode { Normalized, Friis };

struct ChannelRealization {
    std::vector<TargetParams> targets;
    double sigma2 = 0.0;       // complex noise variance per grid cell
    std::uint64_t seed = 0;
    AmplitudeMode mode = AmplitudeMode::Normalized;
};

/// Friis attenuation, round-trip delay and Doppler shift for one target.
TargetParams derive_params(const RadarTarget& target, const WaveformConfig& cfg);

/// Throws ModelValidityError when a target violates the CP window or the
/// narrowband velocity bound.
void validate_targets(std::span<const RadarTarget> targets, const WaveformConfig& cfg);

/// Frequency-domain multi-target channel plus calibrated AWGN:
///   Y[k,l] = sum_p g_p X[k,l] e^{-j2pi k df tau_p} e^{+j2pi l Ts fD_p} e^{j phi_p} + Z
/// SNR convention: sigma2 = (sum_p g_p^2) * mean|X|^2 / 10^(snr_db/10).
/// snr_db = +inf disables noise. Deterministic given seed.
std::pair<ComplexGrid, ChannelRealization> apply_channel(
    const ComplexGrid& x, std::span<const RadarTarget> targets, const WaveformConfig& cfg,
    double snr_db, std::uint64_t seed, AmplitudeMode mode = AmplitudeMode::Normalized);

/// Analytic noise-free channel grid for the same realization (the MSE oracle).
ComplexGrid true_channel(const ChannelRealization& realization, const WaveformConfig& cfg);

}  // namespace ofdmradar
