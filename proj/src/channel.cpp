#include "ofdmradar/channel.hpp"

#include <cmath>

#include "ofdmradar/errors.hpp"
#include "ofdmradar/rng.hpp"

namespace ofdmradar {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Per-target phase ramps along both grid axes, accumulated into out.
void accumulate_target(ComplexGrid& out, const ComplexGrid& x, const TargetParams& p,
                       const WaveformConfig& cfg, std::vector<cplx>& delay_ph,
                       std::vector<cplx>& doppler_ph) {
    const std::size_t n = out.rows();
    const std::size_t m = out.cols();
    const double df = cfg.subcarrier_spacing_hz;
    const double ts = cfg.symbol_time();
    for (std::size_t k = 0; k < n; ++k)
        delay_ph[k] = std::polar(1.0, -kTwoPi * double(k) * df * p.delay_s);
    for (std::size_t l = 0; l < m; ++l)
        doppler_ph[l] = std::polar(1.0, kTwoPi * double(l) * ts * p.doppler_hz);
    const cplx b = std::polar(p.gain, p.phase_rad);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx row_factor = b * delay_ph[k];
        for (std::size_t l = 0; l < m; ++l)
            out.at(k, l) += row_factor * doppler_ph[l] * x.at(k, l);
    }
}

}  // namespace

TargetParams derive_params(const RadarTarget& target, const WaveformConfig& cfg) {
    if (target.range_m <= 0.0)
        throw ModelValidityError("target range must be positive (singular attenuation at d=0)");
    const double c = kSpeedOfLight;
    const double fc = cfg.carrier_hz;
    const double four_pi = 4.0 * 3.14159265358979323846;
    TargetParams p;
    p.gain = std::sqrt(c * target.rcs_m2 /
                       (four_pi * four_pi * four_pi * std::pow(target.range_m, 4) * fc * fc));
    p.delay_s = 2.0 * target.range_m / c;
    p.doppler_hz = 2.0 * target.velocity_mps * fc / c;
    p.phase_rad = target.has_fixed_phase() ? target.phase_rad : 0.0;
    p.time_scale = 2.0 * target.velocity_mps / c;
    return p;
}

void validate_targets(std::span<const RadarTarget> targets, const WaveformConfig& cfg) {
    const Resolutions res = resolutions(cfg);
    for (const auto& t : targets) {
        if (t.range_m <= 0.0) throw ModelValidityError("target range must be positive");
        if (t.range_m > res.cp_range_limit_m)
            throw ModelValidityError("target beyond the CP delay window (" +
                                     std::to_string(t.range_m) + " m > " +
                                     std::to_string(res.cp_range_limit_m) + " m)");
        if (std::abs(t.velocity_mps) > kVelocityMargin * res.velocity_model_bound_mps)
            throw ModelValidityError("target velocity violates the narrowband bound (" +
                                     std::to_string(t.velocity_mps) + " m/s)");
    }
}

std::pair<ComplexGrid, ChannelRealization> apply_channel(
    const ComplexGrid& x, std::span<const RadarTarget> targets, const WaveformConfig& cfg,
    double snr_db, std::uint64_t seed, AmplitudeMode mode) {
    validate_targets(targets, cfg);
    const std::size_t n = x.rows();
    const std::size_t m = x.cols();

    ChannelRealization real;
    real.seed = seed;
    real.mode = mode;
    Rng phase_rng(derive_seed(seed, 0x70686173));  // phases first, fixed order
    double total_gain2 = 0.0;
    for (const auto& t : targets) {
        TargetParams p = derive_params(t, cfg);
        if (mode == AmplitudeMode::Normalized) p.gain = 1.0;
        if (!t.has_fixed_phase()) p.phase_rad = phase_rng.uniform(0.0, kTwoPi);
        total_gain2 += p.gain * p.gain;
        real.targets.push_back(p);
    }

    ComplexGrid y(n, m, x.tag());
    std::vector<cplx> delay_ph(n), doppler_ph(m);
    for (const auto& p : real.targets) accumulate_target(y, x, p, cfg, delay_ph, doppler_ph);

    if (std::isfinite(snr_db)) {
        const double snr_lin = std::pow(10.0, snr_db / 10.0);
        const double ref_gain2 = targets.empty() ? 1.0 : total_gain2;
        real.sigma2 = ref_gain2 * x.mean_power() / snr_lin;
        const double sd = std::sqrt(real.sigma2 / 2.0);
        Rng noise_rng(derive_seed(seed, 0x6e6f6973));
        for (auto& v : y.storage()) v += cplx(sd * noise_rng.normal(), sd * noise_rng.normal());
    }
    return {std::move(y), std::move(real)};
}

ComplexGrid true_channel(const ChannelRealization& realization, const WaveformConfig& cfg) {
    const std::size_t n = cfg.n_subcarriers;
    const std::size_t m = cfg.n_symbols;
    ComplexGrid ones(n, m, AxisTag::SubcarrierSymbol);
    for (auto& v : ones.storage()) v = cplx(1.0, 0.0);
    ComplexGrid h(n, m, AxisTag::SubcarrierSymbol);
    std::vector<cplx> delay_ph(n), doppler_ph(m);
    for (const auto& p : realization.targets) accumulate_target(h, ones, p, cfg, delay_ph, doppler_ph);
    return h;
}

}  // namespace ofdmradar
