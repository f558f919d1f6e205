#include "ofdmradar/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ofdmradar/errors.hpp"
#include "ofdmradar/estimation.hpp"
#include "ofdmradar/fft.hpp"
#include "ofdmradar/sft.hpp"

namespace ofdmradar {
namespace {

/// Post-division noise power in H: sigma2 * mean(1/|X|^2) over the
/// transmitted grid. Unit-modulus grids give sigma2 back; QAM and precoded
/// grids inflate it.
double division_noise_power(double sigma2, const ComplexGrid& x_tx) {
    if (sigma2 <= 0.0) return 0.0;
    double inv_acc = 0.0;
    for (const auto& v : x_tx.storage()) inv_acc += 1.0 / std::norm(v);
    return sigma2 * inv_acc / double(x_tx.size());
}

/// Robust noise estimate from one slice spectrum (median bin over ln 2).
double estimate_noise_from_slice(const ComplexGrid& h, std::uint64_t seed) {
    const std::size_t n = h.rows();
    const std::size_t m = h.cols();
    const std::size_t q = std::lcm(n, m);
    Rng rng(seed);
    long v1 = 1, v2 = 1;
    do {
        v1 = static_cast<long>(1 + rng.uniform_int(n > 1 ? n - 1 : 1));
        v2 = static_cast<long>(1 + rng.uniform_int(m > 1 ? m - 1 : 1));
    } while (!slope_admissible(v1, v2, n, m));
    auto s = sample_slice(h, {0, 0}, {v1, v2}, q);
    fft::forward(s);
    std::vector<double> p(q);
    for (std::size_t i = 0; i < q; ++i) p[i] = std::norm(s[i]) / (double(q) * double(q));
    const std::size_t mid = p.size() / 2;
    std::nth_element(p.begin(), p.begin() + mid, p.end());
    return p[mid] * double(q) / 0.6931471805599453;
}

}  // namespace

ComplexGrid estimate_channel(const ComplexGrid& y, const ComplexGrid& x_transmitted,
                             const SimulationConfig& cfg) {
    switch (cfg.estimator.kind) {
        case EstimatorKind::Ls:
        case EstimatorKind::ZcpLs:
            // zcp-ls divides by the precoded grid (the signal before the IFFT)
            return spectral_division(y, x_transmitted);
        case EstimatorKind::DftCe:
            return dft_ce(spectral_division(y, x_transmitted), cfg.waveform.n_cp);
    }
    throw ConfigError("unreachable estimator kind");
}

PipelineResult run_pipeline(const SimulationConfig& cfg,
                            std::optional<std::uint64_t> seed_override, bool want_map) {
    const std::uint64_t seed = seed_override.value_or(cfg.channel.seed);
    const WaveformConfig& w = cfg.waveform;

    ComplexGrid x = make_random_frame(w, derive_seed(seed, 0x667261));
    ComplexGrid x_tx = x;
    if (cfg.estimator.kind == EstimatorKind::ZcpLs)
        x_tx = precode(x, zc_matrix_cached(cfg.estimator.zcp));

    auto [y, realization] =
        apply_channel(x_tx, cfg.targets, w, cfg.channel.snr_db, seed, cfg.channel.amplitude_mode);
    ComplexGrid h = estimate_channel(y, x_tx, cfg);

    PipelineResult res;
    res.realization = realization;

    // DFT-CE truncation does not change the per-cell noise inside the CP
    // window, so the same post-division noise power drives the threshold.
    const double sigma2_h = division_noise_power(realization.sigma2, x_tx);

    const Window2d window = make_window(w.window, w.n_subcarriers, w.n_symbols);

    if (cfg.detector.kind == DetectorKind::Periodogram || want_map) {
        RealGrid p = periodogram(h, window, w.n_prime, w.m_prime);
        if (cfg.detector.kind == DetectorKind::Periodogram) {
            double sigma2 = sigma2_h;
            if (cfg.detector.estimate_noise)
                sigma2 = estimate_noise_power(p, window.power_factor());
            res.sigma2_used = sigma2;
            res.threshold = detection_threshold(sigma2, w.pfa, window.power_factor());
            const auto mask = threshold_mask(p, res.threshold);
            res.detections = extract_peaks(p, mask, cfg.detector.max_targets, w);
        }
        if (want_map) res.map = std::move(p);
    }

    if (cfg.detector.kind == DetectorKind::FpsSft) {
        double sigma2 = sigma2_h;
        if (cfg.detector.estimate_noise)
            sigma2 = estimate_noise_from_slice(h, derive_seed(seed, 0x6e6573));
        SftConfig scfg;
        scfg.i_max = cfg.detector.sft_i_max;
        scfg.seed = derive_seed(seed, 0x736674);
        scfg.sigma2 = sigma2;
        scfg.pfa = w.pfa;
        res.sigma2_used = sigma2;
        res.threshold = detection_threshold(sigma2, w.pfa, 1.0);
        const SparseSpectrum spec = sft_iterate(h, scfg);
        res.sft_samples_used = spec.samples_used;
        res.sft_iterations = spec.iterations;
        res.detections = detections_from_spectrum(spec, h.rows(), h.cols(), w, sigma2, w.pfa,
                                                  cfg.detector.max_targets);
    }
    return res;
}

}  // namespace ofdmradar
