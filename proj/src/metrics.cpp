#include "ofdmradar/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "ofdmradar/errors.hpp"
#include "ofdmradar/estimation.hpp"
#include "ofdmradar/fft.hpp"
#include "ofdmradar/sft.hpp"

namespace ofdmradar {
namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct MatchStats {
    double sum_sq_range = 0.0;
    double sum_sq_velocity = 0.0;
    std::size_t misses = 0;
    std::size_t truths = 0;
};

/// Greedy nearest-neighbor matching in resolution-normalized coordinates,
/// miss penalties d_max / v_un/2, matched errors capped at the penalties.
void match_detections(const std::vector<Detection>& dets, std::span<const RadarTarget> truths,
                      const WaveformConfig& w, MatchStats& stats) {
    const Resolutions res = resolutions(w);
    const double pen_r = res.cp_range_limit_m;
    const double pen_v = res.unambiguous_velocity_mps / 2.0;
    std::vector<bool> det_used(dets.size(), false);
    std::vector<bool> truth_used(truths.size(), false);
    for (std::size_t round = 0; round < std::min(dets.size(), truths.size()); ++round) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < truths.size(); ++i) {
            if (truth_used[i]) continue;
            for (std::size_t j = 0; j < dets.size(); ++j) {
                if (det_used[j]) continue;
                const double dr = (truths[i].range_m - dets[j].range_m) / res.range_resolution_m;
                const double dv =
                    (truths[i].velocity_mps - dets[j].velocity_mps) / res.velocity_resolution_mps;
                const double d = dr * dr + dv * dv;
                if (d < best) { best = d; bi = i; bj = j; }
            }
        }
        if (!std::isfinite(best)) break;
        truth_used[bi] = true;
        det_used[bj] = true;
        const double er = std::min(std::abs(truths[bi].range_m - dets[bj].range_m), pen_r);
        const double ev =
            std::min(std::abs(truths[bi].velocity_mps - dets[bj].velocity_mps), pen_v);
        stats.sum_sq_range += er * er;
        stats.sum_sq_velocity += ev * ev;
    }
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (!truth_used[i]) {
            stats.misses += 1;
            stats.sum_sq_range += pen_r * pen_r;
            stats.sum_sq_velocity += pen_v * pen_v;
        }
    }
    stats.truths += truths.size();
}

}  // namespace

double papr_db(std::span<const cplx> stream) {
    if (stream.empty()) throw ConfigError("papr: empty stream");
    double peak = 0.0, mean = 0.0;
    for (const auto& v : stream) {
        const double p = std::norm(v);
        peak = std::max(peak, p);
        mean += p;
    }
    mean /= double(stream.size());
    if (mean == 0.0) throw ConfigError("papr: zero-power stream");
    return 10.0 * std::log10(peak / mean);
}

std::vector<RmseRow> rmse_sweep(const SimulationConfig& scenario, EstimatorKind estimator,
                                std::span<const double> snr_grid_db, std::size_t trials,
                                std::uint64_t seed) {
    if (trials == 0) throw ConfigError("rmse_sweep: trials must be >= 1");
    SimulationConfig cfg = scenario;
    cfg.estimator.kind = estimator;
    cfg.detector.max_targets = scenario.targets.size();
    std::vector<RmseRow> rows;
    for (double snr : snr_grid_db) {
        cfg.channel.snr_db = snr;
        MatchStats stats;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto res = run_pipeline(cfg, derive_seed(seed, t));
            match_detections(res.detections, cfg.targets, cfg.waveform, stats);
        }
        RmseRow row;
        row.snr_db = snr;
        row.estimator = to_string(estimator);
        row.range_rmse_m = std::sqrt(stats.sum_sq_range / double(stats.truths));
        row.velocity_rmse_mps = std::sqrt(stats.sum_sq_velocity / double(stats.truths));
        row.miss_rate = double(stats.misses) / double(stats.truths);
        row.trials = trials;
        rows.push_back(row);
    }
    return rows;
}

std::vector<MseRow> mse_sweep(const SimulationConfig& scenario, EstimatorKind estimator,
                              std::span<const double> snr_grid_db, std::size_t trials,
                              std::uint64_t seed) {
    if (trials == 0) throw ConfigError("mse_sweep: trials must be >= 1");
    SimulationConfig cfg = scenario;
    cfg.estimator.kind = estimator;
    std::vector<MseRow> rows;
    for (double snr : snr_grid_db) {
        cfg.channel.snr_db = snr;
        double acc = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const std::uint64_t ts = derive_seed(seed, t);
            ComplexGrid x = make_random_frame(cfg.waveform, derive_seed(ts, 0x667261));
            ComplexGrid x_tx = x;
            if (estimator == EstimatorKind::ZcpLs)
                x_tx = precode(x, zc_matrix_cached(cfg.estimator.zcp));
            auto [y, realization] = apply_channel(x_tx, cfg.targets, cfg.waveform, snr, ts,
                                                  cfg.channel.amplitude_mode);
            const ComplexGrid h = estimate_channel(y, x_tx, cfg);
            acc += channel_mse(h, true_channel(realization, cfg.waveform));
        }
        rows.push_back({snr, to_string(estimator), acc / double(trials)});
    }
    return rows;
}

std::vector<BenchRow> bench_estimators(const SimulationConfig& base,
                                       std::span<const std::size_t> sizes, std::size_t k_targets,
                                       std::size_t repeats, std::uint64_t seed) {
    std::vector<BenchRow> rows;
    if (repeats < 1) throw ConfigError("bench: repeats must be >= 1");
    const double bandwidth = base.waveform.bandwidth_hz();
    for (std::size_t n : sizes) {
        SimulationConfig cfg = base;
        cfg.waveform.n_subcarriers = n;
        cfg.waveform.subcarrier_spacing_hz = bandwidth / double(n);
        cfg.waveform.n_cp = n / 4;
        cfg.waveform.n_prime = n;
        cfg.waveform.m_prime = cfg.waveform.n_symbols;
        cfg.detector.max_targets = k_targets;
        cfg.targets.clear();

        // K distinct on-bin targets inside the CP window and velocity bound
        Rng rng(derive_seed(seed, n));
        const Resolutions res = resolutions(cfg.waveform);
        const long max_doppler =
            std::max<long>(1, long(kVelocityMargin * res.velocity_model_bound_mps /
                                   res.velocity_resolution_mps) -
                                  1);
        std::vector<long> used_delay, used_doppler;
        while (cfg.targets.size() < k_targets) {
            const long db = 1 + long(rng.uniform_int(cfg.waveform.n_cp - 2));
            const long vb = long(rng.uniform_int(2 * max_doppler + 1)) - max_doppler;
            bool dup = false;
            for (std::size_t i = 0; i < used_delay.size(); ++i)
                if (std::abs(used_delay[i] - db) < 2 || std::abs(used_doppler[i] - vb) < 2)
                    dup = true;
            if (dup) continue;
            used_delay.push_back(db);
            used_doppler.push_back(vb);
            RadarTarget t;
            t.range_m = kSpeedOfLight * double(db) /
                        (2.0 * double(n) * cfg.waveform.subcarrier_spacing_hz);
            t.velocity_mps = kSpeedOfLight * double(vb) /
                             (2.0 * cfg.waveform.carrier_hz * double(cfg.waveform.n_symbols) *
                              cfg.waveform.symbol_time());
            cfg.targets.push_back(t);
        }

        // shared input: frame, channel, LS channel estimate
        const std::uint64_t run_seed = derive_seed(seed, n * 31 + 7);
        const ComplexGrid x = make_random_frame(cfg.waveform, derive_seed(run_seed, 0x667261));
        auto [y, realization] = apply_channel(x, cfg.targets, cfg.waveform, cfg.channel.snr_db,
                                              run_seed, cfg.channel.amplitude_mode);
        const ComplexGrid h = spectral_division(y, x);
        double inv_acc = 0.0;
        for (const auto& v : x.storage()) inv_acc += 1.0 / std::norm(v);
        const double sigma2_h = realization.sigma2 * inv_acc / double(x.size());

        const Window2d window =
            make_window(cfg.waveform.window, cfg.waveform.n_subcarriers, cfg.waveform.n_symbols);
        const double eta_factor = window.power_factor();

        auto run_periodogram = [&]() {
            RealGrid p = periodogram(h, window, cfg.waveform.n_prime, cfg.waveform.m_prime);
            const double eta = detection_threshold(sigma2_h, cfg.waveform.pfa, eta_factor);
            const auto mask = threshold_mask(p, eta);
            return extract_peaks(p, mask, k_targets, cfg.waveform);
        };
        SftConfig scfg;
        scfg.seed = derive_seed(run_seed, 0x736674);
        scfg.sigma2 = sigma2_h;
        scfg.pfa = cfg.waveform.pfa;
        std::size_t samples_used = 0;
        auto run_sft = [&]() {
            const SparseSpectrum spec = sft_iterate(h, scfg);
            samples_used = spec.samples_used;
            return detections_from_spectrum(spec, h.rows(), h.cols(), cfg.waveform, sigma2_h,
                                            cfg.waveform.pfa, k_targets);
        };

        // support sets must agree before any timing is reported
        const auto det_p = run_periodogram();
        const auto det_s = run_sft();
        auto support = [](const std::vector<Detection>& d) {
            std::vector<std::pair<long, long>> s;
            for (const auto& x_ : d) s.emplace_back(x_.delay_bin, x_.doppler_bin);
            std::sort(s.begin(), s.end());
            return s;
        };
        if (support(det_p) != support(det_s))
            throw std::runtime_error("bench: detector support sets differ at N=" +
                                     std::to_string(n));

        std::vector<double> tp, ts_;
        for (std::size_t r = 0; r < repeats; ++r) {
            double t0 = now_ms();
            auto d1 = run_periodogram();
            tp.push_back(now_ms() - t0);
            t0 = now_ms();
            auto d2 = run_sft();
            ts_.push_back(now_ms() - t0);
        }
        BenchRow row;
        row.n = n;
        row.m = cfg.waveform.n_symbols;
        row.k = k_targets;
        row.periodogram_ms = median_of(tp);
        row.sft_ms = median_of(ts_);
        row.speedup = row.periodogram_ms / row.sft_ms;
        row.samples_used = samples_used;
        rows.push_back(row);
    }
    return rows;
}

SpectrumResult symbol_spectrum(const SimulationConfig& scenario, bool with_precoding,
                               bool with_hpa, std::size_t frames, std::uint64_t seed) {
    if (frames == 0) throw ConfigError("symbol_spectrum: frames must be >= 1");
    const WaveformConfig& w = scenario.waveform;
    const std::size_t n = w.n_subcarriers;
    const std::size_t m = w.n_symbols;
    const std::size_t os = 8;           // oversampling for out-of-band headroom
    const std::size_t len = os * n;     // time samples per symbol
    const std::size_t nfft = len;       // bins land exactly on subcarrier centers
    const std::size_t k0 = n / 4;       // the attributed QAM symbol slot
    const double df = w.subcarrier_spacing_hz;
    const double fs = df * double(len); // oversampled rate

    const ZcMatrix* zm = nullptr;
    ZcMatrix zm_store{with_precoding ? scenario.estimator.zcp : ZcParams{4, 1, 0}};
    if (with_precoding) {
        if (zm_store.side() != n && zm_store.side() * zm_store.side() != n)
            throw ConfigError("symbol_spectrum: zcp matrix side must equal N or sqrt(N)");
        zm = &zm_store;
    }

    // centered embedding: subcarrier k -> oversampled fft bin
    auto embed_bin = [&](std::size_t k) {
        const long idx = k < n / 2 ? long(k) : long(k) - long(n);
        return static_cast<std::size_t>((idx + long(len)) % long(len));
    };

    // symbol vector -> oversampled time signal (optionally precoded)
    auto synth = [&](const ComplexGrid& grid, std::vector<cplx>& time_all) {
        const ComplexGrid* tx = &grid;
        ComplexGrid pre;
        if (zm) {
            pre = precode(grid, *zm);
            tx = &pre;
        }
        time_all.assign(m * len, cplx(0, 0));
        std::vector<cplx> buf(len);
        for (std::size_t l = 0; l < m; ++l) {
            std::fill(buf.begin(), buf.end(), cplx(0, 0));
            for (std::size_t k = 0; k < n; ++k) buf[embed_bin(k)] = tx->at(k, l);
            fft::inverse(buf);
            const double sc = 1.0 / double(n);
            for (std::size_t i = 0; i < len; ++i) time_all[l * len + i] = buf[i] * sc;
        }
    };

    // receiver: per-symbol FFT, extract, deprecode, re-embed, back to time
    auto receive = [&](const std::vector<cplx>& time_all, std::vector<cplx>& out) {
        out.assign(m * len, cplx(0, 0));
        std::vector<cplx> buf(len);
        ComplexGrid rx(n, m, AxisTag::SubcarrierSymbol);
        for (std::size_t l = 0; l < m; ++l) {
            std::copy_n(&time_all[l * len], len, buf.begin());
            fft::forward(buf);
            for (std::size_t k = 0; k < n; ++k) rx.at(k, l) = buf[embed_bin(k)];
        }
        if (zm) rx = deprecode(rx, *zm);
        for (std::size_t l = 0; l < m; ++l) {
            std::fill(buf.begin(), buf.end(), cplx(0, 0));
            for (std::size_t k = 0; k < n; ++k) buf[embed_bin(k)] = rx.at(k, l);
            fft::inverse(buf);
            const double sc = 1.0 / double(len);
            for (std::size_t i = 0; i < len; ++i) out[l * len + i] = buf[i] * sc;
        }
    };

    std::vector<double> psd(nfft, 0.0);
    std::vector<cplx> t_full, t_zero, r_full, r_zero, seg(nfft);

    for (std::size_t f = 0; f < frames; ++f) {
        Rng rng(derive_seed(seed, f));
        ComplexGrid grid(n, m, AxisTag::SubcarrierSymbol);
        {
            const int order = w.qam_order;
            const auto table = qam_constellation(order);
            for (auto& v : grid.storage()) v = table[rng.uniform_int(table.size())];
        }
        ComplexGrid grid_zero = grid;
        for (std::size_t l = 0; l < m; ++l) grid_zero.at(k0, l) = cplx(0, 0);

        synth(grid, t_full);
        synth(grid_zero, t_zero);
        if (with_hpa) {
            const double mm = mean_modulus(t_full);  // operating point of the full frame
            t_full = hpa(t_full, 2.0, mm);
            t_zero = hpa(t_zero, 2.0, mm);
        }
        receive(t_full, r_full);
        receive(t_zero, r_zero);

        for (std::size_t l = 0; l < m; ++l) {
            for (std::size_t i = 0; i < len; ++i)
                seg[i] = r_full[l * len + i] - r_zero[l * len + i];
            fft::forward(seg.data(), nfft);
            for (std::size_t i = 0; i < nfft; ++i) psd[i] += std::norm(seg[i]);
        }
    }

    // center the axis on the attributed subcarrier
    const double f0 = (k0 < n / 2 ? double(k0) : double(k0) - double(n)) * df;
    const double bin_hz = fs / double(nfft);
    double total = 0.0, oob = 0.0, peak = 0.0;
    SpectrumResult out;
    out.rows.reserve(nfft);
    std::string variant = std::string(with_precoding ? "zcp" : "plain") + (with_hpa ? "+hpa" : "");
    for (std::size_t i = 0; i < nfft; ++i) {
        double fr = (i < nfft / 2 ? double(i) : double(i) - double(nfft)) * bin_hz - f0;
        // keep the relative axis inside the oversampled Nyquist span
        if (fr >= fs / 2) fr -= fs;
        if (fr < -fs / 2) fr += fs;
        total += psd[i];
        if (std::abs(fr) > df / 2.0) oob += psd[i];
        peak = std::max(peak, psd[i]);
        out.rows.push_back({fr, psd[i], variant});
    }
    if (total <= 0.0 || peak <= 0.0) throw ConfigError("symbol_spectrum: zero signal");
    for (auto& r : out.rows)
        r.power_db = 10.0 * std::log10(std::max(r.power_db, peak * 1e-30) / peak);
    std::sort(out.rows.begin(), out.rows.end(),
              [](const SpectrumRow& a, const SpectrumRow& b) { return a.freq_hz < b.freq_hz; });
    out.out_of_band_fraction = oob / total;
    return out;
}

}  // namespace ofdmradar
