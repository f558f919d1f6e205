#include "ofdmradar/periodogram.hpp"

#include <algorithm>
#include <cmath>

#include "ofdmradar/errors.hpp"
#include "ofdmradar/fft.hpp"

namespace ofdmradar {

double Window2d::power_factor() const {
    double sk = 0.0, sl = 0.0;
    for (double v : subcarrier) sk += v * v;
    for (double v : symbol) sl += v * v;
    return sk * sl / (double(subcarrier.size()) * double(symbol.size()));
}

double Window2d::coherent_gain() const {
    double sk = 0.0, sl = 0.0;
    for (double v : subcarrier) sk += v;
    for (double v : symbol) sl += v;
    return (sk * sk) * (sl * sl) / (double(subcarrier.size()) * double(symbol.size()));
}

Window2d make_window(WindowKind kind, std::size_t n, std::size_t m) {
    Window2d w;
    w.subcarrier.assign(n, 1.0);
    w.symbol.assign(m, 1.0);
    if (kind == WindowKind::Hamming) {
        constexpr double two_pi = 6.283185307179586476925286766559;
        for (std::size_t k = 0; k < n; ++k)
            w.subcarrier[k] = 0.54 - 0.46 * std::cos(two_pi * double(k) / double(n - 1));
        for (std::size_t l = 0; l < m; ++l)
            w.symbol[l] = 0.54 - 0.46 * std::cos(two_pi * double(l) / double(m - 1));
    }
    return w;
}

RealGrid periodogram(const ComplexGrid& h, const Window2d& window, std::size_t n_prime,
                     std::size_t m_prime) {
    const std::size_t n = h.rows();
    const std::size_t m = h.cols();
    if (n_prime < n || m_prime < m) throw ConfigError("periodogram: N' >= N and M' >= M required");
    if (window.subcarrier.size() != n || window.symbol.size() != m)
        throw ConfigError("periodogram: window shape mismatch");

    // one reusable transform buffer; repeated calls of the same shape are hot
    thread_local std::vector<cplx> full;
    full.assign(n_prime * m_prime, cplx(0.0, 0.0));

    // Doppler pass: window + zero-pad each subcarrier row to M', forward DFT.
    for (std::size_t k = 0; k < n; ++k) {
        const double wk = window.subcarrier[k];
        cplx* dst = &full[k * m_prime];
        for (std::size_t l = 0; l < m; ++l) dst[l] = h.at(k, l) * (wk * window.symbol[l]);
    }
    fft::forward_rows(full.data(), n, m_prime);

    // Delay pass: the zero rows n..N'-1 are the padding, inverse DFT columns.
    fft::inverse_cols(full.data(), n_prime, m_prime);

    // |.|^2 / (N M), fft-shift the Doppler axis so bin 0 is centered.
    RealGrid p(n_prime, m_prime);
    const double scale = 1.0 / (double(n) * double(m));
    const std::size_t half = m_prime / 2;
    for (std::size_t r = 0; r < n_prime; ++r) {
        const cplx* src = &full[r * m_prime];
        double* dst = &p.at(r, 0);
        for (std::size_t s = 0; s < m_prime; ++s) {
            const std::size_t shifted = (s + half) % m_prime;
            dst[shifted] = std::norm(src[s]) * scale;
        }
    }
    return p;
}

double detection_threshold(double sigma2, double pfa, double window_power_factor) {
    if (sigma2 < 0.0) throw ConfigError("threshold: sigma2 must be >= 0");
    if (!(pfa > 0.0 && pfa <= 1.0)) throw ConfigError("threshold: pfa must lie in (0,1]");
    return -sigma2 * std::log(pfa) * window_power_factor;
}

std::vector<std::uint8_t> threshold_mask(const RealGrid& p, double eta) {
    std::vector<std::uint8_t> mask(p.size(), 0);
    for (std::size_t i = 0; i < p.size(); ++i) mask[i] = p.storage()[i] >= eta ? 1 : 0;
    return mask;
}

std::vector<Detection> extract_peaks(const RealGrid& p, const std::vector<std::uint8_t>& mask,
                                     std::size_t max_targets, const WaveformConfig& cfg) {
    if (mask.size() != p.size()) throw ConfigError("extract_peaks: mask shape mismatch");
    const std::size_t rows = p.rows();
    const std::size_t cols = p.cols();

    std::vector<std::size_t> cells;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) cells.push_back(i);
    std::sort(cells.begin(), cells.end(), [&](std::size_t a, std::size_t b) {
        const double pa = p.storage()[a], pb = p.storage()[b];
        if (pa != pb) return pa > pb;
        return a < b;  // row-major order == (delay, doppler) lexicographic
    });

    std::vector<std::uint8_t> claimed(p.size(), 0);
    std::vector<Detection> out;
    for (std::size_t idx : cells) {
        if (out.size() >= max_targets) break;
        if (claimed[idx]) continue;
        const std::size_t r = idx / cols;
        const std::size_t c = idx % cols;
        const double v = p.storage()[idx];
        const auto wrap = [](std::size_t i, int d, std::size_t len) {
            return static_cast<std::size_t>((long(i) + d + long(len)) % long(len));
        };
        bool is_max = true;
        for (int dr = -1; dr <= 1 && is_max; ++dr) {
            if (dr != 0 && rows == 1) continue;
            for (int dc = -1; dc <= 1; ++dc) {
                if (dc != 0 && cols == 1) continue;
                if (dr == 0 && dc == 0) continue;
                if (p.at(wrap(r, dr, rows), wrap(c, dc, cols)) >= v) { is_max = false; break; }
            }
        }
        if (!is_max) continue;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc)
                claimed[wrap(r, dr, rows) * cols + wrap(c, dc, cols)] = 1;
        Detection det;
        det.delay_bin = static_cast<long>(r);
        det.doppler_bin = doppler_bin_of_col(c, cols);
        det.peak_power = v;
        bins_to_physics(det, cfg);
        out.push_back(det);
    }
    return out;
}

void bins_to_physics(Detection& det, const WaveformConfig& cfg) {
    const double c = kSpeedOfLight;
    det.range_m = c * double(det.delay_bin) /
                  (2.0 * double(cfg.n_prime) * cfg.subcarrier_spacing_hz);
    det.velocity_mps = c * double(det.doppler_bin) /
                       (2.0 * cfg.carrier_hz * double(cfg.m_prime) * cfg.symbol_time());
}

double estimate_noise_power(const RealGrid& p, double window_power_factor) {
    std::vector<double> vals(p.storage());
    const std::size_t mid = vals.size() / 2;
    std::nth_element(vals.begin(), vals.begin() + mid, vals.end());
    // exponential cell power: median = sigma2_effective * ln 2
    return vals[mid] / 0.6931471805599453 / window_power_factor;
}

}  // namespace ofdmradar
