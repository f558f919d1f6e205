#include "ofdmradar/waveform.hpp"

#include <cmath>
#include <cstdint>

#include "ofdmradar/errors.hpp"
#include "ofdmradar/fft.hpp"

namespace ofdmradar {
namespace {

int bits_per_symbol(int order) {
    switch (order) {
        case 4: return 2;
        case 16: return 4;
        case 64: return 6;
        case 256: return 8;
        default: throw ConfigError("qam_order must be one of {4,16,64,256}");
    }
}

int gray_decode(unsigned g) {
    unsigned b = 0;
    for (; g; g >>= 1) b ^= g;
    return static_cast<int>(b);
}

}  // namespace

void WaveformConfig::validate() const {
    if (n_subcarriers == 0 || n_symbols == 0) throw ConfigError("N and M must be positive");
    if (subcarrier_spacing_hz <= 0) throw ConfigError("subcarrier spacing must be positive");
    if (carrier_hz <= 0) throw ConfigError("carrier frequency must be positive");
    if (n_cp >= n_subcarriers) throw ConfigError("N_cp must be smaller than N");
    bits_per_symbol(qam_order);
    if (n_prime < n_subcarriers) throw ConfigError("N' must be >= N");
    if (m_prime < n_symbols) throw ConfigError("M' must be >= M");
    if (!(pfa > 0.0 && pfa < 1.0)) throw ConfigError("P_fa must lie in (0,1)");
}

Resolutions resolutions(const WaveformConfig& cfg) {
    const double c = kSpeedOfLight;
    const double df = cfg.subcarrier_spacing_hz;
    const double fc = cfg.carrier_hz;
    const double ts = cfg.symbol_time();
    Resolutions r;
    r.range_resolution_m = c / (2.0 * double(cfg.n_subcarriers) * df);
    r.velocity_resolution_mps = c / (2.0 * double(cfg.n_symbols) * fc * ts);
    r.unambiguous_range_m = c / (2.0 * df);
    r.unambiguous_velocity_mps = c / (2.0 * fc * ts);
    r.cp_range_limit_m = c * cfg.cp_time() / 2.0;
    r.velocity_model_bound_mps = c * df / (2.0 * fc);
    return r;
}

std::vector<cplx> qam_constellation(int order) {
    const int m = bits_per_symbol(order);
    const int half = m / 2;
    const int levels = 1 << half;
    // unit average power: E{|a|^2} = 2 (L^2 - 1) / 3 before scaling
    const double scale = 1.0 / std::sqrt(2.0 * (double(levels) * levels - 1.0) / 3.0);
    std::vector<cplx> points(static_cast<std::size_t>(order));
    for (int w = 0; w < order; ++w) {
        const unsigned gi = static_cast<unsigned>(w) >> half;
        const unsigned gq = static_cast<unsigned>(w) & ((1u << half) - 1u);
        const double li = double(levels - 1) - 2.0 * gray_decode(gi);
        const double lq = double(levels - 1) - 2.0 * gray_decode(gq);
        points[static_cast<std::size_t>(w)] = cplx(li * scale, lq * scale);
    }
    return points;
}

std::vector<cplx> map_qam(std::span<const std::uint8_t> bits, int order) {
    const int m = bits_per_symbol(order);
    if (bits.size() % static_cast<std::size_t>(m) != 0)
        throw ConfigError("bit count not divisible by log2(order)");
    const auto table = qam_constellation(order);
    std::vector<cplx> out(bits.size() / static_cast<std::size_t>(m));
    std::size_t p = 0;
    for (auto& sym : out) {
        unsigned w = 0;
        for (int b = 0; b < m; ++b) w = (w << 1) | (bits[p++] & 1u);
        sym = table[w];
    }
    return out;
}

std::vector<cplx> make_pilot_row(const WaveformConfig& cfg, Rng& rng) {
    static const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<cplx> row(cfg.n_subcarriers);
    for (auto& v : row) {
        const std::uint64_t b = rng.uniform_int(4);
        v = cplx((b & 1) ? -inv_sqrt2 : inv_sqrt2, (b & 2) ? -inv_sqrt2 : inv_sqrt2);
    }
    return row;
}

std::vector<cplx> make_payload(const WaveformConfig& cfg, Rng& rng) {
    const int m = bits_per_symbol(cfg.qam_order);
    const std::size_t n_syms = cfg.n_subcarriers * (cfg.n_symbols - 1);
    std::vector<std::uint8_t> bits(n_syms * static_cast<std::size_t>(m));
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng.uniform_int(2));
    return map_qam(bits, cfg.qam_order);
}

ComplexGrid build_frame(const WaveformConfig& cfg, std::span<const cplx> payload,
                        std::span<const cplx> pilots) {
    const std::size_t n = cfg.n_subcarriers;
    const std::size_t m = cfg.n_symbols;
    if (pilots.size() != n) throw ConfigError("pilot row must cover N subcarriers");
    if (payload.size() != n * (m - 1)) throw ConfigError("payload must cover N x (M-1) cells");
    ComplexGrid x(n, m, AxisTag::SubcarrierSymbol);
    for (std::size_t k = 0; k < n; ++k) {
        if (pilots[k] == cplx(0.0, 0.0)) throw ConfigError("zero-valued pilot cell");
        x.at(k, 0) = pilots[k];
        for (std::size_t l = 1; l < m; ++l) {
            const cplx v = payload[k * (m - 1) + (l - 1)];
            if (v == cplx(0.0, 0.0)) throw ConfigError("zero-valued payload cell");
            x.at(k, l) = v;
        }
    }
    return x;
}

ComplexGrid make_random_frame(const WaveformConfig& cfg, std::uint64_t seed) {
    Rng pilot_rng(derive_seed(seed, 0));
    Rng payload_rng(derive_seed(seed, 1));
    const auto pilots = make_pilot_row(cfg, pilot_rng);
    const auto payload = make_payload(cfg, payload_rng);
    return build_frame(cfg, payload, pilots);
}

std::vector<cplx> ofdm_modulate(const ComplexGrid& x, const WaveformConfig& cfg) {
    const std::size_t n = cfg.n_subcarriers;
    const std::size_t m = cfg.n_symbols;
    if (x.rows() != n || x.cols() != m) throw ConfigError("grid shape does not match config");
    const std::size_t ns = cfg.samples_per_symbol();
    std::vector<cplx> stream(m * ns);
    std::vector<cplx> sym(n);
    const double inv_n = 1.0 / double(n);
    for (std::size_t l = 0; l < m; ++l) {
        for (std::size_t k = 0; k < n; ++k) sym[k] = x.at(k, l);
        fft::inverse(sym);
        for (auto& v : sym) v *= inv_n;
        cplx* dst = &stream[l * ns];
        for (std::size_t i = 0; i < cfg.n_cp; ++i) dst[i] = sym[n - cfg.n_cp + i];
        for (std::size_t i = 0; i < n; ++i) dst[cfg.n_cp + i] = sym[i];
    }
    return stream;
}

ComplexGrid ofdm_demodulate(std::span<const cplx> stream, const WaveformConfig& cfg) {
    const std::size_t n = cfg.n_subcarriers;
    const std::size_t m = cfg.n_symbols;
    const std::size_t ns = cfg.samples_per_symbol();
    if (stream.size() != m * ns) throw ConfigError("stream length must be M*(N+Ncp)");
    ComplexGrid x(n, m, AxisTag::SubcarrierSymbol);
    std::vector<cplx> sym(n);
    for (std::size_t l = 0; l < m; ++l) {
        const cplx* src = &stream[l * ns + cfg.n_cp];
        for (std::size_t i = 0; i < n; ++i) sym[i] = src[i];
        fft::forward(sym);
        for (std::size_t k = 0; k < n; ++k) x.at(k, l) = sym[k];
    }
    return x;
}

}  // namespace ofdmradar
