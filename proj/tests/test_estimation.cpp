#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ofdmradar/channel.hpp"
#include "ofdmradar/errors.hpp"
#include "ofdmradar/estimation.hpp"
#include "ofdmradar/periodogram.hpp"
#include "ofdmradar/rng.hpp"
#include "ofdmradar/waveform.hpp"
#include "oracles.hpp"

using namespace ofdmradar;

namespace {

WaveformConfig cfg_nm(std::size_t n, std::size_t m, std::size_t ncp) {
    WaveformConfig w;
    w.n_subcarriers = n;
    w.n_symbols = m;
    w.subcarrier_spacing_hz = 240e3;
    w.carrier_hz = 77e9;
    w.n_cp = ncp;
    w.qam_order = 16;
    w.n_prime = n;
    w.m_prime = m;
    return w;
}

ComplexGrid noise_grid(std::size_t n, std::size_t m, double sigma2, std::uint64_t seed) {
    ComplexGrid g(n, m, AxisTag::SubcarrierSymbol);
    Rng rng(seed);
    const double sd = std::sqrt(sigma2 / 2.0);
    for (auto& v : g.storage()) v = cplx(sd * rng.normal(), sd * rng.normal());
    return g;
}

}  // namespace

TEST_CASE("spectral division: Y = X gives all-ones, exact cancellation") {
    auto w = cfg_nm(16, 4, 4);
    const auto x = make_random_frame(w, 1);
    const auto h = spectral_division(x, x);
    for (const auto& v : h.storage()) CHECK(std::abs(v - cplx(1, 0)) < 1e-12);
}

TEST_CASE("spectral division: unit-modulus X preserves noise power") {
    // identity channel + noise, QPSK-modulated X
    auto w = cfg_nm(256, 64, 64);
    w.qam_order = 4;
    const auto x = make_random_frame(w, 2);
    const double sigma2 = 0.36;
    auto y = x;
    Rng rng(77);
    const double sd = std::sqrt(sigma2 / 2.0);
    for (auto& v : y.storage()) v += cplx(sd * rng.normal(), sd * rng.normal());
    const auto h = spectral_division(y, x);
    double err = 0.0;
    for (const auto& v : h.storage()) err += std::norm(v - cplx(1, 0));
    err /= double(h.size());
    CHECK(err == doctest::Approx(sigma2).epsilon(0.05));
}

TEST_CASE("spectral division: exact single-target channel recovered") {
    auto w = cfg_nm(32, 64, 8);
    RadarTarget t;
    t.range_m = 20.0;
    t.velocity_mps = 3.0;
    t.phase_rad = 0.4;
    const auto x = make_random_frame(w, 3);
    auto [y, real] = apply_channel(x, std::vector<RadarTarget>{t}, w,
                                   std::numeric_limits<double>::infinity(), 0);
    const auto h = spectral_division(y, x);
    const auto h_true = true_channel(real, w);
    double worst = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        worst = std::max(worst, std::abs(h.storage()[i] - h_true.storage()[i]));
    CHECK(worst < 1e-10);
}

TEST_CASE("spectral division rejects zero cells and shape mismatch") {
    ComplexGrid x(4, 2, AxisTag::SubcarrierSymbol);
    ComplexGrid y(4, 2, AxisTag::SubcarrierSymbol);
    CHECK_THROWS_AS(spectral_division(y, x), ConfigError);  // zeros in X
    ComplexGrid y2(4, 3, AxisTag::SubcarrierSymbol);
    CHECK_THROWS_AS(spectral_division(y2, x), ConfigError);
}

TEST_CASE("dft_ce: identity on channels confined to the CP window") {
    auto w = cfg_nm(64, 8, 16);
    // impulse response with taps 0..15 only -> frequency response untouched
    ComplexGrid h(64, 8, AxisTag::SubcarrierSymbol);
    Rng rng(5);
    for (std::size_t l = 0; l < 8; ++l) {
        std::vector<cplx> taps(64, cplx(0, 0));
        for (std::size_t i = 0; i < 16; ++i) taps[i] = cplx(rng.normal(), rng.normal());
        const auto freq = oracles::naive_dft(taps);
        for (std::size_t k = 0; k < 64; ++k) h.at(k, l) = freq[k];
    }
    const auto hp = dft_ce(h, 16);
    double worst = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        worst = std::max(worst, std::abs(h.storage()[i] - hp.storage()[i]));
    CHECK(worst < 1e-9);
}

TEST_CASE("dft_ce: pure noise keeps Ncp/N of its energy (Table I ratio 0.25)") {
    const std::size_t n = 2048, m = 64, ncp = 512;
    const auto h = noise_grid(n, m, 1.0, 9);
    const auto hp = dft_ce(h, ncp);
    double e_in = 0.0, e_out = 0.0;
    for (const auto& v : h.storage()) e_in += std::norm(v);
    for (const auto& v : hp.storage()) e_out += std::norm(v);
    CHECK(e_out / e_in == doctest::Approx(double(ncp) / double(n)).epsilon(0.05));
}

TEST_CASE("dft_ce: ~6 dB channel-MSE gain at 0 dB SNR (Monte-Carlo)") {
    auto w = cfg_nm(2048, 4, 512);
    std::vector<RadarTarget> ts;
    for (long bin : {40L, 200L, 410L}) {
        RadarTarget t;
        t.range_m = kSpeedOfLight * double(bin) /
                    (2.0 * double(w.n_subcarriers) * w.subcarrier_spacing_hz);
        t.velocity_mps = 0.0;
        ts.push_back(t);
    }
    double mse_ls = 0.0, mse_dft = 0.0;
    const int trials = 12;
    for (int t = 0; t < trials; ++t) {
        const auto x = make_random_frame(w, 100 + t);
        auto [y, real] = apply_channel(x, ts, w, 0.0, 100 + t);
        const auto h_true = true_channel(real, w);
        const auto h_ls = spectral_division(y, x);
        mse_ls += channel_mse(h_ls, h_true);
        mse_dft += channel_mse(dft_ce(h_ls, w.n_cp), h_true);
    }
    const double gain_db = 10.0 * std::log10(mse_ls / mse_dft);
    CHECK(gain_db == doctest::Approx(6.0).epsilon(0.17));  // within +-1 dB
}

TEST_CASE("dft_ce is idempotent and non-expansive") {
    const auto h = noise_grid(64, 8, 1.0, 13);
    const auto h1 = dft_ce(h, 16);
    const auto h2 = dft_ce(h1, 16);
    double worst = 0.0, e0 = 0.0, e1 = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        worst = std::max(worst, std::abs(h1.storage()[i] - h2.storage()[i]));
        e0 += std::norm(h.storage()[i]);
        e1 += std::norm(h1.storage()[i]);
    }
    CHECK(worst < 1e-10);
    CHECK(e1 <= e0 + 1e-12);
}

TEST_CASE("dft_ce is linear") {
    const auto a = noise_grid(32, 4, 1.0, 21);
    const auto b = noise_grid(32, 4, 1.0, 22);
    ComplexGrid sum(32, 4, AxisTag::SubcarrierSymbol);
    for (std::size_t i = 0; i < sum.size(); ++i)
        sum.storage()[i] = 2.0 * a.storage()[i] + cplx(0, 1) * b.storage()[i];
    const auto lhs = dft_ce(sum, 8);
    const auto ra = dft_ce(a, 8);
    const auto rb = dft_ce(b, 8);
    double worst = 0.0;
    for (std::size_t i = 0; i < sum.size(); ++i)
        worst = std::max(worst, std::abs(lhs.storage()[i] - 2.0 * ra.storage()[i] -
                                         cplx(0, 1) * rb.storage()[i]));
    CHECK(worst < 1e-10);
}

TEST_CASE("dft_ce never moves the noiseless periodogram peak (argmax invariance)") {
    // targets inside the CP window; truncation must leave the peak bin alone
    auto w = cfg_nm(128, 64, 32);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        Rng rng(700 + seed);
        RadarTarget t;
        const long db = 1 + long(rng.uniform_int(30));
        const long vb = long(rng.uniform_int(11)) - 5;
        t.range_m = kSpeedOfLight * double(db) / (2.0 * 128.0 * w.subcarrier_spacing_hz);
        t.velocity_mps = kSpeedOfLight * double(vb) /
                         (2.0 * w.carrier_hz * 64.0 * w.symbol_time());
        t.phase_rad = rng.uniform(0.0, 6.28);
        const auto x = make_random_frame(w, seed);
        auto [y, real] = apply_channel(x, std::vector<RadarTarget>{t}, w,
                                       std::numeric_limits<double>::infinity(), seed);
        const auto h = spectral_division(y, x);
        const auto hp = dft_ce(h, w.n_cp);
        const auto win = make_window(WindowKind::Rectangular, 128, 64);
        const auto p1 = periodogram(h, win, 128, 64);
        const auto p2 = periodogram(hp, win, 128, 64);
        std::size_t a1 = 0, a2 = 0;
        for (std::size_t i = 1; i < p1.size(); ++i) {
            if (p1.storage()[i] > p1.storage()[a1]) a1 = i;
            if (p2.storage()[i] > p2.storage()[a2]) a2 = i;
        }
        CHECK(a1 == a2);
    }
}

TEST_CASE("channel_mse: zero, unit-noise, and scaling identities") {
    const auto h = noise_grid(64, 16, 1.0, 31);
    CHECK(channel_mse(h, h) == 0.0);

    const auto noisy = noise_grid(64, 16, 1.0, 32);
    ComplexGrid sum(64, 16, AxisTag::SubcarrierSymbol);
    for (std::size_t i = 0; i < sum.size(); ++i)
        sum.storage()[i] = h.storage()[i] + noisy.storage()[i];
    CHECK(channel_mse(sum, h) == doctest::Approx(1.0).epsilon(0.05));

    const double alpha = 1.3;
    ComplexGrid scaled(64, 16, AxisTag::SubcarrierSymbol);
    double href2 = 0.0;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        scaled.storage()[i] = alpha * h.storage()[i];
        href2 += std::norm(h.storage()[i]);
    }
    href2 /= double(h.size());
    CHECK(channel_mse(scaled, h) ==
          doctest::Approx((alpha - 1.0) * (alpha - 1.0) * href2).epsilon(1e-9));
}
