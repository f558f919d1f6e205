#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ofdmradar/channel.hpp"
#include "ofdmradar/errors.hpp"
#include "ofdmradar/estimation.hpp"
#include "ofdmradar/waveform.hpp"
#include "oracles.hpp"

using namespace ofdmradar;

namespace {

WaveformConfig table1() {
    WaveformConfig w;
    w.n_subcarriers = 2048;
    w.n_symbols = 560;
    w.subcarrier_spacing_hz = 240e3;
    w.carrier_hz = 77e9;
    w.n_cp = 512;
    w.qam_order = 16;
    w.n_prime = 2048;
    w.m_prime = 560;
    return w;
}

WaveformConfig small_cfg(std::size_t n, std::size_t m) {
    WaveformConfig w = table1();
    w.n_subcarriers = n;
    w.n_symbols = m;
    w.n_cp = n / 4;
    w.n_prime = n;
    w.m_prime = m;
    return w;
}

RadarTarget on_bin_target(const WaveformConfig& w, long delay_bin, long doppler_bin) {
    RadarTarget t;
    t.range_m = kSpeedOfLight * double(delay_bin) /
                (2.0 * double(w.n_subcarriers) * w.subcarrier_spacing_hz);
    t.velocity_mps = kSpeedOfLight * double(doppler_bin) /
                     (2.0 * w.carrier_hz * double(w.n_symbols) * w.symbol_time());
    t.phase_rad = 0.0;
    return t;
}

const double kInf = std::numeric_limits<double>::infinity();

}  // namespace

TEST_CASE("derive_params: Friis gain, delay, Doppler") {
    auto w = table1();
    RadarTarget t{100.0, 0.0, 1.0, 0.0};
    const auto p = derive_params(t, w);
    CHECK(p.gain == doctest::Approx(5.049e-13).epsilon(1e-3));

    t.range_m = 150.0;
    CHECK(derive_params(t, w).delay_s == doctest::Approx(1.0e-6).epsilon(1e-12));

    t.velocity_mps = 30.0;
    CHECK(derive_params(t, w).doppler_hz == doctest::Approx(15.4e3).epsilon(1e-6));
}

TEST_CASE("model validity: CP window and velocity bound enforced") {
    auto w = table1();
    RadarTarget far{200.0, 0.0, 1.0, 0.0};  // beyond 156.25 m
    ComplexGrid x(8, 2, AxisTag::SubcarrierSymbol);
    for (auto& v : x.storage()) v = cplx(1, 0);
    CHECK_THROWS_AS(apply_channel(x, std::vector<RadarTarget>{far}, w, kInf, 0),
                    ModelValidityError);
    RadarTarget fast{50.0, 100.0, 1.0, 0.0};  // bound is 46.75 m/s
    CHECK_THROWS_AS(apply_channel(x, std::vector<RadarTarget>{fast}, w, kInf, 0),
                    ModelValidityError);
    RadarTarget zero_range{0.0, 0.0, 1.0, 0.0};
    CHECK_THROWS_AS(derive_params(zero_range, w), ModelValidityError);
}

TEST_CASE("no targets + infinite SNR = zero grid; identity channel = X") {
    auto w = small_cfg(16, 4);
    const auto x = make_random_frame(w, 1);
    auto [y0, r0] = apply_channel(x, {}, w, kInf, 0);
    for (const auto& v : y0.storage()) CHECK(std::abs(v) == 0.0);

    // one target with tau=0 is outside the type domain (d > 0), so emulate
    // the identity channel with a target on delay bin 0 exactly: d -> 0 is
    // rejected; use the smallest representable positive delay via bin math.
    RadarTarget t = on_bin_target(w, 0, 0);
    t.range_m = 1e-9;  // effectively zero delay, still positive
    auto [y1, r1] = apply_channel(x, std::vector<RadarTarget>{t}, w, kInf, 0);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, std::abs(y1.storage()[i] - x.storage()[i]));
    CHECK(worst < 1e-6);
}

TEST_CASE("single on-bin target: H = Y/X peaks exactly at (328, 45) via 2-D DFT") {
    auto w = table1();
    const auto t = on_bin_target(w, 328, 45);
    // downscaled brute-force check happens in test_periodogram; here verify
    // the analytic channel phase progression on the full grid cheaply
    auto [y, real] = apply_channel(make_random_frame(w, 2), std::vector<RadarTarget>{t}, w,
                                   kInf, 0);
    REQUIRE(real.targets.size() == 1);
    const auto& p = real.targets[0];
    // per-symbol Doppler phase step e^{j2pi Ts fD} matches bin 45 of M=560
    const double step = std::arg(std::polar(1.0, oracles::kTwoPi * w.symbol_time() * p.doppler_hz));
    CHECK(step == doctest::Approx(oracles::kTwoPi * 45.0 / 560.0).epsilon(1e-9));
    // per-subcarrier delay phase step matches bin 328 of N=2048
    const double dstep = oracles::kTwoPi * w.subcarrier_spacing_hz * p.delay_s;
    CHECK(dstep == doctest::Approx(oracles::kTwoPi * 328.0 / 2048.0).epsilon(1e-9));
}

TEST_CASE("linearity: channel(X1+X2) - noise == sum of noiseless parts") {
    auto w = small_cfg(32, 64);
    const auto x1 = make_random_frame(w, 11);
    const auto x2 = make_random_frame(w, 12);
    ComplexGrid xsum(32, 64, AxisTag::SubcarrierSymbol);
    for (std::size_t i = 0; i < xsum.size(); ++i)
        xsum.storage()[i] = x1.storage()[i] + x2.storage()[i];
    std::vector<RadarTarget> ts{on_bin_target(w, 3, 1), on_bin_target(w, 5, -2)};
    auto [ya, ra] = apply_channel(x1, ts, w, kInf, 7);
    auto [yb, rb] = apply_channel(x2, ts, w, kInf, 7);
    auto [yc, rc] = apply_channel(xsum, ts, w, kInf, 7);
    double worst = 0.0;
    for (std::size_t i = 0; i < xsum.size(); ++i)
        worst = std::max(worst,
                         std::abs(yc.storage()[i] - ya.storage()[i] - yb.storage()[i]));
    CHECK(worst < 1e-9);
}

TEST_CASE("doppler sign: receding target lands on a positive Doppler bin") {
    auto w = small_cfg(32, 64);
    auto t = on_bin_target(w, 4, 3);  // +3 Doppler bins, positive velocity
    CHECK(t.velocity_mps > 0.0);
    auto [y, real] = apply_channel(make_random_frame(w, 3), std::vector<RadarTarget>{t}, w,
                                   kInf, 0);
    const auto h = spectral_division(y, make_random_frame(w, 3));
    // forward DFT along the symbol axis: bin with max energy should be +3
    std::vector<cplx> row(h.cols());
    for (std::size_t l = 0; l < h.cols(); ++l) row[l] = h.at(0, l);
    const auto spec = oracles::naive_dft(row);
    std::size_t best = 0;
    for (std::size_t i = 1; i < spec.size(); ++i)
        if (std::abs(spec[i]) > std::abs(spec[best])) best = i;
    CHECK(best == 3);
}

TEST_CASE("noise calibration: empirical variance within 2% at N*M >= 1e5") {
    auto w = small_cfg(512, 256);  // 131072 cells
    ComplexGrid x(512, 256, AxisTag::SubcarrierSymbol);
    for (auto& v : x.storage()) v = cplx(1.0, 0.0);
    const double snr_db = 3.0;
    auto [y, real] = apply_channel(x, {}, w, snr_db, 99);
    // no targets: Y is pure noise with variance sigma2
    double acc = 0.0;
    for (const auto& v : y.storage()) acc += std::norm(v);
    acc /= double(y.size());
    CHECK(acc == doctest::Approx(real.sigma2).epsilon(0.02));
    CHECK(real.sigma2 == doctest::Approx(std::pow(10.0, -0.3)).epsilon(1e-9));
}

TEST_CASE("per-target phase progression matches e^{j2pi l Ts fD} within 1e-9") {
    auto w = small_cfg(8, 64);
    auto t = on_bin_target(w, 2, 5);
    ComplexGrid x(8, 64, AxisTag::SubcarrierSymbol);
    for (auto& v : x.storage()) v = cplx(1.0, 0.0);
    auto [y, real] = apply_channel(x, std::vector<RadarTarget>{t}, w, kInf, 0);
    const auto& p = real.targets[0];
    for (std::size_t l = 0; l < 64; ++l) {
        const cplx expected = std::polar(1.0, -oracles::kTwoPi * 0.0) *
                              std::polar(1.0, oracles::kTwoPi * double(l) * w.symbol_time() *
                                                  p.doppler_hz);
        CHECK(std::abs(y.at(0, l) - expected * std::polar(1.0, p.phase_rad)) < 1e-9);
    }
}

TEST_CASE("frequency-domain model equals time-domain convolution oracle (small N, on-bin)") {
    // time-domain oracle: delay the modulated stream circularly per symbol by
    // the integer delay and advance the Doppler phase across symbols
    auto w = small_cfg(16, 3);
    const long delay_bin = 3;
    const long doppler_bin = 0;  // integer-delay circular shift needs fD = 0 here
    auto t = on_bin_target(w, delay_bin, doppler_bin);
    const auto x = make_random_frame(w, 21);
    auto [y, real] = apply_channel(x, std::vector<RadarTarget>{t}, w, kInf, 0);

    const auto stream = ofdm_modulate(x, w);
    const std::size_t ns = w.samples_per_symbol();
    std::vector<cplx> delayed(stream.size());
    for (std::size_t l = 0; l < w.n_symbols; ++l) {
        for (std::size_t i = 0; i < ns; ++i)
            delayed[l * ns + (i + std::size_t(delay_bin)) % ns] = stream[l * ns + i];
    }
    const auto y_time = ofdm_demodulate(delayed, w);
    const cplx rot = std::polar(1.0, real.targets[0].phase_rad);
    double worst = 0.0;
    for (std::size_t k = 0; k < w.n_subcarriers; ++k)
        for (std::size_t l = 0; l < w.n_symbols; ++l)
            worst = std::max(worst, std::abs(y.at(k, l) - y_time.at(k, l) * rot));
    CHECK(worst < 1e-9);
}

TEST_CASE("true_channel matches Y/X for the same realization") {
    auto w = small_cfg(32, 64);
    std::vector<RadarTarget> ts{on_bin_target(w, 3, 2), on_bin_target(w, 6, -1)};
    const auto x = make_random_frame(w, 5);
    auto [y, real] = apply_channel(x, ts, w, kInf, 31);
    const auto h_div = spectral_division(y, x);
    const auto h_true = true_channel(real, w);
    double worst = 0.0;
    for (std::size_t i = 0; i < h_div.size(); ++i)
        worst = std::max(worst, std::abs(h_div.storage()[i] - h_true.storage()[i]));
    CHECK(worst < 1e-10);
}

TEST_CASE("deterministic given seed; different seeds differ") {
    auto w = small_cfg(16, 64);
    const auto x = make_random_frame(w, 1);
    std::vector<RadarTarget> ts{on_bin_target(w, 2, 1)};
    auto [y1, r1] = apply_channel(x, ts, w, 10.0, 5);
    auto [y2, r2] = apply_channel(x, ts, w, 10.0, 5);
    auto [y3, r3] = apply_channel(x, ts, w, 10.0, 6);
    CHECK(y1.storage() == y2.storage());
    bool same = true;
    for (std::size_t i = 0; i < y1.size(); ++i)
        if (y1.storage()[i] != y3.storage()[i]) { same = false; break; }
    CHECK_FALSE(same);
}
