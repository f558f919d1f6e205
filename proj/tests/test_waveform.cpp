#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "ofdmradar/errors.hpp"
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

WaveformConfig small_cfg(std::size_t n, std::size_t m, std::size_t ncp) {
    WaveformConfig w = table1();
    w.n_subcarriers = n;
    w.n_symbols = m;
    w.n_cp = ncp;
    w.n_prime = n;
    w.m_prime = m;
    return w;
}

}  // namespace

TEST_CASE("qpsk corner: bits 00 map to (1+j)/sqrt(2)") {
    const std::uint8_t bits[] = {0, 0};
    const auto syms = map_qam(bits, 4);
    REQUIRE(syms.size() == 1);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(syms[0] - cplx(s, s)) < 1e-15);
}

TEST_CASE("qpsk: all four words have unit mean power exactly") {
    const std::uint8_t bits[] = {0, 0, 0, 1, 1, 0, 1, 1};
    const auto syms = map_qam(bits, 4);
    double p = 0.0;
    for (const auto& v : syms) p += std::norm(v);
    CHECK(p / 4.0 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("16-qam: exhaustive words, unit power, Gray adjacency") {
    const auto points = qam_constellation(16);
    REQUIRE(points.size() == 16);
    double p = 0.0;
    for (const auto& v : points) p += std::norm(v);
    CHECK(p / 16.0 == doctest::Approx(1.0).epsilon(1e-12));

    // adjacent constellation points differ in exactly one bit of the word
    const double step = 2.0 / std::sqrt(10.0);
    for (unsigned a = 0; a < 16; ++a) {
        for (unsigned b = a + 1; b < 16; ++b) {
            const double d = std::abs(points[a] - points[b]);
            if (std::abs(d - step) < 1e-9) {
                const unsigned x = a ^ b;
                const int hamming = __builtin_popcount(x);
                CHECK(hamming == 1);
            }
        }
    }
}

TEST_CASE("map_qam rejects ragged bit streams") {
    const std::uint8_t bits[] = {0, 0, 1};
    CHECK_THROWS_AS(map_qam(bits, 4), ConfigError);
}

TEST_CASE("build_frame places pilots in column 0") {
    auto w = small_cfg(4, 2, 1);
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<cplx> pilots(4, cplx(1.0, 0.0));
    std::vector<cplx> payload(4, cplx(s, s));
    const auto x = build_frame(w, payload, pilots);
    for (std::size_t k = 0; k < 4; ++k) CHECK(x.at(k, 0) == cplx(1.0, 0.0));
    for (std::size_t k = 0; k < 4; ++k) CHECK(x.at(k, 1) == cplx(s, s));
}

TEST_CASE("build_frame: Table I dimensions") {
    auto w = table1();
    Rng rng(1);
    const auto pilots = make_pilot_row(w, rng);
    const auto payload = make_payload(w, rng);
    const auto x = build_frame(w, payload, pilots);
    CHECK(x.rows() == 2048);
    CHECK(x.cols() == 560);
}

TEST_CASE("build_frame rejects zero cells") {
    auto w = small_cfg(4, 2, 1);
    std::vector<cplx> pilots(4, cplx(1.0, 0.0));
    std::vector<cplx> payload(4, cplx(1.0, 0.0));
    payload[2] = cplx(0.0, 0.0);
    CHECK_THROWS_AS(build_frame(w, payload, pilots), ConfigError);
}

TEST_CASE("modulate: DC bin produces constant 1/N samples") {
    auto w = small_cfg(8, 1, 2);
    ComplexGrid x(8, 1, AxisTag::SubcarrierSymbol);
    x.at(0, 0) = cplx(1.0, 0.0);
    const auto stream = ofdm_modulate(x, w);
    REQUIRE(stream.size() == 10);
    for (const auto& v : stream) CHECK(std::abs(v - cplx(1.0 / 8.0, 0.0)) < 1e-12);
}

TEST_CASE("modulate: k=1 impulse at N=4 gives (1/4) e^{j2pi n/4} plus CP") {
    auto w = small_cfg(4, 1, 2);
    ComplexGrid x(4, 1, AxisTag::SubcarrierSymbol);
    x.at(1, 0) = cplx(1.0, 0.0);
    const auto stream = ofdm_modulate(x, w);
    REQUIRE(stream.size() == 6);
    // hand-evaluated 4-point inverse DFT of an impulse at k=1
    const cplx expect[] = {cplx(0.25, 0), cplx(0, 0.25), cplx(-0.25, 0), cplx(0, -0.25)};
    for (int n = 0; n < 4; ++n) CHECK(std::abs(stream[2 + n] - expect[n]) < 1e-12);
    // CP = last two body samples
    CHECK(std::abs(stream[0] - expect[2]) < 1e-12);
    CHECK(std::abs(stream[1] - expect[3]) < 1e-12);
}

TEST_CASE("round trip modulate/demodulate is identity (property over seeds)") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto w = small_cfg(32, 6, 8);
        const auto x = make_random_frame(w, seed);
        const auto stream = ofdm_modulate(x, w);
        const auto back = ofdm_demodulate(stream, w);
        double worst = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            worst = std::max(worst, std::abs(x.storage()[i] - back.storage()[i]));
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("demodulate: zero stream gives zero grid; length checked") {
    auto w = small_cfg(8, 2, 2);
    std::vector<cplx> zeros(2 * 10, cplx(0, 0));
    const auto g = ofdm_demodulate(zeros, w);
    for (const auto& v : g.storage()) CHECK(v == cplx(0, 0));
    zeros.pop_back();
    CHECK_THROWS_AS(ofdm_demodulate(zeros, w), ConfigError);
}

TEST_CASE("cyclic delay maps to linear phase per subcarrier") {
    auto w = small_cfg(16, 2, 4);
    const auto x = make_random_frame(w, 3);
    auto stream = ofdm_modulate(x, w);
    for (std::size_t d = 0; d < w.n_cp; ++d) {
        // delay each symbol circularly by d within its Ns-sample block
        std::vector<cplx> delayed(stream.size());
        const std::size_t ns = w.samples_per_symbol();
        for (std::size_t l = 0; l < w.n_symbols; ++l)
            for (std::size_t i = 0; i < ns; ++i)
                delayed[l * ns + (i + d) % ns] = stream[l * ns + i];
        const auto g = ofdm_demodulate(delayed, w);
        double worst = 0.0;
        for (std::size_t k = 0; k < w.n_subcarriers; ++k) {
            const cplx rot = std::polar(1.0, -oracles::kTwoPi * double(k) * double(d) /
                                                 double(w.n_subcarriers));
            for (std::size_t l = 0; l < w.n_symbols; ++l)
                worst = std::max(worst, std::abs(g.at(k, l) - x.at(k, l) * rot));
        }
        CHECK(worst < 1e-9);
    }
}

TEST_CASE("energy conservation under the 1/N-inverse scaling") {
    auto w = small_cfg(64, 4, 16);
    const auto x = make_random_frame(w, 9);
    const auto stream = ofdm_modulate(x, w);
    // compare over symbol bodies (the CP repeats a subset of samples)
    double time_power = 0.0;
    const std::size_t ns = w.samples_per_symbol();
    for (std::size_t l = 0; l < w.n_symbols; ++l)
        for (std::size_t i = w.n_cp; i < ns; ++i) time_power += std::norm(stream[l * ns + i]);
    time_power /= double(w.n_subcarriers * w.n_symbols);
    const double freq_power = x.mean_power();
    CHECK(time_power * double(w.n_subcarriers) ==
          doctest::Approx(freq_power).epsilon(1e-9));
}

TEST_CASE("resolutions: Table I values") {
    const auto r = resolutions(table1());
    CHECK(std::abs(r.range_resolution_m - 0.3052) < 0.01);
    CHECK(std::abs(r.velocity_resolution_mps - 0.67) < 0.01);
    CHECK(r.cp_range_limit_m == doctest::Approx(156.25).epsilon(1e-12));
    // direct evaluations of the unambiguity/bound formulas
    CHECK(r.velocity_model_bound_mps == doctest::Approx(467.5).epsilon(1e-3));
    CHECK(r.unambiguous_range_m == doctest::Approx(625.0).epsilon(1e-12));
    CHECK(r.unambiguous_velocity_mps == doctest::Approx(374.0).epsilon(1e-3));
    // published values within 0.5%
    CHECK(std::abs(r.range_resolution_m - 0.3052) / 0.3052 < 0.005);
    CHECK(std::abs(r.velocity_resolution_mps - 0.67) / 0.67 < 0.005);
}

TEST_CASE("config invariants: Ncp < N, derived durations") {
    auto w = table1();
    CHECK(w.useful_time() == doctest::Approx(1.0 / 240e3));
    CHECK(w.symbol_time() == doctest::Approx(1.25 / 240e3));
    CHECK(w.samples_per_symbol() == 2560);
    w.n_cp = 4096;
    CHECK_THROWS_AS(w.validate(), ConfigError);
}
