#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "ofdmradar/errors.hpp"
#include "ofdmradar/rng.hpp"
#include "ofdmradar/waveform.hpp"
#include "ofdmradar/zadoffchu.hpp"
#include "oracles.hpp"

using namespace ofdmradar;

TEST_CASE("zc sequence L=4 r=1 q=0: hand-evaluated even-L formula") {
    const auto z = zc_sequence({4, 1, 0});
    REQUIRE(z.size() == 4);
    const cplx e = std::polar(1.0, oracles::kTwoPi / 8.0);  // e^{j pi/4}
    CHECK(std::abs(z[0] - cplx(1, 0)) < 1e-12);
    CHECK(std::abs(z[1] - e) < 1e-12);
    CHECK(std::abs(z[2] - cplx(-1, 0)) < 1e-12);
    CHECK(std::abs(z[3] - e) < 1e-12);
}

TEST_CASE("zc sequences are unit modulus, non-coprime root rejected") {
    for (const auto& prm : {ZcParams{16, 3, 2}, ZcParams{25, 4, 0}, ZcParams{36, 7, 1}}) {
        for (const auto& v : zc_sequence(prm)) CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(zc_sequence({16, 4, 0}), ConfigError);
}

TEST_CASE("CAZAC: circular autocorrelation is L*delta[0] (20 random coprime pairs)") {
    Rng rng(42);
    int tested = 0;
    while (tested < 20) {
        const std::size_t l = 8 + rng.uniform_int(120);
        const long long r = 1 + long(rng.uniform_int(l - 1));
        if (std::gcd(r, (long long)l) != 1) continue;
        const auto z = zc_sequence({l, r, 0});
        const auto ac = oracles::circular_autocorrelation(z);
        CHECK(std::abs(ac[0] - cplx(double(l), 0)) < 1e-9 * double(l));
        for (std::size_t lag = 1; lag < l; ++lag) CHECK(std::abs(ac[lag]) <= 1e-9 * double(l));
        ++tested;
    }
}

TEST_CASE("zc matrix L=4: reshape of the sequence, inverse works") {
    const ZcMatrix zm({4, 1, 0});
    REQUIRE(zm.side() == 2);
    const cplx e = std::polar(1.0, oracles::kTwoPi / 8.0);
    CHECK(std::abs(zm.forward()[0] - cplx(1, 0)) < 1e-12);
    CHECK(std::abs(zm.forward()[1] - e) < 1e-12);
    CHECK(std::abs(zm.forward()[2] - cplx(-1, 0)) < 1e-12);
    CHECK(std::abs(zm.forward()[3] - e) < 1e-12);
    // Zm * Zm^-1 = I
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            cplx acc(0, 0);
            for (std::size_t k = 0; k < 2; ++k)
                acc += zm.forward()[i * 2 + k] * zm.inverse()[k * 2 + j];
            CHECK(std::abs(acc - (i == j ? cplx(1, 0) : cplx(0, 0))) < 1e-9);
        }
    }
    CHECK_THROWS_AS(ZcMatrix({6, 1, 0}), ConfigError);
}

namespace {

WaveformConfig cfg_n(std::size_t n, std::size_t m) {
    WaveformConfig w;
    w.n_subcarriers = n;
    w.n_symbols = m;
    w.subcarrier_spacing_hz = 240e3;
    w.carrier_hz = 77e9;
    w.n_cp = n / 4;
    w.qam_order = 16;
    w.n_prime = n;
    w.m_prime = m;
    return w;
}

}  // namespace

TEST_CASE("precode/deprecode round trip at N=1024 (32x32 block layout)") {
    const ZcMatrix zm({1024, 1, 0});
    REQUIRE(zm.side() == 32);
    auto w = cfg_n(1024, 8);
    const auto x = make_random_frame(w, 5);
    const auto xp = precode(x, zm);
    const auto back = deprecode(xp, zm);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, std::abs(x.storage()[i] - back.storage()[i]));
    CHECK(worst < 1e-8);
    CHECK(std::isfinite(zm.noise_amplification()));
}

TEST_CASE("precode/deprecode round trip with the direct NxN layout (N=64)") {
    const ZcMatrix zm({64ull * 64ull, 1, 0});
    REQUIRE(zm.side() == 64);
    auto w = cfg_n(64, 4);
    const auto x = make_random_frame(w, 6);
    const auto back = deprecode(precode(x, zm), zm);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, std::abs(x.storage()[i] - back.storage()[i]));
    CHECK(worst < 1e-8);
}

TEST_CASE("precode zeros map to zeros; shape mismatch rejected") {
    const ZcMatrix zm({1024, 1, 0});
    ComplexGrid zeros(1024, 2, AxisTag::SubcarrierSymbol);
    const auto out = precode(zeros, zm);
    for (const auto& v : out.storage()) CHECK(std::abs(v) == 0.0);
    ComplexGrid bad(48, 2, AxisTag::SubcarrierSymbol);
    CHECK_THROWS_AS(precode(bad, zm), ConfigError);
}

TEST_CASE("precoded frame lowers median time-domain PAPR (N=1024, 16-QAM)") {
    const ZcMatrix zm({1024, 1, 0});
    auto w = cfg_n(1024, 2);
    std::vector<double> plain, zcp;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto x = make_random_frame(w, 1000 + s);
        const auto s_plain = ofdm_modulate(x, w);
        const auto s_zcp = ofdm_modulate(precode(x, zm), w);
        double pk = 0, mn = 0;
        for (const auto& v : s_plain) { pk = std::max(pk, std::norm(v)); mn += std::norm(v); }
        plain.push_back(10 * std::log10(pk / (mn / double(s_plain.size()))));
        pk = 0; mn = 0;
        for (const auto& v : s_zcp) { pk = std::max(pk, std::norm(v)); mn += std::norm(v); }
        zcp.push_back(10 * std::log10(pk / (mn / double(s_zcp.size()))));
    }
    std::sort(plain.begin(), plain.end());
    std::sort(zcp.begin(), zcp.end());
    CHECK(zcp[50] < plain[50]);
}

TEST_CASE("hpa: small-signal linearity, saturation, -3 dB point, monotonicity") {
    const double mean_mod = 1.0;
    const double sat = std::pow(10.0, 0.2);  // q = 2
    std::vector<cplx> tiny{cplx(1e-9, 0)};
    CHECK(std::abs(hpa(tiny, 2.0, mean_mod)[0].real() - 1e-9) < 1e-15);

    std::vector<cplx> huge{cplx(1e9, 0)};
    CHECK(hpa(huge, 2.0, mean_mod)[0].real() == doctest::Approx(sat).epsilon(1e-6));

    std::vector<cplx> at_sat{cplx(sat, 0)};
    CHECK(hpa(at_sat, 2.0, mean_mod)[0].real() == doctest::Approx(sat / std::sqrt(2.0)));

    // monotone nondecreasing in |x| and bounded by the saturation level
    double prev = 0.0;
    for (double a = 0.0; a < 10.0; a += 0.05) {
        std::vector<cplx> v{cplx(a, 0)};
        const double out = hpa(v, 2.0, mean_mod)[0].real();
        CHECK(out >= prev);
        CHECK(out < sat + 1e-12);
        prev = out;
    }

    // phase preserved
    std::vector<cplx> rot{std::polar(3.0, 1.2345)};
    CHECK(std::arg(hpa(rot, 2.0, mean_mod)[0]) == doctest::Approx(1.2345));

    // empty stream passes through
    CHECK(hpa(std::vector<cplx>{}, 2.0, 1.0).empty());
}
