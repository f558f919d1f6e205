#include "ofdmradar/sft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <mutex>
#include <numeric>

#include "ofdmradar/errors.hpp"
#include "ofdmradar/fft.hpp"
#include "ofdmradar/rng.hpp"

namespace ofdmradar {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::size_t lcm_size(std::size_t a, std::size_t b) { return std::lcm(a, b); }

long positive_mod(long a, long m) {
    const long r = a % m;
    return r < 0 ? r + m : r;
}

/// e^{-j2pi j/Q} for j in [0,Q), cached per Q. Built by rotation with a
/// periodic exact resync so construction stays cheap and deterministic.
const std::vector<cplx>& twiddle_table(std::size_t q_len) {
    static std::map<std::size_t, std::vector<cplx>> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(q_len);
    if (it != cache.end()) return it->second;
    std::vector<cplx> t(q_len);
    const cplx step = std::polar(1.0, -kTwoPi / double(q_len));
    cplx cur(1.0, 0.0);
    for (std::size_t j = 0; j < q_len; ++j) {
        if ((j & 255u) == 0) cur = std::polar(1.0, -kTwoPi * double(j) / double(q_len));
        t[j] = cur;
        cur *= step;
    }
    return cache.emplace(q_len, std::move(t)).first->second;
}

struct LineWalk {
    // incremental (row, col) walker for positions (a1 + v1 q, a2 + v2 q)
    std::size_t row, col, row_step, col_step, n, m;
    void advance() {
        row += row_step;
        if (row >= n) row -= n;
        col += col_step;
        if (col >= m) col -= m;
    }
};

template <typename Body>
void walk_line(LineWalk w, std::size_t count, Body&& body) {
    for (std::size_t q = 0; q < count; ++q) {
        body(q, w.row, w.col);
        w.advance();
    }
}

struct Component {
    long k, l;
    cplx amp;
};

/// Slice-spectrum bin a tone (k,l) lands on for slope (v1,v2).
std::size_t tone_bin(long k, long l, long v1, long v2, std::size_t n, std::size_t m,
                     std::size_t q_len) {
    const unsigned long long qn = q_len / n;
    const unsigned long long qm = q_len / m;
    const unsigned long long f =
        (static_cast<unsigned long long>(v1) * static_cast<unsigned long long>(k) * qn +
         static_cast<unsigned long long>(v2) * static_cast<unsigned long long>(l) * qm) %
        q_len;
    return static_cast<std::size_t>(f);
}

long egcd(long a, long b, long& x, long& y) {
    if (b == 0) {
        x = 1;
        y = 0;
        return a;
    }
    long x1, y1;
    const long g = egcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

double wrap_dist(double a, long b, std::size_t period) {
    double d = std::fmod(a - double(b), double(period));
    if (d > double(period) / 2) d -= double(period);
    if (d < -double(period) / 2) d += double(period);
    return std::abs(d);
}

/// Decode candidates satisfying the line congruence exactly:
/// v1 k (Q/N) + v2 l (Q/M) == f (mod Q). For each k near kap, the congruence
/// fixes l up to a small solution set; the joint nearest solution to
/// (kap, lam) wins. The exactness of the congruence is what corrects noisy
/// phase decodes: a wrong k forces l far away from lam.
bool lattice_decode(double kap, double lam, std::size_t f, long v1, long v2, std::size_t n,
                    std::size_t m, std::size_t q_len, double tol, long& out_k, long& out_l) {
    const long q = long(q_len);
    const long a = long((static_cast<unsigned long long>(v2) * (q_len / m)) % q_len);
    long x, y;
    const long d = egcd(a == 0 ? q : a, q, x, y);
    double best = tol;
    bool found = false;
    const long k_center = long(std::llround(kap));
    for (long dk = -2; dk <= 2; ++dk) {
        const long k = positive_mod(k_center + dk, long(n));
        const double kd = wrap_dist(kap, k, n);
        if (kd >= best) continue;
        const long fk = long(tone_bin(k, 0, v1, v2, n, m, q_len));
        long rhs = positive_mod(long(f) - fk, q);
        if (a == 0) {
            if (rhs != 0) continue;
            // l unconstrained by the congruence; fall back to rounding lam
            const long l = positive_mod(long(std::llround(lam)), long(m));
            const double dist = std::hypot(kd, wrap_dist(lam, l, m));
            if (dist < best) {
                best = dist;
                out_k = k;
                out_l = l;
                found = true;
            }
            continue;
        }
        if (rhs % d != 0) continue;
        const long qd = q / d;
        // modular inverse of a/d mod q/d
        long inv, tmp;
        egcd(positive_mod(a / d, qd), qd, inv, tmp);
        inv = positive_mod(inv, qd);
        const long l0 = positive_mod(long((__int128(rhs / d) * inv) % qd), qd);
        // solutions l = l0 + t*qd; enumerate the ones inside [0, M)
        for (long l = l0 % long(m); l < long(m); l += qd) {
            if (l < 0) continue;
            if (tone_bin(k, l, v1, v2, n, m, q_len) != f) continue;
            const double dist = std::hypot(kd, wrap_dist(lam, l, m));
            if (dist < best) {
                best = dist;
                out_k = k;
                out_l = l;
                found = true;
            }
        }
    }
    return found;
}

}  // namespace

bool slope_admissible(long v1, long v2, std::size_t n, std::size_t m) {
    const std::size_t q = lcm_size(n, m);
    const std::size_t g1 = std::gcd(static_cast<std::size_t>(positive_mod(v1, long(n))), n);
    const std::size_t g2 = std::gcd(static_cast<std::size_t>(positive_mod(v2, long(m))), m);
    return lcm_size(n / g1, m / g2) == q;
}

std::vector<cplx> sample_slice(const ComplexGrid& h, std::pair<long, long> offset,
                               std::pair<long, long> slope, std::size_t q_len) {
    const std::size_t n = h.rows();
    const std::size_t m = h.cols();
    if (q_len != lcm_size(n, m)) throw ConfigError("sample_slice: Q must equal lcm(N, M)");
    if (!slope_admissible(slope.first, slope.second, n, m))
        throw ConfigError("sample_slice: slope does not traverse Q distinct cells");
    LineWalk w{static_cast<std::size_t>(positive_mod(offset.first, long(n))),
               static_cast<std::size_t>(positive_mod(offset.second, long(m))),
               static_cast<std::size_t>(positive_mod(slope.first, long(n))),
               static_cast<std::size_t>(positive_mod(slope.second, long(m))),
               n, m};
    std::vector<cplx> s(q_len);
    walk_line(w, q_len,
              [&](std::size_t q, std::size_t r, std::size_t c) { s[q] = h.at(r, c); });
    return s;
}

SparseSpectrum sft_iterate(const ComplexGrid& h, const SftConfig& cfg) {
    const std::size_t n = h.rows();
    const std::size_t m = h.cols();
    if (n == 0 || m == 0) throw ConfigError("sft_iterate: empty grid");
    const std::size_t q_len = lcm_size(n, m);
    const auto& tw = twiddle_table(q_len);
    Rng rng(derive_seed(cfg.seed, 0x73667421));
    const bool dbg = std::getenv("OFDMRADAR_SFT_DEBUG") != nullptr;

    std::vector<Component> comps;
    auto find_comp = [&](long k, long l) -> Component* {
        for (auto& c : comps)
            if (c.k == k && c.l == l) return &c;
        return nullptr;
    };

    SparseSpectrum out;
    thread_local std::vector<cplx> s0, spec, s1d, s2d;
    s0.resize(q_len);
    spec.resize(q_len);
    double rel_floor = 0.0;
    double threshold = cfg.detect_threshold;
    const bool threshold_fixed = cfg.detect_threshold > 0.0;
    double residual = 0.0;

    for (std::size_t it = 0; it < cfg.i_max; ++it) {
        out.iterations = it + 1;
        long v1, v2;
        do {
            v1 = static_cast<long>(1 + rng.uniform_int(n > 1 ? n - 1 : 1));
            v2 = static_cast<long>(1 + rng.uniform_int(m > 1 ? m - 1 : 1));
        } while (!slope_admissible(v1, v2, n, m));
        const long a1 = static_cast<long>(rng.uniform_int(n));
        const long a2 = static_cast<long>(rng.uniform_int(m));

        // reference slice and its 1/Q-scaled spectrum
        LineWalk w{static_cast<std::size_t>(a1), static_cast<std::size_t>(a2),
                   static_cast<std::size_t>(v1 % long(n)), static_cast<std::size_t>(v2 % long(m)),
                   n, m};
        walk_line(w, q_len,
                  [&](std::size_t q, std::size_t r, std::size_t c) { s0[q] = h.at(r, c); });
        out.samples_used += q_len;
        fft::forward_copy(s0.data(), spec.data(), q_len);
        const double inv_q = 1.0 / double(q_len);
        for (auto& v : spec) v *= inv_q;

        // subtract every accepted component (an on-grid tone is one bin here)
        for (const auto& c : comps) {
            const std::size_t f = tone_bin(c.k, c.l, v1, v2, n, m, q_len);
            spec[f] -= c.amp * std::polar(1.0, kTwoPi * (double(a1 * c.k) / double(n) +
                                                         double(a2 * c.l) / double(m)));
        }

        if (it == 0) {
            double peak = 0.0;
            for (const auto& v : spec) peak = std::max(peak, std::norm(v));
            rel_floor = 1e-9 * peak;
            if (!threshold_fixed) {
                const double noise_part =
                    cfg.sigma2 > 0.0
                        ? 4.0 * cfg.sigma2 / double(q_len) * std::log(double(q_len) / cfg.pfa)
                        : 0.0;
                threshold = std::max(noise_part, rel_floor);
            }
        }

        std::vector<std::size_t> cand;
        double total_power = 0.0;
        for (std::size_t f = 0; f < q_len; ++f) {
            const double p = std::norm(spec[f]);
            total_power += p;
            if (p >= threshold && p > 0.0) cand.push_back(f);
        }
        std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            const double pa = std::norm(spec[a]), pb = std::norm(spec[b]);
            if (pa != pb) return pa > pb;
            return a < b;
        });
        if (cand.size() > 256) cand.resize(256);

        if (cand.empty()) {
            residual = total_power;
            out.converged = true;
            break;
        }

        // Offset slices. The phase-ratio decode must resolve 1/max(N,M) of a
        // cycle; its noise grows with the decimation factor, so back off g
        // until the weakest candidate still decodes reliably.
        double weakest = std::norm(spec[cand[0]]);
        for (std::size_t f : cand) weakest = std::min(weakest, std::norm(spec[f]));
        std::size_t g = std::max<std::size_t>(1, cfg.decimation);
        const double dim = double(std::max(n, m));
        while (g > 1) {
            const bool divides = q_len % g == 0 && q_len / g >= 16;
            bool quiet = true;
            if (cfg.sigma2 > 0.0) {
                const double angle_var =
                    cfg.sigma2 * (1.0 + double(g)) / (2.0 * double(q_len) * weakest);
                quiet = dim / kTwoPi * std::sqrt(angle_var) <= 0.3;
            }
            if (divides && quiet) break;
            --g;
        }
        const std::size_t qd = q_len / g;

        // bins sharing a residue mod Q/g alias onto each other under
        // decimation; count residues over candidates plus accepted tones
        std::map<std::size_t, int> alias_count;
        for (std::size_t f : cand) alias_count[f % qd]++;
        for (const auto& c : comps) alias_count[tone_bin(c.k, c.l, v1, v2, n, m, q_len) % qd]++;

        std::vector<cplx> spec1, spec2;  // full offset spectra when g == 1
        if (g == 1) {
            spec1.resize(q_len);
            spec2.resize(q_len);
            LineWalk wf{static_cast<std::size_t>(a1), static_cast<std::size_t>(a2),
                        static_cast<std::size_t>(v1 % long(n)),
                        static_cast<std::size_t>(v2 % long(m)), n, m};
            walk_line(wf, q_len, [&](std::size_t q, std::size_t r, std::size_t c) {
                const std::size_t r1 = r + 1 == n ? 0 : r + 1;
                const std::size_t c1 = c + 1 == m ? 0 : c + 1;
                spec1[q] = h.at(r1, c);
                spec2[q] = h.at(r, c1);
            });
            out.samples_used += 2 * q_len;
            fft::forward(spec1);
            fft::forward(spec2);
            for (auto& v : spec1) v *= inv_q;
            for (auto& v : spec2) v *= inv_q;
        } else {
            s1d.resize(qd);
            s2d.resize(qd);
            LineWalk wd{static_cast<std::size_t>(a1), static_cast<std::size_t>(a2),
                        static_cast<std::size_t>((v1 * long(g)) % long(n)),
                        static_cast<std::size_t>((v2 * long(g)) % long(m)), n, m};
            walk_line(wd, qd, [&](std::size_t t, std::size_t r, std::size_t c) {
                const std::size_t r1 = r + 1 == n ? 0 : r + 1;
                const std::size_t c1 = c + 1 == m ? 0 : c + 1;
                s1d[t] = h.at(r1, c);
                s2d[t] = h.at(r, c1);
            });
            out.samples_used += 2 * qd;
        }

        // targeted DFT of an offset slice at bin f, sampled every
        // `stride`-th position of the line; incremental rotation with a
        // periodic exact resync from the table
        auto targeted = [&](const std::vector<cplx>& samples, std::size_t stride,
                            std::size_t f) {
            cplx acc(0, 0);
            const std::size_t step = (stride * f) % q_len;
            const cplx rot = tw[step];
            cplx cur(1.0, 0.0);
            std::size_t idx = 0;
            for (std::size_t t = 0; t < samples.size(); ++t) {
                if ((t & 255u) == 0) cur = tw[idx];
                acc += samples[t] * cur;
                cur *= rot;
                idx += step;
                if (idx >= q_len) idx -= q_len;
            }
            return acc / double(samples.size());
        };

        // full-length offset slices, extracted only if an aliased bin needs them
        std::vector<cplx> s1full, s2full;
        bool have_full = false;
        auto ensure_full = [&]() {
            if (have_full || g == 1) return;
            s1full.resize(q_len);
            s2full.resize(q_len);
            LineWalk wf{static_cast<std::size_t>(a1), static_cast<std::size_t>(a2),
                        static_cast<std::size_t>(v1 % long(n)),
                        static_cast<std::size_t>(v2 % long(m)), n, m};
            walk_line(wf, q_len, [&](std::size_t q, std::size_t r, std::size_t c) {
                const std::size_t r1 = r + 1 == n ? 0 : r + 1;
                const std::size_t c1 = c + 1 == m ? 0 : c + 1;
                s1full[q] = h.at(r1, c);
                s2full[q] = h.at(r, c1);
            });
            out.samples_used += 2 * (q_len - qd);
            have_full = true;
        };

        std::size_t accepted = 0;
        for (std::size_t f : cand) {
            if (std::norm(spec[f]) < threshold) continue;  // consumed by an earlier accept
            const cplx c0 = spec[f];
            if (std::norm(c0) == 0.0) continue;
            cplx c1, c2;
            bool full_bin = g == 1;
            if (g == 1) {
                c1 = spec1[f];
                c2 = spec2[f];
            } else if (alias_count[f % qd] > 1) {
                ensure_full();
                c1 = targeted(s1full, 1, f);
                c2 = targeted(s2full, 1, f);
                full_bin = true;
            } else {
                c1 = targeted(s1d, g, f);
                c2 = targeted(s2d, g, f);
            }
            // accepted tones still live in the raw offset slices
            for (const auto& c : comps) {
                const std::size_t fc = tone_bin(c.k, c.l, v1, v2, n, m, q_len);
                if (full_bin ? (fc != f) : (fc % qd != f % qd)) continue;
                const cplx psi =
                    c.amp * std::polar(1.0, kTwoPi * (double(a1 * c.k) / double(n) +
                                                      double(a2 * c.l) / double(m)));
                c1 -= psi * std::polar(1.0, kTwoPi * double(c.k) / double(n));
                c2 -= psi * std::polar(1.0, kTwoPi * double(c.l) / double(m));
            }

            double kap = std::arg(c1 / c0) / kTwoPi * double(n);
            if (kap < 0) kap += double(n);
            double lam = std::arg(c2 / c0) / kTwoPi * double(m);
            if (lam < 0) lam += double(m);
            long k = 0, l = 0;
            if (!lattice_decode(kap, lam, f, v1, v2, n, m, q_len, cfg.frac_tol * 5.0, k, l)) {
                if (dbg)
                    std::fprintf(stderr, "  [sft] it%zu f=%zu lattice reject kap=%.3f lam=%.3f\n",
                                 it, f, kap, lam);
                continue;
            }
            const double m0 = std::abs(c0), m1 = std::abs(c1), m2 = std::abs(c2);
            const double mean_mag = (m0 + m1 + m2) / 3.0;
            if (std::max({m0, m1, m2}) - std::min({m0, m1, m2}) > cfg.amp_tol * mean_mag) {
                if (dbg)
                    std::fprintf(stderr, "  [sft] it%zu f=%zu amp reject %.3f %.3f %.3f\n", it, f,
                                 m0, m1, m2);
                continue;
            }

            const cplx psi0 = std::polar(1.0, kTwoPi * (double(a1 * k) / double(n) +
                                                        double(a2 * l) / double(m)));
            const cplx psi1 = psi0 * std::polar(1.0, kTwoPi * double(k) / double(n));
            const cplx psi2 = psi0 * std::polar(1.0, kTwoPi * double(l) / double(m));
            const cplx amp = (c0 / psi0 + c1 / psi1 + c2 / psi2) / 3.0;

            if (Component* existing = find_comp(k, l)) {
                existing->amp += amp;
                if (std::norm(existing->amp) < threshold)
                    comps.erase(comps.begin() + (existing - comps.data()));
            } else {
                comps.push_back({k, l, amp});
            }
            total_power -= std::norm(spec[f]);
            spec[f] = cplx(0, 0);
            ++accepted;
        }

        residual = std::max(total_power, 0.0);
        const double conv_floor =
            cfg.sigma2 * (1.0 + 6.0 / std::sqrt(double(q_len))) + rel_floor * double(q_len);
        if (residual <= conv_floor) {
            out.converged = true;
            break;
        }
        (void)accepted;  // rejected-only iterations retry with a fresh line
    }

    out.residual_energy = residual;
    out.entries.reserve(comps.size());
    for (const auto& c : comps) out.entries.push_back({c.k, c.l, c.amp});
    std::sort(out.entries.begin(), out.entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) {
                  const double pa = std::norm(a.amplitude), pb = std::norm(b.amplitude);
                  if (pa != pb) return pa > pb;
                  if (a.k != b.k) return a.k < b.k;
                  return a.l < b.l;
              });
    return out;
}

std::vector<Detection> detections_from_spectrum(const SparseSpectrum& spec, std::size_t n,
                                                std::size_t m, const WaveformConfig& cfg,
                                                double sigma2, double pfa,
                                                std::size_t max_targets) {
    const double nm = double(n) * double(m);
    const double eta = detection_threshold(sigma2, pfa, 1.0);

    std::vector<Detection> dets;
    for (const auto& e : spec.entries) {
        const double power = std::norm(e.amplitude) * nm;
        if (power < eta) continue;
        Detection d;
        d.delay_bin = (long(n) - e.k) % long(n);
        const long half = long(m) / 2;
        d.doppler_bin = (e.l + half) % long(m) - half;
        d.peak_power = power;
        d.range_m = kSpeedOfLight * double(d.delay_bin) /
                    (2.0 * double(n) * cfg.subcarrier_spacing_hz);
        d.velocity_mps = kSpeedOfLight * double(d.doppler_bin) /
                         (2.0 * cfg.carrier_hz * double(m) * cfg.symbol_time());
        dets.push_back(d);
    }
    std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
        if (a.peak_power != b.peak_power) return a.peak_power > b.peak_power;
        if (a.delay_bin != b.delay_bin) return a.delay_bin < b.delay_bin;
        return a.doppler_bin < b.doppler_bin;
    });
    if (dets.size() > max_targets) dets.resize(max_targets);
    return dets;
}

std::vector<Detection> sft_detect(const ComplexGrid& h, const WaveformConfig& cfg,
                                  const SftConfig& sft_cfg, double sigma2, double pfa,
                                  std::size_t max_targets) {
    SftConfig scfg = sft_cfg;
    if (scfg.sigma2 == 0.0) scfg.sigma2 = sigma2;
    if (scfg.pfa <= 0.0) scfg.pfa = pfa;
    const SparseSpectrum spec = sft_iterate(h, scfg);
    return detections_from_spectrum(spec, h.rows(), h.cols(), cfg, sigma2, pfa, max_targets);
}

}  // namespace ofdmradar
