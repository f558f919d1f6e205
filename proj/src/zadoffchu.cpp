#include "ofdmradar/zadoffchu.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <tuple>

#include "ofdmradar/errors.hpp"

namespace ofdmradar {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

long long positive_mod(long long a, long long m) {
    const long long r = a % m;
    return r < 0 ? r + m : r;
}

/// Gauss-Jordan inverse with partial pivoting; D stays small (<= a few
/// hundred) so the cubic cost is irrelevant.
std::vector<cplx> invert_dense(std::vector<cplx> a, std::size_t d) {
    std::vector<cplx> inv(d * d, cplx(0, 0));
    for (std::size_t i = 0; i < d; ++i) inv[i * d + i] = cplx(1, 0);
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t pivot = col;
        double best = std::abs(a[col * d + col]);
        for (std::size_t r = col + 1; r < d; ++r) {
            const double v = std::abs(a[r * d + col]);
            if (v > best) { best = v; pivot = r; }
        }
        if (best == 0.0) throw ConfigError("Zadoff-Chu matrix is singular");
        if (pivot != col) {
            for (std::size_t c = 0; c < d; ++c) {
                std::swap(a[pivot * d + c], a[col * d + c]);
                std::swap(inv[pivot * d + c], inv[col * d + c]);
            }
        }
        const cplx p = a[col * d + col];
        for (std::size_t c = 0; c < d; ++c) {
            a[col * d + c] /= p;
            inv[col * d + c] /= p;
        }
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const cplx f = a[r * d + col];
            if (f == cplx(0, 0)) continue;
            for (std::size_t c = 0; c < d; ++c) {
                a[r * d + c] -= f * a[col * d + c];
                inv[r * d + c] -= f * inv[col * d + c];
            }
        }
    }
    return inv;
}

/// out = Zm * block for a D x width block, both row-major.
void left_multiply(const std::vector<cplx>& zm, std::size_t d, const cplx* block,
                   std::size_t width, cplx* out) {
    for (std::size_t i = 0; i < d; ++i) {
        const cplx* zrow = &zm[i * d];
        for (std::size_t j = 0; j < width; ++j) {
            cplx acc(0, 0);
            for (std::size_t m = 0; m < d; ++m) acc += zrow[m] * block[m * width + j];
            out[i * width + j] = acc;
        }
    }
}

ComplexGrid apply_matrix(const ComplexGrid& x, const std::vector<cplx>& zm, std::size_t d) {
    const std::size_t n = x.rows();
    const std::size_t m = x.cols();
    ComplexGrid out(n, m, x.tag());
    std::vector<cplx> col(n), res(n);
    for (std::size_t l = 0; l < m; ++l) {
        for (std::size_t k = 0; k < n; ++k) col[k] = x.at(k, l);
        if (d == n) {
            left_multiply(zm, d, col.data(), 1, res.data());
        } else {
            // column reshaped row-major into D x D
            left_multiply(zm, d, col.data(), d, res.data());
        }
        for (std::size_t k = 0; k < n; ++k) out.at(k, l) = res[k];
    }
    return out;
}

void check_shape(const ComplexGrid& x, std::size_t d) {
    const std::size_t n = x.rows();
    if (d == n) return;
    if (d * d == n) return;
    throw ConfigError("ZCP unavailable: matrix side must equal N or sqrt(N)");
}

}  // namespace

std::vector<cplx> zc_sequence(const ZcParams& params) {
    if (params.length == 0) throw ConfigError("ZC length must be positive");
    const long long l = static_cast<long long>(params.length);
    if (std::gcd(positive_mod(params.root, l) == 0 ? l : positive_mod(params.root, l), l) != 1)
        throw ConfigError("ZC root must be coprime to the length");
    std::vector<cplx> seq(params.length);
    const double rl = double(params.root) / double(l);
    for (long long k = 0; k < l; ++k) {
        // exact-integer phase bookkeeping is unnecessary: double holds the
        // products exactly for every L used here
        const double kk = double(k);
        double cycles;  // phase / (2 pi)
        if (l % 2 == 0) {
            cycles = rl * (kk * kk / 2.0 + double(params.offset) * kk);
        } else {
            cycles = rl * (kk * (kk + 1.0) / 2.0 + double(params.offset) * kk);
        }
        cycles -= std::floor(cycles);
        seq[static_cast<std::size_t>(k)] = std::polar(1.0, kTwoPi * cycles);
    }
    return seq;
}

ZcMatrix::ZcMatrix(const ZcParams& params) {
    const auto d = static_cast<std::size_t>(std::llround(std::sqrt(double(params.length))));
    if (d * d != params.length)
        throw ConfigError("ZC matrix needs a perfect-square length");
    side_ = d;
    fwd_ = zc_sequence(params);  // row-major reshape is implicit in indexing
    inv_ = invert_dense(fwd_, d);
    double frob2 = 0.0;
    for (const auto& v : inv_) frob2 += std::norm(v);
    noise_amp_ = std::sqrt(frob2 / double(d));
}

ComplexGrid precode(const ComplexGrid& x, const ZcMatrix& zm) {
    check_shape(x, zm.side());
    return apply_matrix(x, zm.forward(), zm.side());
}

ComplexGrid deprecode(const ComplexGrid& x, const ZcMatrix& zm) {
    check_shape(x, zm.side());
    return apply_matrix(x, zm.inverse(), zm.side());
}

const ZcMatrix& zc_matrix_cached(const ZcParams& params) {
    static std::map<std::tuple<std::size_t, long long, long long>, ZcMatrix> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    const auto key = std::make_tuple(params.length, params.root, params.offset);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, ZcMatrix(params)).first;
    return it->second;
}

double mean_modulus(std::span<const cplx> stream) {
    if (stream.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& v : stream) acc += std::abs(v);
    return acc / double(stream.size());
}

std::vector<cplx> hpa(std::span<const cplx> stream, double q_level, double mean_mod) {
    std::vector<cplx> out(stream.size());
    if (stream.empty()) return out;
    if (mean_mod <= 0.0) throw ConfigError("hpa: mean modulus must be positive");
    const double sat = mean_mod * std::pow(10.0, q_level / 10.0);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        const double mag = std::abs(stream[i]);
        const double gain = 1.0 / std::sqrt(1.0 + (mag / sat) * (mag / sat));
        out[i] = stream[i] * gain;
    }
    return out;
}

}  // namespace ofdmradar
