#include "ofdmradar/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

namespace ofdmradar::fft {
namespace {

// FFTW_ESTIMATE keeps planning deterministic (no timing-dependent algorithm
// choice), which keeps rerun output byte-identical. Plans are cached per
// alignment class so SIMD kernels stay available without an aligned
// allocator on the caller side.
struct PlanKey {
    std::size_t n, howmany, stride, dist;
    int sign;
    int align;
    bool operator<(const PlanKey& o) const {
        return std::tie(n, howmany, stride, dist, sign, align) <
               std::tie(o.n, o.howmany, o.stride, o.dist, o.sign, o.align);
    }
};

fftw_plan get_plan(PlanKey key, cplx* data) {
    key.align = fftw_alignment_of(reinterpret_cast<double*>(data));
    static std::map<PlanKey, fftw_plan> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const int n = static_cast<int>(key.n);
    fftw_plan p = fftw_plan_many_dft(
        1, &n, static_cast<int>(key.howmany),
        reinterpret_cast<fftw_complex*>(data), nullptr, static_cast<int>(key.stride),
        static_cast<int>(key.dist),
        reinterpret_cast<fftw_complex*>(data), nullptr, static_cast<int>(key.stride),
        static_cast<int>(key.dist), key.sign, FFTW_ESTIMATE);
    cache.emplace(key, p);
    return p;
}

void run(cplx* data, std::size_t n, std::size_t howmany, std::size_t stride, std::size_t dist,
         int sign) {
    if (n == 0 || howmany == 0) return;
    fftw_plan p = get_plan({n, howmany, stride, dist, sign}, data);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
}

}  // namespace

void forward(cplx* data, std::size_t n) { run(data, n, 1, 1, n, FFTW_FORWARD); }

void forward_copy(const cplx* in, cplx* out, std::size_t n) {
    std::copy(in, in + n, out);
    run(out, n, 1, 1, n, FFTW_FORWARD);
}
void inverse(cplx* data, std::size_t n) { run(data, n, 1, 1, n, FFTW_BACKWARD); }

void forward_rows(cplx* data, std::size_t rows, std::size_t cols) {
    run(data, cols, rows, 1, cols, FFTW_FORWARD);
}
void inverse_rows(cplx* data, std::size_t rows, std::size_t cols) {
    run(data, cols, rows, 1, cols, FFTW_BACKWARD);
}
void forward_cols(cplx* data, std::size_t rows, std::size_t cols) {
    run(data, rows, cols, cols, 1, FFTW_FORWARD);
}
void inverse_cols(cplx* data, std::size_t rows, std::size_t cols) {
    run(data, rows, cols, cols, 1, FFTW_BACKWARD);
}

}  // namespace ofdmradar::fft
