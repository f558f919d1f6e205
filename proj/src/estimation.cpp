#include "ofdmradar/estimation.hpp"

#include <cmath>

#include "ofdmradar/errors.hpp"
#include "ofdmradar/fft.hpp"

namespace ofdmradar {

ComplexGrid spectral_division(const ComplexGrid& y, const ComplexGrid& x) {
    if (y.rows() != x.rows() || y.cols() != x.cols())
        throw ConfigError("spectral_division: shape mismatch");
    ComplexGrid h(y.rows(), y.cols(), AxisTag::SubcarrierSymbol);
    const std::size_t total = y.size();
    for (std::size_t i = 0; i < total; ++i) {
        const cplx xv = x.storage()[i];
        if (xv == cplx(0.0, 0.0)) throw ConfigError("spectral_division: zero cell in X");
        h.storage()[i] = y.storage()[i] / xv;
    }
    return h;
}

ComplexGrid dft_ce(const ComplexGrid& h, std::size_t n_cp) {
    const std::size_t n = h.rows();
    const std::size_t m = h.cols();
    if (n_cp > n) throw ConfigError("dft_ce: truncation length exceeds N");
    ComplexGrid out(n, m, h.tag());
    std::vector<cplx> col(n);
    const double inv_n = 1.0 / double(n);
    for (std::size_t l = 0; l < m; ++l) {
        for (std::size_t k = 0; k < n; ++k) col[k] = h.at(k, l);
        fft::inverse(col);
        for (std::size_t k = 0; k < n_cp; ++k) col[k] *= inv_n;
        for (std::size_t k = n_cp; k < n; ++k) col[k] = cplx(0.0, 0.0);
        fft::forward(col);
        for (std::size_t k = 0; k < n; ++k) out.at(k, l) = col[k];
    }
    return out;
}

double channel_mse(const ComplexGrid& h_est, const ComplexGrid& h_true) {
    if (h_est.rows() != h_true.rows() || h_est.cols() != h_true.cols())
        throw ConfigError("channel_mse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < h_est.size(); ++i)
        acc += std::norm(h_est.storage()[i] - h_true.storage()[i]);
    return acc / double(h_est.size());
}

}  // namespace ofdmradar
