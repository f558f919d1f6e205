#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ofdmradar/grid.hpp"

namespace ofdmradar {

struct ZcParams {
    std::size_t length = 1024;  // L
    long long root = 1;         // r', coprime to L
    long long offset = 0;       // q'
};

/// Zadoff-Chu sequence of length L (even/odd forms). Unit modulus everywhere.
std::vector<cplx> zc_sequence(const ZcParams& params);

/// Square precoding matrix: the length-L sequence reshaped row-major into
/// D x D with D = sqrt(L). Cached inverse comes along for deprecoding.
class ZcMatrix {
public:
    explicit ZcMatrix(const ZcParams& params);

    std::size_t side() const { return side_; }
    const std::vector<cplx>& forward() const { return fwd_; }
    const std::vector<cplx>& inverse() const { return inv_; }

    /// RMS amplification a unit-variance noise vector suffers under the
    /// inverse matrix (Frobenius norm of Zm^-1 over sqrt(D)).
    double noise_amplification() const { return noise_amp_; }

private:
    std::size_t side_;
    std::vector<cplx> fwd_;
    std::vector<cplx> inv_;
    double noise_amp_;
};

/// Applies the precoder to every OFDM symbol column of X. Two layouts:
///  - D*D == N: the column is reshaped row-major into a D x D block which is
///    left-multiplied by Zm and flattened back;
///  - D == N: plain matrix-vector product (covers N that are not perfect
///    squares, e.g. the 128-subcarrier spectrum preset).
/// Anything else is a configuration error.
ComplexGrid precode(const ComplexGrid& x, const ZcMatrix& zm);

/// Exact inverse of precode.
ComplexGrid deprecode(const ComplexGrid& x, const ZcMatrix& zm);

/// Process-wide matrix cache; sweeps reuse one matrix across trials.
const ZcMatrix& zc_matrix_cached(const ZcParams& params);

/// Memoryless amplifier: amplitude compressed to
/// |x| / sqrt(1 + (|x| / (mean_mod * 10^(q/10)))^2), phase preserved.
std::vector<cplx> hpa(std::span<const cplx> stream, double q_level, double mean_mod);

/// Mean modulus of a stream (the amplifier operating point).
double mean_modulus(std::span<const cplx> stream);

}  // namespace ofdmradar
