#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ofdmradar {

using cplx = std::complex<double>;

/// Axis semantics of a ComplexGrid. Transforms that change the meaning of an
/// axis must retag the result; everything else preserves the tag.
enum class AxisTag {
    SubcarrierSymbol,  // rows = subcarrier k, cols = OFDM symbol l
    DelayDoppler,      // rows = delay bin, cols = Doppler bin (fft-shifted)
    TimeSymbol,        // rows = sample n within symbol, cols = OFDM symbol l
};

/// Dense row-major complex matrix. Holds the transmitted frame X, the
/// received frame Y and the channel estimate H.
class ComplexGrid {
public:
    ComplexGrid() = default;
    ComplexGrid(std::size_t rows, std::size_t cols, AxisTag tag)
        : rows_(rows), cols_(cols), tag_(tag), data_(rows * cols) {}
    ComplexGrid(std::size_t rows, std::size_t cols, AxisTag tag, std::vector<cplx> data)
        : rows_(rows), cols_(cols), tag_(tag), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("ComplexGrid: data length != rows*cols");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    AxisTag tag() const { return tag_; }
    void set_tag(AxisTag t) { tag_ = t; }

    cplx& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }
    std::vector<cplx>& storage() { return data_; }
    const std::vector<cplx>& storage() const { return data_; }

    /// Mean per-cell power.
    double mean_power() const {
        if (data_.empty()) return 0.0;
        double acc = 0.0;
        for (const auto& v : data_) acc += std::norm(v);
        return acc / static_cast<double>(data_.size());
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    AxisTag tag_ = AxisTag::SubcarrierSymbol;
    std::vector<cplx> data_;
};

/// Real-valued matrix with the same layout, used for the periodogram surface.
class RealGrid {
public:
    RealGrid() = default;
    RealGrid(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const double& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

}  // namespace ofdmradar
