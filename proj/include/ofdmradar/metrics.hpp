#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ofdmradar/config.hpp"
#include "ofdmradar/pipeline.hpp"

namespace ofdmradar {

/// Peak-to-average power ratio of a time stream, in dB.
double papr_db(std::span<const cplx> stream);

// ---------------------------------------------------------------- RMSE sweep

struct RmseRow {
    double snr_db;
    std::string estimator;
    double range_rmse_m;
    double velocity_rmse_mps;
    double miss_rate;
    std::size_t trials;
};

/// Monte-Carlo range/velocity RMSE over an SNR grid. Detections are matched
/// to ground truth by nearest neighbor in resolution-normalized
/// (range, velocity); unmatched truths count as misses and enter the RMSE
/// with the saturation penalties (d_max for range, v_un/2 for velocity);
/// matched errors are capped at the same penalties.
std::vector<RmseRow> rmse_sweep(const SimulationConfig& scenario, EstimatorKind estimator,
                                std::span<const double> snr_grid_db, std::size_t trials,
                                std::uint64_t seed);

// ---------------------------------------------------------------- MSE sweep

struct MseRow {
    double snr_db;
    std::string estimator;
    double channel_mse;
};

/// Channel-estimation MSE against the analytic noise-free channel.
std::vector<MseRow> mse_sweep(const SimulationConfig& scenario, EstimatorKind estimator,
                              std::span<const double> snr_grid_db, std::size_t trials,
                              std::uint64_t seed);

// ------------------------------------------------------------------- bench

struct BenchRow {
    std::size_t n;
    std::size_t m;
    std::size_t k;
    double periodogram_ms;
    double sft_ms;
    double speedup;
    std::size_t samples_used;
};

/// Wall-clock comparison of the two detectors on identical inputs
/// (median of `repeats` after one warmup; support sets must agree).
std::vector<BenchRow> bench_estimators(const SimulationConfig& base, std::span<const std::size_t> sizes,
                                       std::size_t k_targets, std::size_t repeats,
                                       std::uint64_t seed);

// ----------------------------------------------------------------- spectrum

struct SpectrumRow {
    double freq_hz;  // relative to the attributed subcarrier
    double power_db;
    std::string variant;
};

struct SpectrumResult {
    std::vector<SpectrumRow> rows;
    double out_of_band_fraction;  // integrated power outside [-df/2, df/2]
};

/// Averaged spectrum of the receiver-side signal attributable to one QAM
/// symbol of an N-subcarrier frame: the chain is run with and without that
/// symbol (same seed), the oversampled difference signal is deprecoded when
/// ZCP is active, and per-frame periodograms are averaged.
SpectrumResult symbol_spectrum(const SimulationConfig& scenario, bool with_precoding,
                               bool with_hpa, std::size_t frames, std::uint64_t seed);

}  // namespace ofdmradar
