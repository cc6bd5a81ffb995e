#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rts {

/// Timestamped univariate unit-price sequence.
struct PriceSeries {
    std::vector<std::int64_t> timestamps;  // strictly increasing
    std::vector<double> values;            // finite, same length
    std::string name;

    std::size_t size() const { return values.size(); }
};

/// One supervised instance: lookback x (length M), target y (length H).
/// x ends at origin_index in the source series, y starts at origin_index + 1.
struct WindowSample {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> c;  // optional covariates, usually empty
    std::size_t origin_index = 0;
};

struct DatasetSplits {
    std::vector<WindowSample> train;
    std::vector<WindowSample> calibration;
    std::vector<WindowSample> test;
};

struct NormalizerStats {
    double mean = 0.0;
    double std = 1.0;  // strictly positive
};

enum class SynthKind { Constant, SinusoidTrendNoise, Ar1Noise };

struct SynthSpec {
    SynthKind kind = SynthKind::SinusoidTrendNoise;
    std::size_t length = 0;
    double amplitude = 1.0;
    double period = 24.0;
    double trend_slope = 0.0;
    double noise_std = 0.0;
    double ar_coefficient = 0.0;
    double base = 0.0;
    std::uint64_t seed = 0;
};

SynthKind synth_kind_from_string(const std::string& s);
std::string to_string(SynthKind kind);

/// Parses a CSV with a `timestamp` column and the named price column.
/// Rejects non-monotone timestamps and non-finite values.
PriceSeries load_csv(const std::string& path, const std::string& value_column);

/// Writes the load_csv input format (header `timestamp,<name>`).
void save_csv(const PriceSeries& series, const std::string& path);

/// Deterministic synthetic series for a fixed spec (byte-identical output).
PriceSeries generate_synthetic(const SynthSpec& spec);

/// Stride-1 sliding windows; count = length - M - H + 1.
std::vector<WindowSample> make_windows(const PriceSeries& series, std::size_t lookback,
                                       std::size_t horizon);

/// Chronological partition by origin_index order. Fractions must be positive
/// and sum to 1; every split must end up nonempty.
DatasetSplits split_chronological(const std::vector<WindowSample>& windows, double train_frac,
                                  double calibration_frac, double test_frac);

/// Mean/std over the x-values of the training split only.
NormalizerStats fit_normalizer(const std::vector<WindowSample>& train_windows);

double normalize(double v, const NormalizerStats& stats);
double denormalize(double v, const NormalizerStats& stats);
std::vector<double> normalize(const std::vector<double>& v, const NormalizerStats& stats);
std::vector<double> denormalize(const std::vector<double>& v, const NormalizerStats& stats);
WindowSample normalize(const WindowSample& sample, const NormalizerStats& stats);

}  // namespace rts
