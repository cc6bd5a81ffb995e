#include "rts/core_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "rts/errors.hpp"

namespace rts {

SynthKind synth_kind_from_string(const std::string& s) {
    if (s == "constant") return SynthKind::Constant;
    if (s == "sinusoid-trend-noise") return SynthKind::SinusoidTrendNoise;
    if (s == "ar1-noise") return SynthKind::Ar1Noise;
    throw InvalidSpec("unknown synthetic kind: " + s);
}

std::string to_string(SynthKind kind) {
    switch (kind) {
        case SynthKind::Constant: return "constant";
        case SynthKind::SinusoidTrendNoise: return "sinusoid-trend-noise";
        case SynthKind::Ar1Noise: return "ar1-noise";
    }
    return "?";
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

PriceSeries load_csv(const std::string& path, const std::string& value_column) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw CsvError("empty file: " + path);

    const auto header = split_fields(line);
    std::size_t ts_col = header.size(), val_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        const auto name = trim(header[i]);
        if (name == "timestamp") ts_col = i;
        if (name == value_column) val_col = i;
    }
    if (ts_col == header.size()) throw CsvError("missing column: timestamp");
    if (val_col == header.size()) throw CsvError("missing column: " + value_column);

    PriceSeries series;
    series.name = value_column;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() <= std::max(ts_col, val_col))
            throw CsvError("row " + std::to_string(row) + ": too few fields");

        std::int64_t ts;
        double value;
        try {
            ts = std::stoll(trim(fields[ts_col]));
            value = std::stod(trim(fields[val_col]));
        } catch (const std::exception&) {
            throw CsvError("row " + std::to_string(row) + ": unparsable value");
        }
        if (!std::isfinite(value))
            throw CsvError("row " + std::to_string(row) + ": non-finite value");
        if (!series.timestamps.empty() && ts <= series.timestamps.back())
            throw CsvError("row " + std::to_string(row) + ": non-monotone timestamp");
        series.timestamps.push_back(ts);
        series.values.push_back(value);
    }
    if (series.values.empty()) throw CsvError("no data rows in " + path);
    return series;
}

void save_csv(const PriceSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    const std::string col = series.name.empty() ? "price" : series.name;
    out << "timestamp," << col << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < series.size(); ++i)
        out << series.timestamps[i] << "," << series.values[i] << "\n";
    if (!out) throw IoError("write failed: " + path);
}

PriceSeries generate_synthetic(const SynthSpec& spec) {
    if (spec.length == 0) throw InvalidSpec("length must be positive");
    if (spec.noise_std < 0) throw InvalidSpec("noise_std must be >= 0");
    if (spec.kind == SynthKind::SinusoidTrendNoise && spec.period <= 0)
        throw InvalidSpec("period must be positive for sinusoid-trend-noise");

    PriceSeries series;
    series.name = "price";
    series.timestamps.resize(spec.length);
    series.values.resize(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t)
        series.timestamps[t] = static_cast<std::int64_t>(t);

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    switch (spec.kind) {
        case SynthKind::Constant:
            std::fill(series.values.begin(), series.values.end(), spec.amplitude);
            break;
        case SynthKind::SinusoidTrendNoise:
            for (std::size_t t = 0; t < spec.length; ++t) {
                double v = spec.base + spec.amplitude *
                               std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / spec.period) +
                           spec.trend_slope * static_cast<double>(t);
                if (spec.noise_std > 0) v += spec.noise_std * noise(rng);
                series.values[t] = v;
            }
            break;
        case SynthKind::Ar1Noise: {
            double state = 0.0;
            for (std::size_t t = 0; t < spec.length; ++t) {
                const double innovation = spec.noise_std > 0 ? spec.noise_std * noise(rng) : 0.0;
                state = spec.ar_coefficient * state + innovation;
                series.values[t] = spec.base + state;
            }
            break;
        }
    }
    return series;
}

std::vector<WindowSample> make_windows(const PriceSeries& series, std::size_t lookback,
                                       std::size_t horizon) {
    if (lookback == 0 || horizon == 0) throw InvalidSpec("lookback and horizon must be positive");
    if (series.size() < lookback + horizon)
        throw SeriesTooShort("series length " + std::to_string(series.size()) +
                             " < M + H = " + std::to_string(lookback + horizon));

    std::vector<WindowSample> windows;
    windows.reserve(series.size() - lookback - horizon + 1);
    for (std::size_t start = 0; start + lookback + horizon <= series.size(); ++start) {
        WindowSample w;
        w.origin_index = start + lookback - 1;
        w.x.assign(series.values.begin() + static_cast<std::ptrdiff_t>(start),
                   series.values.begin() + static_cast<std::ptrdiff_t>(start + lookback));
        w.y.assign(series.values.begin() + static_cast<std::ptrdiff_t>(start + lookback),
                   series.values.begin() + static_cast<std::ptrdiff_t>(start + lookback + horizon));
        windows.push_back(std::move(w));
    }
    return windows;
}

DatasetSplits split_chronological(const std::vector<WindowSample>& windows, double train_frac,
                                  double calibration_frac, double test_frac) {
    if (train_frac <= 0 || calibration_frac <= 0 || test_frac <= 0)
        throw InvalidSpec("split fractions must be positive");
    if (std::abs(train_frac + calibration_frac + test_frac - 1.0) > 1e-9)
        throw InvalidSpec("split fractions must sum to 1");

    const auto n = windows.size();
    const auto n_train = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n)));
    const auto n_cal =
        static_cast<std::size_t>(std::floor(calibration_frac * static_cast<double>(n)));
    if (n_train == 0 || n_cal == 0 || n_train + n_cal >= n)
        throw EmptySplit("not enough windows for nonempty train/calibration/test");

    DatasetSplits splits;
    splits.train.assign(windows.begin(), windows.begin() + static_cast<std::ptrdiff_t>(n_train));
    splits.calibration.assign(windows.begin() + static_cast<std::ptrdiff_t>(n_train),
                              windows.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal));
    splits.test.assign(windows.begin() + static_cast<std::ptrdiff_t>(n_train + n_cal),
                       windows.end());
    return splits;
}

NormalizerStats fit_normalizer(const std::vector<WindowSample>& train_windows) {
    if (train_windows.empty()) throw EmptySplit("fit_normalizer: no training windows");
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& w : train_windows) {
        for (double v : w.x) sum += v;
        count += w.x.size();
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (const auto& w : train_windows)
        for (double v : w.x) sq += (v - mean) * (v - mean);
    const double std_dev = std::sqrt(sq / static_cast<double>(count));
    if (std_dev <= 0.0) throw DegenerateSeries("fit_normalizer: zero variance in training x");
    return {mean, std_dev};
}

double normalize(double v, const NormalizerStats& stats) { return (v - stats.mean) / stats.std; }

double denormalize(double v, const NormalizerStats& stats) { return v * stats.std + stats.mean; }

std::vector<double> normalize(const std::vector<double>& v, const NormalizerStats& stats) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = normalize(v[i], stats);
    return out;
}

std::vector<double> denormalize(const std::vector<double>& v, const NormalizerStats& stats) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = denormalize(v[i], stats);
    return out;
}

WindowSample normalize(const WindowSample& sample, const NormalizerStats& stats) {
    WindowSample out = sample;
    out.x = normalize(sample.x, stats);
    out.y = normalize(sample.y, stats);
    return out;
}

}  // namespace rts
