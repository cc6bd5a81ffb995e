#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rts/core_data.hpp"
#include "rts/evaluation.hpp"
#include "rts/pipeline.hpp"

namespace rts {

/// One entry of the experiment's method list, e.g. "rts-pno",
/// "topk-forecast:2" or "uncertainty-penalty:0.5".
struct MethodSpec {
    enum class Kind {
        PredictOnly,
        RtsPto,
        RtsPno,
        TopkForecast,
        TopkRisk,
        UncertaintyPenalty,
    };
    Kind kind = Kind::PredictOnly;
    std::size_t k = 1;           // top-k baselines
    double penalty_weight = 0.0; // uncertainty-penalty baseline

    static MethodSpec parse(const std::string& text);
    std::string name() const;
};

struct DatasetSpec {
    std::string name;
    std::string csv_path;      // either csv_path+column ...
    std::string column;
    std::optional<SynthSpec> synthetic;  // ... or a synthetic spec

    PriceSeries load() const;
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    double train_frac = 0.7, calibration_frac = 0.1, test_frac = 0.2;
    TrainConfig train;
    std::vector<MethodSpec> methods;
    std::uint64_t root_seed = 0;
    bool oracle_unconstrained = false;

    /// Strict parse: unknown keys anywhere in the document are rejected.
    static ExperimentConfig load(const std::string& path);
};

struct CellResult {
    EvalReport report;
    std::vector<double> per_sample_regret;
    std::vector<EpochStats> history;  // empty for pure baselines
};

/// Trains whatever the method needs on the dataset and scores it on the
/// test split. Fully deterministic in (config, seed).
CellResult run_cell(const ExperimentConfig& config, const DatasetSpec& dataset,
                    const MethodSpec& method, std::uint64_t seed);

/// Write-temp-then-rename file writes.
void atomic_write(const std::string& path, const std::string& content);

int cmd_synth(const SynthSpec& spec, const std::string& out_path);
int cmd_train(const std::string& config_path, const std::string& out_dir);
int cmd_eval(const std::string& checkpoint_base, const std::string& csv_path,
             const std::string& column, const std::string& out_path, bool include_oracle,
             double train_frac, double calibration_frac, double test_frac);
int cmd_bench(const std::string& config_path, const std::string& out_dir);

}  // namespace rts
