#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "rts/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Risk-aware fund allocation: forecasting, conformal uncertainty, LP allocation"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic price CSV");
    std::string synth_kind = "sinusoid-trend-noise";
    rts::SynthSpec spec;
    std::string synth_out = "synth.csv";
    synth->add_option("--kind", synth_kind, "constant | sinusoid-trend-noise | ar1-noise");
    synth->add_option("--length", spec.length, "series length")->required();
    synth->add_option("--amplitude", spec.amplitude);
    synth->add_option("--period", spec.period);
    synth->add_option("--trend-slope", spec.trend_slope);
    synth->add_option("--noise-std", spec.noise_std);
    synth->add_option("--ar-coefficient", spec.ar_coefficient);
    synth->add_option("--base", spec.base);
    synth->add_option("--seed", spec.seed);
    synth->add_option("--out", synth_out, "output CSV path");

    // train
    auto* train = app.add_subcommand("train", "Train a policy from a config file");
    std::string train_config, train_out = "out";
    train->add_option("--config", train_config)->required();
    train->add_option("--out", train_out, "output directory");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a trained policy on a CSV dataset");
    std::string eval_ckpt, eval_csv, eval_column = "price", eval_out = "eval_report.json";
    bool include_oracle = false;
    double f_train = 0.7, f_cal = 0.1, f_test = 0.2;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint base path (without .model)")->required();
    eval->add_option("--csv", eval_csv)->required();
    eval->add_option("--column", eval_column);
    eval->add_option("--out", eval_out);
    eval->add_flag("--include-oracle", include_oracle, "add a zero-regret oracle row");
    eval->add_option("--train-frac", f_train);
    eval->add_option("--calibration-frac", f_cal);
    eval->add_option("--test-frac", f_test);

    // bench
    auto* bench = app.add_subcommand("bench", "Run the full method x dataset benchmark grid");
    std::string bench_config, bench_out = "bench_out";
    bench->add_option("--config", bench_config)->required();
    bench->add_option("--out", bench_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            spec.kind = rts::synth_kind_from_string(synth_kind);
            return rts::cmd_synth(spec, synth_out);
        }
        if (train->parsed()) return rts::cmd_train(train_config, train_out);
        if (eval->parsed())
            return rts::cmd_eval(eval_ckpt, eval_csv, eval_column, eval_out, include_oracle,
                                 f_train, f_cal, f_test);
        if (bench->parsed()) return rts::cmd_bench(bench_config, bench_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
