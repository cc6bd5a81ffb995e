#include "rts/runner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rts/errors.hpp"
#include "rts/spoloss.hpp"

namespace rts {

namespace fs = std::filesystem;
using nlohmann::json;

MethodSpec MethodSpec::parse(const std::string& text) {
    MethodSpec spec;
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);

    if (head == "predict-only") spec.kind = Kind::PredictOnly;
    else if (head == "rts-pto") spec.kind = Kind::RtsPto;
    else if (head == "rts-pno") spec.kind = Kind::RtsPno;
    else if (head == "topk-forecast") spec.kind = Kind::TopkForecast;
    else if (head == "topk-risk") spec.kind = Kind::TopkRisk;
    else if (head == "uncertainty-penalty") spec.kind = Kind::UncertaintyPenalty;
    else throw ConfigError("unknown method: " + text);

    const bool wants_arg = spec.kind == Kind::TopkForecast || spec.kind == Kind::TopkRisk ||
                           spec.kind == Kind::UncertaintyPenalty;
    if (wants_arg) {
        if (arg.empty()) throw ConfigError("method " + head + " needs an argument, e.g. " + head + ":1");
        try {
            if (spec.kind == Kind::UncertaintyPenalty)
                spec.penalty_weight = std::stod(arg);
            else
                spec.k = static_cast<std::size_t>(std::stoul(arg));
        } catch (const std::exception&) {
            throw ConfigError("bad argument in method: " + text);
        }
    } else if (colon != std::string::npos) {
        throw ConfigError("method " + head + " takes no argument");
    }
    return spec;
}

std::string MethodSpec::name() const {
    std::ostringstream out;
    switch (kind) {
        case Kind::PredictOnly: return "predict-only";
        case Kind::RtsPto: return "rts-pto";
        case Kind::RtsPno: return "rts-pno";
        case Kind::TopkForecast: out << "topk-forecast:" << k; break;
        case Kind::TopkRisk: out << "topk-risk:" << k; break;
        case Kind::UncertaintyPenalty: out << "uncertainty-penalty:" << penalty_weight; break;
    }
    return out.str();
}

PriceSeries DatasetSpec::load() const {
    if (synthetic) {
        auto series = generate_synthetic(*synthetic);
        series.name = name;
        return series;
    }
    return load_csv(csv_path, column);
}

namespace {

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) known = true;
        if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

SynthSpec parse_synth(const json& obj) {
    reject_unknown_keys(obj,
                        {"kind", "length", "amplitude", "period", "trend_slope", "noise_std",
                         "ar_coefficient", "base", "seed"},
                        "synthetic");
    SynthSpec spec;
    spec.kind = synth_kind_from_string(obj.at("kind").get<std::string>());
    spec.length = obj.at("length").get<std::size_t>();
    if (obj.contains("amplitude")) spec.amplitude = obj["amplitude"].get<double>();
    if (obj.contains("period")) spec.period = obj["period"].get<double>();
    if (obj.contains("trend_slope")) spec.trend_slope = obj["trend_slope"].get<double>();
    if (obj.contains("noise_std")) spec.noise_std = obj["noise_std"].get<double>();
    if (obj.contains("ar_coefficient")) spec.ar_coefficient = obj["ar_coefficient"].get<double>();
    if (obj.contains("base")) spec.base = obj["base"].get<double>();
    if (obj.contains("seed")) spec.seed = obj["seed"].get<std::uint64_t>();
    return spec;
}

TrainConfig parse_train(const json& obj) {
    reject_unknown_keys(obj,
                        {"method", "M", "H", "gamma", "alpha", "beta", "learning_rate", "epochs",
                         "batch_size", "model", "kernel", "seed", "caps", "adaptive_uncertainty"},
                        "train");
    TrainConfig tc;
    if (obj.contains("method")) tc.method = method_from_string(obj["method"].get<std::string>());
    if (obj.contains("M")) tc.lookback = obj["M"].get<std::size_t>();
    if (obj.contains("H")) tc.horizon = obj["H"].get<std::size_t>();
    if (obj.contains("gamma")) tc.gamma = obj["gamma"].get<double>();
    if (obj.contains("alpha")) tc.alpha = obj["alpha"].get<double>();
    if (obj.contains("beta")) tc.beta = obj["beta"].get<double>();
    if (obj.contains("learning_rate")) tc.learning_rate = obj["learning_rate"].get<double>();
    if (obj.contains("epochs")) tc.epochs = obj["epochs"].get<std::size_t>();
    if (obj.contains("batch_size")) tc.batch_size = obj["batch_size"].get<std::size_t>();
    if (obj.contains("model")) tc.model_kind = model_kind_from_string(obj["model"].get<std::string>());
    if (obj.contains("kernel")) tc.kernel = obj["kernel"].get<std::size_t>();
    if (obj.contains("seed")) tc.seed = obj["seed"].get<std::uint64_t>();
    if (obj.contains("caps")) tc.caps = obj["caps"].get<std::vector<double>>();
    if (obj.contains("adaptive_uncertainty"))
        tc.adaptive_uncertainty = obj["adaptive_uncertainty"].get<bool>();
    tc.validate();
    return tc;
}

std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& ch : out)
        if (ch == ':' || ch == '/' || ch == ' ') ch = '_';
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }

    reject_unknown_keys(doc, {"datasets", "split", "train", "methods", "seed", "oracle_unconstrained"},
                        "config");
    ExperimentConfig config;

    if (!doc.contains("datasets") || !doc["datasets"].is_array() || doc["datasets"].empty())
        throw ConfigError("config needs a nonempty 'datasets' array");
    for (const auto& d : doc["datasets"]) {
        reject_unknown_keys(d, {"name", "csv", "column", "synthetic"}, "dataset");
        DatasetSpec spec;
        spec.name = d.at("name").get<std::string>();
        if (d.contains("synthetic")) {
            spec.synthetic = parse_synth(d["synthetic"]);
        } else {
            spec.csv_path = d.at("csv").get<std::string>();
            spec.column = d.at("column").get<std::string>();
        }
        config.datasets.push_back(std::move(spec));
    }

    if (doc.contains("split")) {
        const auto& s = doc["split"];
        reject_unknown_keys(s, {"train", "calibration", "test"}, "split");
        config.train_frac = s.at("train").get<double>();
        config.calibration_frac = s.at("calibration").get<double>();
        config.test_frac = s.at("test").get<double>();
    }

    if (doc.contains("train")) config.train = parse_train(doc["train"]);
    if (doc.contains("seed")) config.root_seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("oracle_unconstrained"))
        config.oracle_unconstrained = doc["oracle_unconstrained"].get<bool>();

    if (doc.contains("methods"))
        for (const auto& m : doc["methods"])
            config.methods.push_back(MethodSpec::parse(m.get<std::string>()));
    return config;
}

CellResult run_cell(const ExperimentConfig& config, const DatasetSpec& dataset,
                    const MethodSpec& method, std::uint64_t seed) {
    const auto series = dataset.load();
    const auto windows = make_windows(series, config.train.lookback, config.train.horizon);
    const auto splits = split_chronological(windows, config.train_frac, config.calibration_frac,
                                            config.test_frac);

    TrainConfig tc = config.train;
    tc.seed = seed;

    const bool is_trained_method = method.kind == MethodSpec::Kind::PredictOnly ||
                                   method.kind == MethodSpec::Kind::RtsPto ||
                                   method.kind == MethodSpec::Kind::RtsPno;
    switch (method.kind) {
        case MethodSpec::Kind::PredictOnly: tc.method = Method::PredictOnly; break;
        case MethodSpec::Kind::RtsPto: tc.method = Method::RtsPto; break;
        case MethodSpec::Kind::RtsPno: tc.method = Method::RtsPno; break;
        default: tc.method = Method::PredictOnly; break;  // baselines ride on predict-only
    }
    const auto policy = train(tc, splits);

    // Risk-aware baselines use the prediction model's own conformal radii.
    std::vector<double> baseline_r;
    if (method.kind == MethodSpec::Kind::TopkRisk ||
        method.kind == MethodSpec::Kind::UncertaintyPenalty) {
        std::vector<WindowSample> cal_norm;
        cal_norm.reserve(splits.calibration.size());
        for (const auto& w : splits.calibration) cal_norm.push_back(normalize(w, policy.normalizer));
        baseline_r = positional_uncertainty(collect_residuals(policy.model, cal_norm), tc.gamma);
    }

    AllocationRule rule;
    switch (method.kind) {
        case MethodSpec::Kind::PredictOnly:
        case MethodSpec::Kind::RtsPto:
        case MethodSpec::Kind::RtsPno:
            rule = [&policy](const std::vector<double>& y_hat) {
                return solve_allocation(y_hat, policy.space);
            };
            break;
        case MethodSpec::Kind::TopkForecast:
            rule = [&method](const std::vector<double>& y_hat) {
                return baseline_topk_forecast(y_hat, method.k);
            };
            break;
        case MethodSpec::Kind::TopkRisk:
            rule = [&method, &baseline_r](const std::vector<double>& y_hat) {
                return baseline_topk_risk_avoid(y_hat, baseline_r, method.k);
            };
            break;
        case MethodSpec::Kind::UncertaintyPenalty:
            rule = [&method, &baseline_r](const std::vector<double>& y_hat) {
                return baseline_uncertainty_penalty(y_hat, baseline_r, method.penalty_weight);
            };
            break;
    }

    CellResult cell;
    EvalContext context{splits.test, policy.normalizer, policy.space, config.oracle_unconstrained,
                        &cell.per_sample_regret};
    if (!is_trained_method) context.decision_space = FeasibleSpace::simplex(tc.horizon);

    cell.report = evaluate_method(
        method.name(),
        [&policy](const WindowSample& sample) {
            return forward(policy.model, normalize(sample.x, policy.normalizer), sample.c);
        },
        rule, context);
    cell.report.dataset = dataset.name;
    cell.report.seed = seed;
    cell.history = policy.history;
    return cell;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot write " + tmp);
        out << content;
        if (!out) throw IoError("write failed: " + tmp);
    }
    fs::rename(tmp, path);
}

namespace {

std::string history_csv(const std::vector<EpochStats>& history) {
    std::ostringstream out;
    out.precision(17);
    out << "epoch,train_loss,calibration_regret,mean_r\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << i + 1 << "," << history[i].train_loss << "," << history[i].calibration_regret << ","
            << history[i].mean_r << "\n";
    return out.str();
}

std::string regret_csv(const std::vector<double>& per_sample) {
    std::ostringstream out;
    out.precision(17);
    out << "slot,regret\n";
    for (std::size_t i = 0; i < per_sample.size(); ++i) out << i << "," << per_sample[i] << "\n";
    return out.str();
}

json report_json(const EvalReport& report) {
    json j;
    j["method"] = report.method;
    j["dataset"] = report.dataset;
    j["mean_regret"] = report.mean_regret;
    j["mean_relative_regret"] = report.mean_relative_regret;
    j["mse"] = report.mse;
    j["mae"] = report.mae;
    j["samples"] = report.sample_count;
    j["seed"] = report.seed;
    return j;
}

}  // namespace

int cmd_synth(const SynthSpec& spec, const std::string& out_path) {
    const auto series = generate_synthetic(spec);
    std::ostringstream buf;
    buf.precision(17);
    buf << "timestamp," << series.name << "\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        buf << series.timestamps[i] << "," << series.values[i] << "\n";
    atomic_write(out_path, buf.str());
    std::printf("%s\n", out_path.c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
    const auto config = ExperimentConfig::load(config_path);
    if (config.datasets.size() != 1)
        throw ConfigError("train expects exactly one dataset in the config");
    fs::create_directories(out_dir);

    const std::string base = (fs::path(out_dir) / "policy").string();
    const auto cleanup = [&] {
        std::error_code ec;
        fs::remove(base + ".model", ec);
        fs::remove(base + ".policy", ec);
        fs::remove((fs::path(out_dir) / "history.csv").string(), ec);
    };

    try {
        const auto series = config.datasets.front().load();
        const auto windows = make_windows(series, config.train.lookback, config.train.horizon);
        const auto splits = split_chronological(windows, config.train_frac,
                                                config.calibration_frac, config.test_frac);
        TrainConfig tc = config.train;
        if (tc.seed == 0) tc.seed = config.root_seed;
        const auto policy = train(tc, splits);

        save_policy(policy, base);
        atomic_write((fs::path(out_dir) / "history.csv").string(), history_csv(policy.history));
    } catch (...) {
        cleanup();
        throw;
    }
    std::printf("%s\n", base.c_str());
    return 0;
}

int cmd_eval(const std::string& checkpoint_base, const std::string& csv_path,
             const std::string& column, const std::string& out_path, bool include_oracle,
             double train_frac, double calibration_frac, double test_frac) {
    const auto policy = load_policy(checkpoint_base);
    const auto series = load_csv(csv_path, column);
    const auto windows = make_windows(series, policy.model.lookback, policy.model.horizon);
    const auto splits = split_chronological(windows, train_frac, calibration_frac, test_frac);

    json cells = json::array();
    EvalContext context{splits.test, policy.normalizer, policy.space, false, nullptr};
    const auto forecast_fn = [&policy](const WindowSample& sample) {
        return forward(policy.model, normalize(sample.x, policy.normalizer), sample.c);
    };

    auto report = evaluate_method(
        to_string(policy.method), forecast_fn,
        [&policy](const std::vector<double>& y_hat) { return solve_allocation(y_hat, policy.space); },
        context);
    report.dataset = series.name;
    cells.push_back(report_json(report));

    if (include_oracle) {
        // Full-information decisions: regret is zero by construction.
        EvalReport oracle;
        oracle.method = "oracle";
        oracle.dataset = series.name;
        oracle.sample_count = splits.test.size();
        double sum_se = 0.0, sum_ae = 0.0;
        for (const auto& sample : splits.test) {
            const auto y_hat = forecast_fn(sample);
            const auto y_norm = normalize(sample.y, policy.normalizer);
            for (std::size_t h = 0; h < y_norm.size(); ++h) {
                const double e = y_hat[h] - y_norm[h];
                sum_se += e * e;
                sum_ae += std::abs(e);
            }
        }
        const auto hn = static_cast<double>(splits.test.size()) *
                        static_cast<double>(policy.model.horizon);
        oracle.mse = sum_se / hn;
        oracle.mae = sum_ae / hn;
        cells.push_back(report_json(oracle));
    }

    json doc;
    doc["schema"] = "rts-report v1";
    doc["cells"] = cells;
    atomic_write(out_path, doc.dump(2) + "\n");
    std::printf("%s\n", out_path.c_str());
    return 0;
}

int cmd_bench(const std::string& config_path, const std::string& out_dir) {
    const auto config = ExperimentConfig::load(config_path);
    if (config.datasets.empty()) throw ConfigError("bench needs at least one dataset");
    if (config.methods.size() < 2) throw ConfigError("bench needs at least two methods");
    fs::create_directories(out_dir);

    std::vector<EvalReport> reports;
    json cells = json::array();
    for (std::size_t di = 0; di < config.datasets.size(); ++di) {
        for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
            const auto& dataset = config.datasets[di];
            const auto& method = config.methods[mi];
            // Cell seed scheme: root_seed + dataset_index * |methods| + method_index.
            const std::uint64_t seed = config.root_seed + di * config.methods.size() + mi;
            CellResult cell;
            try {
                cell = run_cell(config, dataset, method, seed);
            } catch (const std::exception& e) {
                throw ConfigError("bench cell (" + dataset.name + ", " + method.name() +
                                  ") failed: " + e.what());
            }
            reports.push_back(cell.report);
            cells.push_back(report_json(cell.report));

            const std::string stem = sanitize(dataset.name) + "_" + sanitize(method.name());
            if (!cell.history.empty())
                atomic_write((fs::path(out_dir) / ("history_" + stem + ".csv")).string(),
                             history_csv(cell.history));
            atomic_write((fs::path(out_dir) / ("regret_" + stem + ".csv")).string(),
                         regret_csv(cell.per_sample_regret));
        }
    }

    json doc;
    doc["schema"] = "rts-report v1";
    doc["root_seed"] = config.root_seed;
    doc["cells"] = cells;
    doc["rank_by_regret"] = rank_table(reports, false);
    doc["rank_by_relative_regret"] = rank_table(reports, true);
    const std::string report_path = (fs::path(out_dir) / "report.json").string();
    atomic_write(report_path, doc.dump(2) + "\n");
    std::printf("%s\n", report_path.c_str());
    return 0;
}

}  // namespace rts
