#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tpad/dataset.hpp"
#include "tpad/detect.hpp"
#include "tpad/dimsweep.hpp"
#include "tpad/errors.hpp"
#include "tpad/format.hpp"
#include "tpad/linalg.hpp"
#include "tpad/metrics.hpp"
#include "tpad/model_io.hpp"
#include "tpad/synth.hpp"

namespace {

using namespace tpad;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

// Loads a feature CSV; if the file carries the named label column it is
// stripped, otherwise the file is taken as unlabeled.
Dataset load_features(const std::string& path, const std::string& label_column) {
    if (!label_column.empty()) {
        try {
            return load_csv(path, label_column);
        } catch (const ConfigError&) {
            // column absent in this file; fall through
        }
    }
    return load_csv(path);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw FormatError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthWatertankArgs {
    WaterTankParams params;
    std::string out;
    Index anomalies = 0;
    std::string anomaly_kinds = "off_manifold,out_of_range";
    std::string anomalies_out;
    std::string mixed_out;
    Index mixed_normal = 1000;
};

void run_synth_watertank(const SynthWatertankArgs& args) {
    Dataset normal = gen_watertank(args.params);
    normal.labels.reset(); // training file carries no label column
    save_csv(normal, args.out);
    std::cout << "wrote " << args.out << " (" << normal.n() << " rows)\n";

    std::optional<Dataset> anomalies;
    if (args.anomalies > 0) {
        std::vector<TankAnomalyKind> kinds;
        for (const auto& name : split(args.anomaly_kinds, ',')) {
            kinds.push_back(parse_tank_anomaly_kind(name));
        }
        anomalies = gen_watertank_anomalies(args.params, kinds, args.anomalies);
        if (!args.anomalies_out.empty()) {
            save_csv(*anomalies, args.anomalies_out);
            std::cout << "wrote " << args.anomalies_out << " (" << anomalies->n() << " rows)\n";
        }
    }

    if (!args.mixed_out.empty()) {
        if (!anomalies) {
            throw ParamError("--mixed-out requires --anomalies > 0");
        }
        WaterTankParams mixed_params = args.params;
        mixed_params.n = args.mixed_normal;
        mixed_params.seed = Rng(args.params.seed).child(0x6d697865).next_u64();
        Dataset mixed = gen_watertank(mixed_params);
        Dataset combined;
        combined.column_names = mixed.column_names;
        combined.x.resize(mixed.n() + anomalies->n(), mixed.m());
        combined.x.topRows(mixed.n()) = mixed.x;
        combined.x.bottomRows(anomalies->n()) = anomalies->x;
        std::vector<int> labels(static_cast<size_t>(mixed.n()), 0);
        labels.insert(labels.end(), static_cast<size_t>(anomalies->n()), 1);
        combined.labels = std::move(labels);
        save_csv(combined, args.mixed_out);
        std::cout << "wrote " << args.mixed_out << " (" << combined.n() << " rows, "
                  << anomalies->n() << " anomalies)\n";
    }
}

struct SynthNonlinArgs {
    NonlinPoolParams params;
    std::string ops = "cube";
    std::string out;
    std::string manifest_out;
};

void run_synth_nonlin(SynthNonlinArgs args) {
    for (const auto& name : split(args.ops, ',')) {
        args.params.ops.push_back(parse_nonlin_op(name));
    }
    NonlinPoolResult result = gen_nonlin_pool(args.params);
    result.data.labels.reset();
    save_csv(result.data, args.out);
    std::cout << "wrote " << args.out << " (" << result.data.n() << " rows, "
              << result.data.m() << " columns)\n";
    if (!args.manifest_out.empty()) {
        write_text(args.manifest_out, manifest_json(result));
        std::cout << "wrote " << args.manifest_out << "\n";
    }
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
    std::string data;
    std::string label_column = "label";
    int p = 1;
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
};

TrainConfig load_train_config(const std::string& path, std::vector<int>& layer_sizes) {
    TrainConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("config '" + path + "': " + e.what());
    }
    cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = doc.value("batch_size", cfg.batch_size);
    cfg.max_epochs = doc.value("max_epochs", cfg.max_epochs);
    cfg.patience = doc.value("patience", cfg.patience);
    cfg.validation_fraction = doc.value("validation_fraction", cfg.validation_fraction);
    if (doc.contains("layer_sizes")) {
        layer_sizes = doc.at("layer_sizes").get<std::vector<int>>();
    }
    return cfg;
}

void run_fit(const FitArgs& args, bool use_ae) {
    Dataset data = load_features(args.data, args.label_column);
    Normalizer norm = fit_normalizer(data);
    Matrix x = apply(norm, data.x);

    ModelFile file;
    file.normalizer = norm;
    file.metadata.seed = args.seed;
    file.metadata.created_at = iso8601_now_utc();
    file.metadata.data_fingerprint = fingerprint_file(args.data);

    if (use_ae) {
        std::vector<int> layer_sizes;
        TrainConfig cfg = load_train_config(args.config, layer_sizes);
        cfg.seed = args.seed;
        cfg.batch_size = static_cast<int>(std::min<Index>(cfg.batch_size, x.rows()));
        AeArchitecture arch = layer_sizes.empty() ? AeArchitecture::for_dims(data.m(), args.p)
                                                  : AeArchitecture::standard(layer_sizes);
        AeModel model = train(x, arch, cfg);
        file.model = std::move(model);
    } else {
        file.model = fit_pca(x, args.p);
    }

    const double train_mse = mse(model_reconstruct(file.model, x), x);
    save_model(file, args.out);
    std::cout << "wrote " << args.out << " (kind=" << file.kind() << ", p="
              << model_latent_dim(file.model) << ", train_mse=" << format_double(train_mse)
              << ")\n";
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string data;
    std::string label_column = "label";
    std::string method = "pca";
    int p_min = 1;
    int p_max = 1;
    double fraction = 0.01;
    std::string out;
    std::string csv_out;
    SweepConfig cfg;
};

void run_sweep(const SweepArgs& args) {
    Dataset data = load_features(args.data, args.label_column);
    SweepResult result = sweep(data, parse_sweep_method(args.method), args.p_min, args.p_max,
                               args.cfg);
    try {
        DimEstimate est = estimate_dim(result, args.fraction);
        result.estimated_dim = est.dim;
        result.estimate_used_fallback = est.used_fallback;
    } catch (const EstimationError& e) {
        std::cerr << "warning: " << e.what() << "\n";
    }
    write_text(args.out, sweep_result_json(result));
    std::string csv_path = args.csv_out;
    if (csv_path.empty()) {
        csv_path = args.out;
        auto dot = csv_path.find_last_of('.');
        if (dot != std::string::npos) csv_path.resize(dot);
        csv_path += ".csv";
    }
    write_text(csv_path, sweep_result_csv(result));
    std::cout << "wrote " << args.out << " and " << csv_path;
    if (result.estimated_dim) {
        std::cout << " (estimated_dim=" << *result.estimated_dim
                  << (result.estimate_used_fallback ? ", elbow fallback" : "") << ")";
    }
    std::cout << "\n";
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

struct DetectArgs {
    std::string model;
    std::string train;
    std::string test;
    std::string label_column = "label";
    double quantile = 0.999;
    std::string second_phase;
    std::string out;
};

std::optional<SecondPhaseDetector> fit_second_from_spec(const std::string& spec,
                                                        const ConstMatrixRef& latent_train,
                                                        double quantile) {
    if (spec.empty()) return std::nullopt;
    // mini-grammar: kind[:key=value[,key=value]...]
    auto head_tail = split(spec, ':');
    if (head_tail.size() > 2) throw ParamError("second-phase spec '" + spec + "' is malformed");
    SecondPhaseKind kind = parse_second_phase_kind(head_tail[0]);
    int k = kind == SecondPhaseKind::kmeans ? 9 : 1;
    if (head_tail.size() == 2 && !head_tail[1].empty()) {
        for (const auto& kv : split(head_tail[1], ',')) {
            auto pair = split(kv, '=');
            if (pair.size() != 2 || pair[0] != "k") {
                throw ParamError("second-phase spec: unknown parameter '" + kv + "'");
            }
            k = std::stoi(pair[1]);
        }
    }
    return fit_second_phase(kind, k, latent_train, quantile);
}

void run_detect(const DetectArgs& args) {
    ModelFile file = load_model(args.model);
    Dataset train = load_features(args.train, args.label_column);
    Dataset test = load_features(args.test, args.label_column);
    if (train.m() != file.normalizer.m() || test.m() != file.normalizer.m()) {
        throw ConfigError("detect: model expects " + std::to_string(file.normalizer.m()) +
                          " columns, got train=" + std::to_string(train.m()) + ", test=" +
                          std::to_string(test.m()));
    }

    Matrix train_n = apply(file.normalizer, train.x);
    Matrix test_n = apply(file.normalizer, test.x);

    FirstPhaseDetector first = fit_first_phase(std::move(file.model), train_n, args.quantile);
    std::optional<SecondPhaseDetector> second =
        fit_second_from_spec(args.second_phase, model_encode(first.model, train_n), args.quantile);

    std::vector<DetectionRow> rows = detect(first, second, test_n);

    std::ofstream out(args.out);
    if (!out) throw FormatError("cannot open '" + args.out + "' for writing");
    Index flagged = 0;
    for (const DetectionRow& row : rows) {
        out << detection_row_jsonl(row) << '\n';
        flagged += row.anomaly ? 1 : 0;
    }
    if (!out) throw FormatError("write to '" + args.out + "' failed");
    std::cout << "wrote " << args.out << " (" << rows.size() << " rows, " << flagged
              << " flagged, mse_threshold=" << format_double(first.mse_threshold) << ")\n";
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string results;
    std::string labels;
    std::string label_column = "label";
    std::string score = "recon";
    std::string out;
    std::string roc_out;
};

void run_eval(const EvalArgs& args) {
    std::ifstream in(args.results);
    if (!in) throw FormatError("cannot open '" + args.results + "'");
    std::vector<DetectionRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(parse_detection_row(line));
    }
    if (rows.empty()) throw EvalError("eval: no result rows in '" + args.results + "'");

    Dataset labeled = load_csv(args.labels, args.label_column);
    if (!labeled.labels) throw EvalError("eval: labels file has no label column");
    if (labeled.n() != static_cast<Index>(rows.size())) {
        throw EvalError("eval: " + std::to_string(rows.size()) + " result rows vs " +
                        std::to_string(labeled.n()) + " labeled rows");
    }

    std::vector<double> scores;
    std::vector<int> predictions;
    scores.reserve(rows.size());
    for (const DetectionRow& row : rows) {
        if (args.score == "recon") {
            scores.push_back(row.recon_error);
        } else if (args.score == "second") {
            if (!row.second_score) {
                throw EvalError("eval: results carry no second-phase score");
            }
            scores.push_back(*row.second_score);
        } else if (args.score == "combined") {
            scores.push_back(row.combined_score);
        } else {
            throw ParamError("eval: unknown score '" + args.score + "'");
        }
        predictions.push_back(row.anomaly ? 1 : 0);
    }

    RocCurve roc = roc_auc(scores, *labeled.labels);
    EvalReport report = confusion(predictions, *labeled.labels);
    report.auc = roc.auc;

    nlohmann::json doc;
    doc["n"] = rows.size();
    doc["score"] = args.score;
    doc["auc"] = *report.auc;
    doc["tp"] = report.tp;
    doc["fp"] = report.fp;
    doc["tn"] = report.tn;
    doc["fn"] = report.fn;
    doc["precision"] = report.precision;
    doc["recall"] = report.recall;
    doc["f1"] = report.f1;
    doc["f1_degenerate"] = report.f1_degenerate;
    write_text(args.out, doc.dump(2) + "\n");

    if (!args.roc_out.empty()) {
        std::ostringstream csv;
        csv << "fpr,tpr\n";
        for (const auto& [fpr, tpr] : roc.points) {
            csv << format_double(fpr) << ',' << format_double(tpr) << '\n';
        }
        write_text(args.roc_out, csv.str());
    }
    std::cout << "wrote " << args.out << " (auc=" << roc.auc << ", f1=" << report.f1 << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tpad - two-phase anomaly detection for high-dimensional sensor data"};
    app.require_subcommand(1);

    // --- synth ---
    auto* synth = app.add_subcommand("synth", "generate synthetic datasets");
    synth->require_subcommand(1);

    SynthWatertankArgs wt;
    auto* watertank = synth->add_subcommand("watertank", "two-signal water-tank system");
    watertank->add_option("--n", wt.params.n, "number of normal observations");
    watertank->add_option("--seed", wt.params.seed, "generator seed");
    watertank->add_option("--a", wt.params.a, "flow coefficient");
    watertank->add_option("--h-min", wt.params.h_min, "minimum level");
    watertank->add_option("--h-max", wt.params.h_max, "maximum level");
    watertank->add_option("--noise-std", wt.params.noise_std, "measurement noise std");
    watertank->add_option("--out", wt.out, "output CSV (unlabeled normal data)")->required();
    watertank->add_option("--anomalies", wt.anomalies, "number of anomalous observations");
    watertank->add_option("--anomaly-kinds", wt.anomaly_kinds,
                          "comma list of off_manifold,out_of_range");
    watertank->add_option("--anomalies-out", wt.anomalies_out, "anomaly CSV (label column all 1)");
    watertank->add_option("--mixed-out", wt.mixed_out,
                          "labeled test CSV of fresh normals plus the anomalies");
    watertank->add_option("--mixed-normal", wt.mixed_normal, "normal rows in the mixed file");
    watertank->callback([&wt]() { run_synth_watertank(wt); });

    SynthNonlinArgs nl;
    auto* nonlin = synth->add_subcommand("nonlin", "nonlinearity-pool manifold data");
    nonlin->add_option("--latent-dim", nl.params.latent_dim, "intrinsic dimensionality");
    nonlin->add_option("--obs-dim", nl.params.obs_dim, "observation dimensionality");
    nonlin->add_option("--ops", nl.ops, "comma list of product,cube,time_pair,linear_mix");
    nonlin->add_option("--noise-std", nl.params.noise_std, "measurement noise std");
    nonlin->add_option("--n", nl.params.n, "number of observations");
    nonlin->add_option("--seed", nl.params.seed, "generator seed");
    nonlin->add_option("--out", nl.out, "output CSV")->required();
    nonlin->add_option("--manifest", nl.manifest_out, "column-formula manifest JSON");
    nonlin->callback([&nl]() { run_synth_nonlin(nl); });

    // --- fit ---
    auto* fit = app.add_subcommand("fit", "fit a dimensionality-reduction model");
    fit->require_subcommand(1);
    FitArgs fit_args;
    for (const char* kind : {"pca", "ae"}) {
        auto* sub = fit->add_subcommand(kind, std::string(kind) + " model");
        sub->add_option("--data", fit_args.data, "training CSV")->required();
        sub->add_option("--label-column", fit_args.label_column,
                        "label column to strip if present (default: label)");
        sub->add_option("--p", fit_args.p, "reduced dimensionality")->required();
        if (std::string(kind) == "ae") {
            sub->add_option("--config", fit_args.config,
                            "training config JSON (learning_rate, batch_size, max_epochs, "
                            "patience, validation_fraction, layer_sizes)");
        }
        sub->add_option("--seed", fit_args.seed, "training seed");
        sub->add_option("--out", fit_args.out, "model JSON path")->required();
        const bool use_ae = std::string(kind) == "ae";
        sub->callback([&fit_args, use_ae]() { run_fit(fit_args, use_ae); });
    }

    // --- sweep ---
    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "reconstruction error vs reduced dimension");
    sweep_cmd->add_option("--data", sweep_args.data, "input CSV")->required();
    sweep_cmd->add_option("--label-column", sweep_args.label_column,
                          "label column to strip if present");
    sweep_cmd->add_option("--method", sweep_args.method, "pca or ae")->required();
    sweep_cmd->add_option("--pmin", sweep_args.p_min, "smallest p")->required();
    sweep_cmd->add_option("--pmax", sweep_args.p_max, "largest p")->required();
    sweep_cmd->add_option("--folds", sweep_args.cfg.folds, "cross-validation folds");
    sweep_cmd->add_option("--seed", sweep_args.cfg.seed, "sweep seed");
    sweep_cmd->add_option("--fraction", sweep_args.fraction,
                          "intrinsic-dimension threshold fraction");
    sweep_cmd->add_option("--threads", sweep_args.cfg.threads, "worker threads (0 = auto)");
    sweep_cmd->add_option("--ae-lr", sweep_args.cfg.ae_train.learning_rate, "AE learning rate");
    sweep_cmd->add_option("--ae-batch", sweep_args.cfg.ae_train.batch_size, "AE batch size");
    sweep_cmd->add_option("--ae-epochs", sweep_args.cfg.ae_train.max_epochs, "AE max epochs");
    sweep_cmd->add_option("--ae-patience", sweep_args.cfg.ae_train.patience, "AE patience");
    sweep_cmd->add_option("--out", sweep_args.out, "sweep JSON path")->required();
    sweep_cmd->add_option("--csv-out", sweep_args.csv_out, "companion CSV (default: out with .csv)");
    sweep_cmd->callback([&sweep_args]() { run_sweep(sweep_args); });

    // --- detect ---
    DetectArgs detect_args;
    auto* detect_cmd = app.add_subcommand("detect", "run two-phase anomaly detection");
    detect_cmd->add_option("--model", detect_args.model, "model JSON from fit")->required();
    detect_cmd->add_option("--train", detect_args.train, "training CSV for calibration")->required();
    detect_cmd->add_option("--test", detect_args.test, "test CSV to score")->required();
    detect_cmd->add_option("--label-column", detect_args.label_column,
                           "label column to strip if present");
    detect_cmd->add_option("--quantile", detect_args.quantile, "threshold quantile");
    detect_cmd->add_option("--second-phase", detect_args.second_phase,
                           "latent-space detector: knn:k=1, kmeans:k=9 or hypercube");
    detect_cmd->add_option("--out", detect_args.out, "results JSONL path")->required();
    detect_cmd->callback([&detect_args]() { run_detect(detect_args); });

    // --- eval ---
    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "score detection results against labels");
    eval_cmd->add_option("--results", eval_args.results, "results JSONL from detect")->required();
    eval_cmd->add_option("--labels", eval_args.labels, "labeled CSV")->required();
    eval_cmd->add_option("--label-column", eval_args.label_column, "label column name");
    eval_cmd->add_option("--score", eval_args.score, "continuous score: recon, second or combined");
    eval_cmd->add_option("--out", eval_args.out, "report JSON path")->required();
    eval_cmd->add_option("--roc-out", eval_args.roc_out, "ROC curve CSV (fpr,tpr)");
    eval_cmd->callback([&eval_args]() { run_eval(eval_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
