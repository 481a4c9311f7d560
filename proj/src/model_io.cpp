#include "tpad/model_io.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "tpad/errors.hpp"
#include "tpad/format.hpp"

namespace tpad {

using nlohmann::json;

namespace {

double number_from(const json& v, const char* what) {
    double out = 0.0;
    if (v.is_string()) {
        out = parse_double(v.get_ref<const std::string&>());
    } else if (v.is_number()) {
        out = v.get<double>();
    } else {
        throw FormatError(std::string("model json: ") + what + " is not a number");
    }
    if (!std::isfinite(out)) {
        throw FormatError(std::string("model json: ") + what + " is not finite");
    }
    return out;
}

json vector_to_json(const ConstVectorRef& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(format_double(v[i]));
    return arr;
}

Vector vector_from_json(const json& arr, const char* what) {
    if (!arr.is_array()) throw FormatError(std::string("model json: ") + what + " is not an array");
    Vector v(static_cast<Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Index>(i)] = number_from(arr[i], what);
    return v;
}

json matrix_to_json(const Matrix& m) {
    // flat row-major
    json arr = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) arr.push_back(format_double(m(r, c)));
    }
    return arr;
}

Matrix matrix_from_json(const json& arr, Index rows, Index cols, const char* what) {
    if (!arr.is_array() || static_cast<Index>(arr.size()) != rows * cols) {
        throw FormatError(std::string("model json: ") + what + " has wrong length");
    }
    Matrix m(rows, cols);
    size_t i = 0;
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) m(r, c) = number_from(arr[i++], what);
    }
    return m;
}

json doubles_to_json(const std::vector<double>& values) {
    json arr = json::array();
    for (double v : values) arr.push_back(format_double(v));
    return arr;
}

std::vector<double> doubles_from_json(const json& arr, const char* what) {
    if (!arr.is_array()) throw FormatError(std::string("model json: ") + what + " is not an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) out.push_back(number_from(v, what));
    return out;
}

json pca_payload(const PcaModel& model) {
    json payload;
    payload["p"] = model.p;
    payload["m"] = model.m();
    payload["mean_removed"] = model.mean_removed;
    payload["w"] = matrix_to_json(model.w);
    payload["explained"] = vector_to_json(model.explained);
    return payload;
}

PcaModel pca_from_payload(const json& payload) {
    PcaModel model;
    model.p = payload.at("p").get<int>();
    Index m = payload.at("m").get<Index>();
    if (model.p < 1 || static_cast<Index>(model.p) > m) {
        throw FormatError("model json: pca p out of range");
    }
    model.mean_removed = payload.at("mean_removed").get<bool>();
    model.w = matrix_from_json(payload.at("w"), model.p, m, "w");
    model.explained = vector_from_json(payload.at("explained"), "explained");
    return model;
}

json ae_payload(const AeModel& model) {
    json payload;
    payload["layer_sizes"] = model.arch.layer_sizes;
    json acts = json::array();
    for (Activation a : model.arch.activations) {
        acts.push_back(a == Activation::tanh ? "tanh" : "identity");
    }
    payload["activations"] = acts;
    json weights = json::array();
    for (const Matrix& w : model.weights) weights.push_back(matrix_to_json(w));
    payload["weights"] = weights;
    json biases = json::array();
    for (const Vector& b : model.biases) biases.push_back(vector_to_json(b));
    payload["biases"] = biases;
    payload["train_log"] = {{"train_mse", doubles_to_json(model.train_log.train_mse)},
                            {"val_mse", doubles_to_json(model.train_log.val_mse)},
                            {"best_epoch", model.train_log.best_epoch}};
    return payload;
}

AeModel ae_from_payload(const json& payload) {
    AeModel model;
    model.arch.layer_sizes = payload.at("layer_sizes").get<std::vector<int>>();
    for (const auto& name : payload.at("activations")) {
        const std::string& s = name.get_ref<const std::string&>();
        if (s == "tanh") {
            model.arch.activations.push_back(Activation::tanh);
        } else if (s == "identity") {
            model.arch.activations.push_back(Activation::identity);
        } else {
            throw FormatError("model json: unknown activation '" + s + "'");
        }
    }
    model.arch.validate();
    const auto& weights = payload.at("weights");
    const auto& biases = payload.at("biases");
    if (weights.size() != model.arch.num_transitions() ||
        biases.size() != model.arch.num_transitions()) {
        throw FormatError("model json: weight/bias count does not match layer_sizes");
    }
    for (size_t l = 0; l < model.arch.num_transitions(); ++l) {
        Index rows = model.arch.layer_sizes[l + 1];
        Index cols = model.arch.layer_sizes[l];
        model.weights.push_back(matrix_from_json(weights[l], rows, cols, "weights"));
        Vector b = vector_from_json(biases[l], "biases");
        if (b.size() != rows) throw FormatError("model json: bias length mismatch");
        model.biases.push_back(std::move(b));
    }
    if (payload.contains("train_log")) {
        const auto& log = payload.at("train_log");
        model.train_log.train_mse = doubles_from_json(log.at("train_mse"), "train_mse");
        model.train_log.val_mse = doubles_from_json(log.at("val_mse"), "val_mse");
        model.train_log.best_epoch = log.at("best_epoch").get<int>();
    }
    return model;
}

} // namespace

std::string ModelFile::kind() const {
    return std::holds_alternative<PcaModel>(model) ? "pca" : "ae";
}

std::string model_to_json(const ModelFile& file) {
    json doc;
    doc["format_version"] = file.format_version;
    doc["kind"] = file.kind();
    doc["normalizer"] = {{"mean", vector_to_json(file.normalizer.mean)},
                         {"scale", vector_to_json(file.normalizer.scale)}};
    if (const auto* pca = std::get_if<PcaModel>(&file.model)) {
        doc["model"] = pca_payload(*pca);
    } else {
        doc["model"] = ae_payload(std::get<AeModel>(file.model));
    }
    doc["metadata"] = {{"created_at", file.metadata.created_at},
                       {"seed", std::to_string(file.metadata.seed)},
                       {"data_fingerprint", file.metadata.data_fingerprint}};
    return doc.dump(2) + "\n";
}

ModelFile model_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("model json: parse error: ") + e.what());
    }
    ModelFile file;
    file.format_version = doc.at("format_version").get<int>();
    if (file.format_version > ModelFile::kCurrentVersion || file.format_version < 1) {
        throw FormatError("model json: unsupported format_version " +
                          std::to_string(file.format_version));
    }
    const std::string kind = doc.at("kind").get<std::string>();
    const auto& payload = doc.at("model");
    if (kind == "pca") {
        file.model = pca_from_payload(payload);
    } else if (kind == "ae") {
        file.model = ae_from_payload(payload);
    } else {
        throw FormatError("model json: unknown kind '" + kind + "'");
    }
    const auto& norm = doc.at("normalizer");
    file.normalizer.mean = vector_from_json(norm.at("mean"), "normalizer.mean");
    file.normalizer.scale = vector_from_json(norm.at("scale"), "normalizer.scale");
    if (file.normalizer.mean.size() != file.normalizer.scale.size() ||
        file.normalizer.mean.size() != model_input_dim(file.model)) {
        throw FormatError("model json: normalizer size does not match the model");
    }
    if (doc.contains("metadata")) {
        const auto& meta = doc.at("metadata");
        file.metadata.created_at = meta.value("created_at", "");
        file.metadata.data_fingerprint = meta.value("data_fingerprint", "");
        if (meta.contains("seed")) {
            file.metadata.seed = std::stoull(meta.at("seed").get<std::string>());
        }
    }
    return file;
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("save_model: cannot open '" + path.string() + "'");
    out << model_to_json(file);
    if (!out) throw FormatError("save_model: write to '" + path.string() + "' failed");
}

ModelFile load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_model: cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return model_from_json(buf.str());
}

std::string fingerprint_bytes(std::string_view bytes) {
    return "fnv1a64:" + to_hex(fnv1a64(bytes));
}

std::string fingerprint_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("fingerprint_file: cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return fingerprint_bytes(buf.str());
}

std::string iso8601_now_utc() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// Detection results as JSON lines
// ---------------------------------------------------------------------------

std::string detection_row_jsonl(const DetectionRow& row) {
    json line;
    line["index"] = row.index;
    line["recon_error"] = row.recon_error;
    json latent = json::array();
    for (Index i = 0; i < row.latent.size(); ++i) latent.push_back(row.latent[i]);
    line["latent"] = latent;
    line["anomaly1"] = row.anomaly1;
    if (row.anomaly2) line["anomaly2"] = *row.anomaly2;
    if (row.second_score) line["second_score"] = *row.second_score;
    line["anomaly"] = row.anomaly;
    line["combined_score"] = row.combined_score;
    return line.dump();
}

DetectionRow parse_detection_row(const std::string& text) {
    json line;
    try {
        line = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("results jsonl: parse error: ") + e.what());
    }
    DetectionRow row;
    row.index = line.at("index").get<Index>();
    row.recon_error = line.at("recon_error").get<double>();
    const auto& latent = line.at("latent");
    row.latent.resize(static_cast<Index>(latent.size()));
    for (size_t i = 0; i < latent.size(); ++i) {
        row.latent[static_cast<Index>(i)] = latent[i].get<double>();
    }
    row.anomaly1 = line.at("anomaly1").get<bool>();
    if (line.contains("anomaly2")) row.anomaly2 = line.at("anomaly2").get<bool>();
    if (line.contains("second_score")) row.second_score = line.at("second_score").get<double>();
    row.anomaly = line.at("anomaly").get<bool>();
    row.combined_score = line.value("combined_score", 0.0);
    return row;
}

} // namespace tpad
