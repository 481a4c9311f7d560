#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "tpad/dataset.hpp"
#include "tpad/detect.hpp"

namespace tpad {

/// Timestamps live only here and are excluded from reproducibility
/// comparisons; everything else in the file is a pure function of the
/// inputs and seed.
struct ModelMetadata {
    std::string created_at;       // ISO-8601 UTC
    std::uint64_t seed = 0;
    std::string data_fingerprint; // "fnv1a64:<hex>" of the training file bytes
};

/// On-disk model bundle: the fitted normalizer plus the PCA or AE payload.
/// All floating-point payload values are serialized as decimal strings at
/// full round-trip precision, so load-then-save is byte-stable for the
/// payload fields and the format is portable across languages.
struct ModelFile {
    static constexpr int kCurrentVersion = 1;

    int format_version = kCurrentVersion;
    Normalizer normalizer;
    DimRedModel model;
    ModelMetadata metadata;

    std::string kind() const; // "pca" or "ae"
};

std::string model_to_json(const ModelFile& file);
ModelFile model_from_json(const std::string& text);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

std::string fingerprint_bytes(std::string_view bytes);
std::string fingerprint_file(const std::filesystem::path& path);
std::string iso8601_now_utc();

/// One detection result as a single JSON line:
/// {"anomaly":..,"anomaly1":..,"anomaly2":..,"combined_score":..,"index":..,
///  "latent":[..],"recon_error":..,"second_score":..}
/// anomaly2/second_score appear only when a second phase was configured.
std::string detection_row_jsonl(const DetectionRow& row);
DetectionRow parse_detection_row(const std::string& line);

} // namespace tpad
