#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpad/autoencoder.hpp"
#include "tpad/dataset.hpp"
#include "tpad/types.hpp"

namespace tpad {

enum class SweepMethod { pca, ae };

SweepMethod parse_sweep_method(const std::string& name);
std::string sweep_method_name(SweepMethod method);

struct SweepConfig {
    int folds = 5;
    std::uint64_t seed = 0;
    TrainConfig ae_train;   // per-cell seed is derived; the seed field here is ignored
    int threads = 0;        // 0 = hardware concurrency; (p, fold) cells are independent
};

/// Cross-validated reconstruction error per reduced dimension. Aggregates
/// across folds: the min mirrors a best-model selection, mean/std describe
/// the spread.
struct SweepResult {
    SweepMethod method = SweepMethod::pca;
    std::vector<int> p_values;
    std::vector<double> mse_mean;
    std::vector<double> mse_min;
    std::vector<double> mse_std;
    std::optional<int> estimated_dim;
    bool estimate_used_fallback = false;
};

/// Per (p, fold): fit on the training folds (normalizer refit per fold,
/// no leakage), evaluate per-coordinate MSE on the validation fold.
/// Deterministic per cfg.seed regardless of execution order or thread
/// count; AE cells derive their training seed from (seed, p, fold).
SweepResult sweep(const Dataset& data, SweepMethod method, int p_min, int p_max,
                  const SweepConfig& cfg);

struct DimEstimate {
    int dim = 0;
    bool used_fallback = false; // max-curvature elbow instead of the threshold rule
};

/// Intrinsic dimensionality estimate: the smallest p whose min-across-folds
/// MSE drops below `fraction` of the normalized per-coordinate variance
/// (baseline 1.0). If no p qualifies, falls back to the largest second
/// difference of log MSE (the elbow) and flags it.
DimEstimate estimate_dim(const SweepResult& sweep, double fraction = 0.01);

std::string sweep_result_json(const SweepResult& result);
std::string sweep_result_csv(const SweepResult& result);

} // namespace tpad
