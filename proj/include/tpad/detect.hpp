#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tpad/autoencoder.hpp"
#include "tpad/pca.hpp"
#include "tpad/types.hpp"

namespace tpad {

/// Either dimensionality-reduction model can drive the detector stack.
using DimRedModel = std::variant<PcaModel, AeModel>;

Index model_input_dim(const DimRedModel& model);
int model_latent_dim(const DimRedModel& model);
Matrix model_encode(const DimRedModel& model, const ConstMatrixRef& x);
Matrix model_reconstruct(const DimRedModel& model, const ConstMatrixRef& x);

/// Per-observation reconstruction error |x_i - dec(enc(x_i))|^2 / m.
/// x must be normalized with the training Normalizer.
Vector reconstruction_scores(const DimRedModel& model, const ConstMatrixRef& x);

/// Nearest-rank empirical quantile: the ceil(q*n)-th smallest score.
/// The fraction of scores strictly above the result is at most 1-q.
double calibrate_threshold(const std::vector<double>& scores, double q);
double calibrate_threshold(const ConstVectorRef& scores, double q);

// ---------------------------------------------------------------------------
// Phase 1: reconstruction error against a calibrated threshold.
// ---------------------------------------------------------------------------

struct FirstPhaseDetector {
    DimRedModel model;
    double mse_threshold = 0.0;
    double threshold_quantile = 0.999;
};

/// Calibrates the threshold as the empirical quantile of the training
/// reconstruction errors (train_x normalized).
FirstPhaseDetector fit_first_phase(DimRedModel model, const ConstMatrixRef& train_x,
                                   double quantile);

// ---------------------------------------------------------------------------
// Phase 2: detectors in the latent space.
// ---------------------------------------------------------------------------

enum class SecondPhaseKind { knn, kmeans, hypercube };

SecondPhaseKind parse_second_phase_kind(const std::string& name);
std::string second_phase_kind_name(SecondPhaseKind kind);

struct SecondPhaseDetector {
    SecondPhaseKind kind = SecondPhaseKind::knn;
    int k = 1;            // neighbors (knn) or clusters (kmeans)
    Matrix points;        // knn: stored training latents; kmeans: centroids
    Vector lower, upper;  // hypercube per-dimension bounds
    double score_threshold = 0.0;
    double threshold_quantile = 0.999;

    Index latent_dim() const;
};

struct KMeansResult {
    Matrix centroids;
    double objective = 0.0;              // final sum of squared assigned distances
    std::vector<double> objective_trace; // per Lloyd iteration, non-increasing
};

/// One seeded k-means++ / Lloyd run; converges when the maximum centroid
/// shift drops below 1e-8 or after 300 iterations.
KMeansResult kmeans_fit(const ConstMatrixRef& x, int k, std::uint64_t seed);

/// Fits on training latent points only and calibrates score_threshold at the
/// same quantile semantics as phase 1.
///  - knn: stores the training latents; calibration scores exclude self.
///  - kmeans: seeded k-means++-style Lloyd iterations, best of 5 restarts;
///    deterministic (internal derived seeds).
///  - hypercube: per-dimension empirical quantile bounds splitting the tail
///    mass (1-q) symmetrically.
SecondPhaseDetector fit_second_phase(SecondPhaseKind kind, int k,
                                     const ConstMatrixRef& latent_train, double q);

/// knn: Euclidean distance to the k-th nearest stored point; kmeans:
/// distance to the nearest centroid; hypercube: max over dimensions of the
/// signed excursion beyond the bounds (<= 0 inside the box).
Vector second_phase_score(const SecondPhaseDetector& det, const ConstMatrixRef& z);

// ---------------------------------------------------------------------------
// Two-phase decision: anomaly = (E > MSE_th) OR (phase-2 score > threshold).
// ---------------------------------------------------------------------------

struct DetectionRow {
    Index index = 0;
    double recon_error = 0.0;
    Vector latent;
    bool anomaly1 = false;
    std::optional<bool> anomaly2;       // absent when no second phase is configured
    bool anomaly = false;
    std::optional<double> second_score; // continuous phase-2 score
    double combined_score = 0.0;        // max threshold margin; > 0 iff anomaly
};

std::vector<DetectionRow> detect(const FirstPhaseDetector& first,
                                 const std::optional<SecondPhaseDetector>& second,
                                 const ConstMatrixRef& x_test);

} // namespace tpad
