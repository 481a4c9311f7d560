#include "tpad/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

#include "tpad/errors.hpp"
#include "tpad/linalg.hpp"
#include "tpad/rng.hpp"

namespace tpad {

// ---------------------------------------------------------------------------
// Model dispatch
// ---------------------------------------------------------------------------

Index model_input_dim(const DimRedModel& model) {
    return std::visit([](const auto& m) { return m.m(); }, model);
}

int model_latent_dim(const DimRedModel& model) {
    if (const auto* pca = std::get_if<PcaModel>(&model)) return pca->p;
    return std::get<AeModel>(model).p();
}

Matrix model_encode(const DimRedModel& model, const ConstMatrixRef& x) {
    return std::visit([&](const auto& m) { return encode(m, x); }, model);
}

Matrix model_reconstruct(const DimRedModel& model, const ConstMatrixRef& x) {
    return std::visit([&](const auto& m) { return reconstruct(m, x); }, model);
}

Vector reconstruction_scores(const DimRedModel& model, const ConstMatrixRef& x) {
    return row_mse(x, model_reconstruct(model, x));
}

// ---------------------------------------------------------------------------
// Threshold calibration
// ---------------------------------------------------------------------------

double calibrate_threshold(const std::vector<double>& scores, double q) {
    if (scores.empty()) throw ParamError("calibrate_threshold: empty scores");
    if (!(q > 0.0 && q < 1.0)) throw ParamError("calibrate_threshold: q must be in (0, 1)");
    const auto n = scores.size();
    auto rank = static_cast<size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<size_t>(rank, 1, n);
    std::vector<double> copy = scores;
    std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(rank - 1), copy.end());
    return copy[rank - 1];
}

double calibrate_threshold(const ConstVectorRef& scores, double q) {
    return calibrate_threshold(std::vector<double>(scores.data(), scores.data() + scores.size()), q);
}

FirstPhaseDetector fit_first_phase(DimRedModel model, const ConstMatrixRef& train_x,
                                   double quantile) {
    FirstPhaseDetector det;
    det.model = std::move(model);
    det.threshold_quantile = quantile;
    Vector scores = reconstruction_scores(det.model, train_x);
    det.mse_threshold = calibrate_threshold(scores, quantile);
    return det;
}

// ---------------------------------------------------------------------------
// Second phase
// ---------------------------------------------------------------------------

SecondPhaseKind parse_second_phase_kind(const std::string& name) {
    if (name == "knn") return SecondPhaseKind::knn;
    if (name == "kmeans") return SecondPhaseKind::kmeans;
    if (name == "hypercube") return SecondPhaseKind::hypercube;
    throw ParamError("unknown second-phase kind '" + name + "'");
}

std::string second_phase_kind_name(SecondPhaseKind kind) {
    switch (kind) {
        case SecondPhaseKind::knn: return "knn";
        case SecondPhaseKind::kmeans: return "kmeans";
        case SecondPhaseKind::hypercube: return "hypercube";
    }
    return "?";
}

Index SecondPhaseDetector::latent_dim() const {
    return kind == SecondPhaseKind::hypercube ? lower.size() : points.cols();
}

namespace {

// Squared Euclidean distances from each row of a to each row of b,
// chunked so the cross-product block stays small.
void for_each_distance_row(const ConstMatrixRef& a, const ConstMatrixRef& b,
                           const std::function<void(Index, Vector&)>& visit) {
    const Index chunk = 256;
    Vector b_sq = b.rowwise().squaredNorm();
    for (Index start = 0; start < a.rows(); start += chunk) {
        const Index count = std::min(chunk, a.rows() - start);
        Matrix cross = a.middleRows(start, count) * b.transpose();
        Vector a_sq = a.middleRows(start, count).rowwise().squaredNorm();
        for (Index i = 0; i < count; ++i) {
            Vector d2 =
                (b_sq.array() - 2.0 * cross.row(i).transpose().array() + a_sq[i]).max(0.0).matrix();
            visit(start + i, d2);
        }
    }
}

double kth_smallest(Vector& values, int k) {
    std::nth_element(values.data(), values.data() + (k - 1), values.data() + values.size());
    return values[k - 1];
}

} // namespace

KMeansResult kmeans_fit(const ConstMatrixRef& x, int k, std::uint64_t seed) {
    const Index n = x.rows();
    if (k < 1) throw ParamError("kmeans: k must be >= 1");
    if (static_cast<Index>(k) > n) throw ParamError("kmeans: k exceeds training size");
    Rng rng(seed);

    // k-means++-style seeding: D^2-weighted draws from the uniform stream
    Matrix centroids(k, x.cols());
    centroids.row(0) = x.row(static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
    Vector best_d2 = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        double total = best_d2.sum();
        Index pick = 0;
        if (total > 0.0) {
            double target = rng.uniform() * total;
            double acc = 0.0;
            for (Index i = 0; i < n; ++i) {
                acc += best_d2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        }
        centroids.row(c) = x.row(pick);
        best_d2 = best_d2.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }

    KMeansResult result;
    std::vector<int> assign(static_cast<size_t>(n), 0);
    for (int iter = 0; iter < 300; ++iter) {
        // assignment step; the objective is recorded here, so the trace is
        // non-increasing across iterations
        double objective = 0.0;
        for_each_distance_row(x, centroids, [&](Index i, Vector& d2) {
            Index arg = 0;
            objective += d2.minCoeff(&arg);
            assign[static_cast<size_t>(i)] = static_cast<int>(arg);
        });
        result.objective_trace.push_back(objective);
        result.objective = objective;

        // update step
        Matrix sums = Matrix::Zero(k, x.cols());
        std::vector<Index> counts(static_cast<size_t>(k), 0);
        for (Index i = 0; i < n; ++i) {
            sums.row(assign[static_cast<size_t>(i)]) += x.row(i);
            ++counts[static_cast<size_t>(assign[static_cast<size_t>(i)])];
        }
        Matrix next(k, x.cols());
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<size_t>(c)] > 0) {
                next.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<size_t>(c)]);
            } else {
                // empty cluster: move to the point currently worst served
                Index worst = 0;
                double worst_d2 = -1.0;
                for (Index i = 0; i < n; ++i) {
                    double d2 = (x.row(i) - centroids.row(assign[static_cast<size_t>(i)])).squaredNorm();
                    if (d2 > worst_d2) {
                        worst_d2 = d2;
                        worst = i;
                    }
                }
                next.row(c) = x.row(worst);
            }
        }

        double shift = (next - centroids).rowwise().norm().maxCoeff();
        centroids = next;
        if (shift < 1e-8) break;
    }

    result.centroids = centroids;
    // final objective against the converged centroids
    double objective = 0.0;
    for_each_distance_row(x, centroids, [&](Index, Vector& d2) { objective += d2.minCoeff(); });
    result.objective = objective;
    result.objective_trace.push_back(objective);
    return result;
}

SecondPhaseDetector fit_second_phase(SecondPhaseKind kind, int k,
                                     const ConstMatrixRef& latent_train, double q) {
    const Index n = latent_train.rows();
    if (n == 0) throw ParamError("fit_second_phase: empty latent training set");
    if (!(q > 0.0 && q < 1.0)) throw ParamError("fit_second_phase: q must be in (0, 1)");

    SecondPhaseDetector det;
    det.kind = kind;
    det.k = k;
    det.threshold_quantile = q;

    std::vector<double> train_scores;
    train_scores.reserve(static_cast<size_t>(n));

    switch (kind) {
        case SecondPhaseKind::knn: {
            if (k < 1) throw ParamError("knn: k must be >= 1");
            if (n < k + 1) {
                throw ParamError("knn: need at least k+1 training points for self-excluded calibration");
            }
            det.points = latent_train;
            // calibration scores exclude the point itself, otherwise every
            // training score is 0 and the threshold degenerates
            for_each_distance_row(latent_train, latent_train, [&](Index i, Vector& d2) {
                d2[i] = std::numeric_limits<double>::infinity();
                train_scores.push_back(std::sqrt(kth_smallest(d2, k)));
            });
            break;
        }
        case SecondPhaseKind::kmeans: {
            Rng base(0x6b6d6e73ull); // fixed stream; restarts derive children
            KMeansResult best;
            best.objective = std::numeric_limits<double>::infinity();
            for (int restart = 0; restart < 5; ++restart) {
                KMeansResult run = kmeans_fit(
                    latent_train, k, base.child(static_cast<std::uint64_t>(restart)).next_u64());
                if (run.objective < best.objective) best = std::move(run);
            }
            det.points = best.centroids;
            for_each_distance_row(latent_train, det.points, [&](Index, Vector& d2) {
                train_scores.push_back(std::sqrt(d2.minCoeff()));
            });
            break;
        }
        case SecondPhaseKind::hypercube: {
            const double tail = (1.0 - q) / 2.0;
            det.lower.resize(latent_train.cols());
            det.upper.resize(latent_train.cols());
            for (Index j = 0; j < latent_train.cols(); ++j) {
                std::vector<double> col(latent_train.col(j).data(),
                                        latent_train.col(j).data() + n);
                det.lower[j] = calibrate_threshold(col, tail);
                det.upper[j] = calibrate_threshold(col, 1.0 - tail);
            }
            Vector scores = second_phase_score(det, latent_train);
            train_scores.assign(scores.data(), scores.data() + scores.size());
            break;
        }
    }

    det.score_threshold = calibrate_threshold(train_scores, q);
    return det;
}

Vector second_phase_score(const SecondPhaseDetector& det, const ConstMatrixRef& z) {
    if (z.cols() != det.latent_dim()) {
        throw ShapeError("second_phase_score: z has " + std::to_string(z.cols()) +
                         " columns, detector expects " + std::to_string(det.latent_dim()));
    }
    Vector scores(z.rows());
    switch (det.kind) {
        case SecondPhaseKind::knn:
            for_each_distance_row(z, det.points, [&](Index i, Vector& d2) {
                scores[i] = std::sqrt(kth_smallest(d2, det.k));
            });
            break;
        case SecondPhaseKind::kmeans:
            for_each_distance_row(z, det.points, [&](Index i, Vector& d2) {
                scores[i] = std::sqrt(d2.minCoeff());
            });
            break;
        case SecondPhaseKind::hypercube:
            for (Index i = 0; i < z.rows(); ++i) {
                double worst = -std::numeric_limits<double>::infinity();
                for (Index j = 0; j < z.cols(); ++j) {
                    worst = std::max(worst, det.lower[j] - z(i, j));
                    worst = std::max(worst, z(i, j) - det.upper[j]);
                }
                scores[i] = worst;
            }
            break;
    }
    return scores;
}

// ---------------------------------------------------------------------------
// Two-phase detection
// ---------------------------------------------------------------------------

std::vector<DetectionRow> detect(const FirstPhaseDetector& first,
                                 const std::optional<SecondPhaseDetector>& second,
                                 const ConstMatrixRef& x_test) {
    if (x_test.cols() != model_input_dim(first.model)) {
        throw ConfigError("detect: test data has " + std::to_string(x_test.cols()) +
                          " columns, model expects " + std::to_string(model_input_dim(first.model)));
    }
    if (second && second->latent_dim() != model_latent_dim(first.model)) {
        throw ConfigError("detect: second phase fitted for p=" +
                          std::to_string(second->latent_dim()) + ", model has p=" +
                          std::to_string(model_latent_dim(first.model)));
    }

    Matrix z = model_encode(first.model, x_test);
    Vector errors = reconstruction_scores(first.model, x_test);
    Vector s2;
    if (second) s2 = second_phase_score(*second, z);

    std::vector<DetectionRow> rows(static_cast<size_t>(x_test.rows()));
    for (Index i = 0; i < x_test.rows(); ++i) {
        DetectionRow& row = rows[static_cast<size_t>(i)];
        row.index = i;
        row.recon_error = errors[i];
        row.latent = z.row(i).transpose();
        row.anomaly1 = errors[i] > first.mse_threshold;
        row.combined_score = errors[i] - first.mse_threshold;
        if (second) {
            row.second_score = s2[i];
            row.anomaly2 = s2[i] > second->score_threshold;
            row.combined_score = std::max(row.combined_score, s2[i] - second->score_threshold);
        }
        row.anomaly = row.anomaly1 || (row.anomaly2 && *row.anomaly2);
    }
    return rows;
}

} // namespace tpad
