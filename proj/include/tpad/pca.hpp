#pragma once

#include "tpad/types.hpp"

namespace tpad {

/// Linear dimensionality reduction: rows of w are the top-p principal
/// components (orthonormal). encode(x) = x w^T, decode(z) = z w;
/// decode(encode(x)) is the orthogonal projection onto the component span.
struct PcaModel {
    int p = 0;
    Matrix w;          // p x m, rows = components
    bool mean_removed = true; // input contract: data already centered by the Normalizer
    Vector explained;  // per-component variance fraction, descending

    Index m() const { return w.cols(); }
};

/// Fits on data that is already normalized (zero mean); the covariance is
/// the second-moment matrix x^T x / n. Deterministic: component signs follow
/// the sym_eigen convention.
PcaModel fit_pca(const ConstMatrixRef& train, int p);

Matrix encode(const PcaModel& model, const ConstMatrixRef& x);
Matrix decode(const PcaModel& model, const ConstMatrixRef& z);
Matrix reconstruct(const PcaModel& model, const ConstMatrixRef& x);

} // namespace tpad
