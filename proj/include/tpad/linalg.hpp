#pragma once

#include <Eigen/Core>

#include "tpad/errors.hpp"
#include "tpad/types.hpp"

namespace tpad {

/// Shape-checked matrix product.
Matrix matmul(const ConstMatrixRef& a, const ConstMatrixRef& b);

struct SymEigen {
    Vector eigenvalues; ///< sorted descending
    Matrix eigenvectors; ///< column i pairs with eigenvalues[i]; orthonormal
};

/// Eigendecomposition of a symmetric matrix. Input must be square and
/// symmetric within `symmetry_tol` (absolute). Eigenvector signs are fixed
/// so the largest-magnitude component of each vector is positive, making
/// the decomposition deterministic for serialization and tests.
SymEigen sym_eigen(const ConstMatrixRef& s, double symmetry_tol = 1e-9);

template <typename Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

/// Mean squared error under the per-coordinate convention: the squared
/// Frobenius distance divided by rows*cols. Per-observation scores use the
/// same 1/m scaling (see row_mse), so thresholds are comparable across
/// datasets of different width.
template <typename DerivedA, typename DerivedB>
double mse(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("mse: dimension mismatch");
    }
    return (a - b).squaredNorm() / static_cast<double>(a.rows() * a.cols());
}

/// Per-row mean squared error: |a_i - b_i|^2 / m for each row i.
template <typename DerivedA, typename DerivedB>
Vector row_mse(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError("row_mse: dimension mismatch");
    }
    return (a - b).rowwise().squaredNorm() / static_cast<double>(a.cols());
}

} // namespace tpad
