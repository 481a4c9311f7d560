#include "tpad/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>

namespace tpad {

Matrix matmul(const ConstMatrixRef& a, const ConstMatrixRef& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " * " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
    }
    return a * b;
}

SymEigen sym_eigen(const ConstMatrixRef& s, double symmetry_tol) {
    if (s.rows() != s.cols()) {
        throw ShapeError("sym_eigen: matrix is not square");
    }
    double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= symmetry_tol)) { // also catches NaN
        throw ShapeError("sym_eigen: matrix is not symmetric (max asymmetry " +
                         std::to_string(asym) + ")");
    }

    Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("sym_eigen: eigensolver did not converge");
    }

    const Index n = s.rows();
    SymEigen out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);

    // Eigen returns ascending order; flip to descending.
    for (Index i = 0; i < n; ++i) {
        out.eigenvalues[i] = solver.eigenvalues()[n - 1 - i];
        out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
    }

    // Sign convention: largest-magnitude component of each vector positive.
    for (Index i = 0; i < n; ++i) {
        Index arg = 0;
        double best = 0.0;
        for (Index r = 0; r < n; ++r) {
            double mag = std::abs(out.eigenvectors(r, i));
            if (mag > best) {
                best = mag;
                arg = r;
            }
        }
        if (out.eigenvectors(arg, i) < 0.0) {
            out.eigenvectors.col(i) = -out.eigenvectors.col(i);
        }
    }
    return out;
}

} // namespace tpad
