#include "tpad/pca.hpp"

#include <algorithm>
#include <string>

#include "tpad/errors.hpp"
#include "tpad/linalg.hpp"

namespace tpad {

PcaModel fit_pca(const ConstMatrixRef& train, int p) {
    const Index n = train.rows();
    const Index m = train.cols();
    if (p < 1 || static_cast<Index>(p) > m) {
        throw ParamError("fit_pca: p=" + std::to_string(p) + " out of range [1, " +
                         std::to_string(m) + "]");
    }
    if (n < 2) {
        throw InsufficientDataError("fit_pca: need at least 2 observations");
    }

    Matrix cov = (train.transpose() * train) / static_cast<double>(n);
    cov = ((cov + cov.transpose()) * 0.5).eval(); // enforce exact symmetry
    SymEigen eig = sym_eigen(cov);

    PcaModel model;
    model.p = p;
    model.w = eig.eigenvectors.leftCols(p).transpose();
    double total = 0.0;
    for (Index i = 0; i < m; ++i) total += std::max(eig.eigenvalues[i], 0.0);
    model.explained.resize(p);
    for (int i = 0; i < p; ++i) {
        model.explained[i] = total > 0.0 ? std::max(eig.eigenvalues[i], 0.0) / total : 0.0;
    }
    return model;
}

Matrix encode(const PcaModel& model, const ConstMatrixRef& x) {
    if (x.cols() != model.m()) {
        throw ShapeError("pca encode: x has " + std::to_string(x.cols()) +
                         " columns, model expects " + std::to_string(model.m()));
    }
    return x * model.w.transpose();
}

Matrix decode(const PcaModel& model, const ConstMatrixRef& z) {
    if (z.cols() != model.p) {
        throw ShapeError("pca decode: z has " + std::to_string(z.cols()) +
                         " columns, model expects " + std::to_string(model.p));
    }
    return z * model.w;
}

Matrix reconstruct(const PcaModel& model, const ConstMatrixRef& x) {
    return decode(model, encode(model, x));
}

} // namespace tpad
