#include <doctest.h>

#include <cmath>

#include "tpad/linalg.hpp"
#include "tpad/rng.hpp"

using namespace tpad;

namespace {

Matrix random_matrix(Rng& rng, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.gaussian(0.0, 1.0);
    }
    return m;
}

// independent oracle: naive triple loop
Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
    Matrix c = Matrix::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.cols(); ++j) {
            for (Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
        }
    }
    return c;
}

} // namespace

TEST_CASE("matmul: identity case") {
    Matrix a(2, 2);
    a << 1, 2, 3, 4;
    Matrix r = matmul(Matrix::Identity(2, 2), a);
    CHECK(r == a);
}

TEST_CASE("matmul: 1x2 times 2x1 hand arithmetic") {
    Matrix a(1, 2), b(2, 1);
    a << 1, 2;
    b << 3, 4;
    Matrix r = matmul(a, b);
    REQUIRE(r.rows() == 1);
    REQUIRE(r.cols() == 1);
    CHECK(r(0, 0) == 11.0);
}

TEST_CASE("matmul: matches triple-loop oracle on random 5x4 * 4x3") {
    Rng rng(17);
    Matrix a = random_matrix(rng, 5, 4);
    Matrix b = random_matrix(rng, 4, 3);
    Matrix expected = matmul_oracle(a, b);
    CHECK((matmul(a, b) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("matmul: dimension mismatch") {
    CHECK_THROWS_AS(matmul(Matrix::Zero(2, 3), Matrix::Zero(2, 3)), ShapeError);
}

TEST_CASE("matmul: associativity on random triples") {
    Rng rng(23);
    for (int rep = 0; rep < 20; ++rep) {
        Matrix a = random_matrix(rng, 4, 5);
        Matrix b = random_matrix(rng, 5, 3);
        Matrix c = random_matrix(rng, 3, 6);
        Matrix left = matmul(matmul(a, b), c);
        Matrix right = matmul(a, matmul(b, c));
        double scale = std::max(left.cwiseAbs().maxCoeff(), 1.0);
        CHECK((left - right).cwiseAbs().maxCoeff() / scale < 1e-9);
    }
}

TEST_CASE("sym_eigen: diagonal case") {
    Matrix s(2, 2);
    s << 3, 0, 0, 1;
    SymEigen eig = sym_eigen(s);
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
    CHECK(eig.eigenvectors(0, 0) == doctest::Approx(1.0));
    CHECK(eig.eigenvectors(1, 0) == doctest::Approx(0.0));
    CHECK(eig.eigenvectors(0, 1) == doctest::Approx(0.0));
    CHECK(eig.eigenvectors(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("sym_eigen: 2x2 by characteristic polynomial") {
    // det([[2-l,1],[1,2-l]]) = l^2 - 4l + 3 => l = 3, 1; v1 = (1,1)/sqrt(2)
    Matrix s(2, 2);
    s << 2, 1, 1, 2;
    SymEigen eig = sym_eigen(s);
    CHECK(eig.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(eig.eigenvalues[1] == doctest::Approx(1.0));
    const double isq2 = 1.0 / std::sqrt(2.0);
    CHECK(eig.eigenvectors(0, 0) == doctest::Approx(isq2));
    CHECK(eig.eigenvectors(1, 0) == doctest::Approx(isq2));
}

TEST_CASE("sym_eigen: reconstruction and orthonormality on random symmetric 8x8") {
    Rng rng(31);
    Matrix a = random_matrix(rng, 8, 8);
    Matrix s = (a + a.transpose()) * 0.5;
    SymEigen eig = sym_eigen(s);

    Matrix lambda = eig.eigenvalues.asDiagonal();
    Matrix recon = eig.eigenvectors * lambda * eig.eigenvectors.transpose();
    CHECK((recon - s).cwiseAbs().maxCoeff() < 1e-8);

    Matrix gram = eig.eigenvectors.transpose() * eig.eigenvectors;
    CHECK((gram - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-8);

    // eigenpairs: S v_i = lambda_i v_i
    for (Index i = 0; i < 8; ++i) {
        Vector lhs = s * eig.eigenvectors.col(i);
        Vector rhs = eig.eigenvalues[i] * eig.eigenvectors.col(i);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-8);
    }

    // trace identity and descending order
    CHECK(eig.eigenvalues.sum() == doctest::Approx(s.trace()).epsilon(1e-8));
    for (Index i = 0; i + 1 < 8; ++i) CHECK(eig.eigenvalues[i] >= eig.eigenvalues[i + 1]);

    // sign rule: largest-magnitude component positive
    for (Index i = 0; i < 8; ++i) {
        Index arg = 0;
        eig.eigenvectors.col(i).cwiseAbs().maxCoeff(&arg);
        CHECK(eig.eigenvectors(arg, i) > 0.0);
    }
}

TEST_CASE("sym_eigen: rejects non-square and asymmetric input") {
    CHECK_THROWS_AS(sym_eigen(Matrix::Zero(2, 3)), ShapeError);
    Matrix s(2, 2);
    s << 1, 2, 0, 1;
    CHECK_THROWS_AS(sym_eigen(s), ShapeError);
}

TEST_CASE("mse and row_mse use the per-coordinate convention") {
    Matrix a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 1, 2, 3, 6; // one entry off by 2
    CHECK(mse(a, b) == doctest::Approx(4.0 / 4.0));
    Vector rows = row_mse(a, b);
    CHECK(rows[0] == doctest::Approx(0.0));
    CHECK(rows[1] == doctest::Approx(2.0)); // 4 / m=2
    CHECK_THROWS_AS(mse(a, Matrix::Zero(3, 2)), ShapeError);
}
