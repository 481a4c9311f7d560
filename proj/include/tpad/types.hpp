#pragma once

#include <Eigen/Core>

namespace tpad {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// All fitted models and datasets work in double precision; rows are
// observations, columns are signals.
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

using ConstMatrixRef = Eigen::Ref<const Matrix>;
using ConstVectorRef = Eigen::Ref<const Vector>;

} // namespace tpad
