#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace gob {

using Index = Eigen::Index;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Concrete double-precision aliases used throughout the library layers.
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;

}  // namespace gob
