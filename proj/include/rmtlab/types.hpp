#pragma once

#include <Eigen/Dense>
#include <complex>

namespace rmt {

// Dense row-major storage; entry (i, j) of an N x n matrix sits at i * n + j.
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

}  // namespace rmt
