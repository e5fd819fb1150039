#pragma once

#include <Eigen/Dense>

namespace mpdae {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// Line-major grid view: row i holds the components on line i.
template <typename Scalar>
using LineMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Lines = LineMatrix<double>;

} // namespace mpdae
