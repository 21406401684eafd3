// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

namespace autoscale {

/// Eigenvalues of a small symmetric matrix in ascending order, computed with
/// cyclic Jacobi rotations. Jacobi keeps small eigenvalues of positive
/// definite Gram matrices accurate relative to their own size, which is what
/// condition numbers need. Only the upper triangle is read.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& matrix);

}  // namespace autoscale
