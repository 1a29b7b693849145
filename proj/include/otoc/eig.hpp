#pragma once

#include <Eigen/Dense>

namespace otoc::la {

// Eigenvalues (ascending) of a Hermitian matrix; if vectors is true, K is
// overwritten with the eigenvectors (column j pairs with evals[j]).
// Backed by LAPACKE zheevd when available, Eigen otherwise.
void hermitian_eig(Eigen::MatrixXcd& K, Eigen::VectorXd& evals, bool vectors);

}  // namespace otoc::la
