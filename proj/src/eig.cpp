#include "otoc/eig.hpp"

#include <stdexcept>

#ifdef OTOC_HAVE_LAPACKE
#include <lapacke.h>
#endif

namespace otoc::la {

void hermitian_eig(Eigen::MatrixXcd& K, Eigen::VectorXd& evals, bool vectors) {
    const int n = static_cast<int>(K.rows());
    evals.resize(n);
#ifdef OTOC_HAVE_LAPACKE
    int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                              reinterpret_cast<lapack_complex_double*>(K.data()), n, evals.data());
    if (info != 0) throw std::runtime_error("zheevd failed: info=" + std::to_string(info));
#else
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        K, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("hermitian eigensolve failed");
    evals = es.eigenvalues();
    if (vectors) K = es.eigenvectors();
#endif
}

}  // namespace otoc::la
