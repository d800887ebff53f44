#include "epgap/spectral.hpp"

#include <cmath>

namespace epgap {

EigenSystem hermitian_eigensystem(const CMatrix& matrix) {
  const CMatrix herm = (matrix + matrix.adjoint()) * 0.5;
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
  if (solver.info() != Eigen::Success)
    throw NumericError("Hermitian eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix apply_spectral(const EigenSystem& eig, const std::function<double(double)>& f) {
  Eigen::VectorXd fv(eig.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = f(eig.values[i]);
  return eig.vectors * fv.asDiagonal() * eig.vectors.adjoint();
}

Eigen::MatrixXd divided_differences(const Eigen::VectorXd& values,
                                    const std::function<double(double)>& f,
                                    const std::function<double(double)>& fprime) {
  const Eigen::Index n = values.size();
  Eigen::VectorXd fv(n);
  for (Eigen::Index i = 0; i < n; ++i) fv[i] = f(values[i]);
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double gap = values[i] - values[j];
      out(i, j) = std::abs(gap) < kDegeneracyTolerance ? fprime(0.5 * (values[i] + values[j]))
                                                       : (fv[i] - fv[j]) / gap;
    }
  }
  return out;
}

CMatrix pullback_matrix_function(const EigenSystem& eig, const Eigen::MatrixXd& divided,
                                 const CMatrix& upstream) {
  const CMatrix rotated = eig.vectors.adjoint() * upstream * eig.vectors;
  const CMatrix weighted = divided.cast<Complex>().cwiseProduct(rotated);
  const CMatrix back = eig.vectors * weighted * eig.vectors.adjoint();
  return (back + back.adjoint()) * 0.5;
}

}  // namespace epgap
