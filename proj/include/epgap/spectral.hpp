// Hermitian eigensystems and the first-order spectral calculus used by the
// analytic gradients.

#pragma once

#include <functional>

#include "epgap/core_state.hpp"

namespace epgap {

struct EigenSystem {
  Eigen::VectorXd values;  // ascending
  CMatrix vectors;         // columns are eigenvectors
};

/// Eigendecomposition of the Hermitian part of `matrix`.
EigenSystem hermitian_eigensystem(const CMatrix& matrix);

/// V diag(f(lambda)) V^dagger.
CMatrix apply_spectral(const EigenSystem& eig,
                       const std::function<double(double)>& f);

/// Eigenvalue pairs closer than this use f'(lambda) in divided differences.
inline constexpr double kDegeneracyTolerance = 1e-10;

/// First divided differences (f(l_i) - f(l_j)) / (l_i - l_j), with f'(l_i) on
/// the diagonal and for near-degenerate pairs.
Eigen::MatrixXd divided_differences(const Eigen::VectorXd& values,
                                    const std::function<double(double)>& f,
                                    const std::function<double(double)>& fprime);

/// Gradient of the scalar Tr f(A) pulled back through a Hermitian matrix
/// function: given G with dL = Re tr(G^dagger dF) for F = f(A), returns the
/// Hermitian H with dL = tr(H dA) for every Hermitian dA (Daleckii-Krein).
CMatrix pullback_matrix_function(const EigenSystem& eig,
                                 const Eigen::MatrixXd& divided,
                                 const CMatrix& upstream);

}  // namespace epgap
