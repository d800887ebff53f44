#include "epgap/reflect.hpp"

#include <cmath>

#include "epgap/spectral.hpp"

namespace epgap {

CMatrix sqrt_density(const CMatrix& rho, double clip_eps) {
  const EigenSystem eig = hermitian_eigensystem(rho);
  if (eig.values.size() > 0 && eig.values[0] < -kPsdTolerance)
    throw NumericError("matrix is not positive semidefinite (eigenvalue " +
                       std::to_string(eig.values[0]) + ")");
  return apply_spectral(eig, [clip_eps](double l) { return l < clip_eps ? 0.0 : std::sqrt(l); });
}

CMatrix sqrt_density(const DensityMatrix& rho, double clip_eps) {
  return sqrt_density(rho.matrix(), clip_eps);
}

CMatrix realign_ab(const CMatrix& x, int dim_a, int dim_b) {
  const Eigen::Index n = static_cast<Eigen::Index>(dim_a) * dim_b;
  if (x.rows() != n || x.cols() != n)
    throw std::invalid_argument("matrix does not act on a dA*dB system");
  CMatrix y(dim_a * dim_a, dim_b * dim_b);
  for (int a = 0; a < dim_a; ++a)
    for (int b = 0; b < dim_b; ++b)
      for (int ap = 0; ap < dim_a; ++ap)
        for (int bp = 0; bp < dim_b; ++bp)
          y(a * dim_a + ap, b * dim_b + bp) = x(a * dim_b + b, ap * dim_b + bp);
  return y;
}

CMatrix unrealign_ab(const CMatrix& y, int dim_a, int dim_b) {
  CMatrix x(dim_a * dim_b, dim_a * dim_b);
  for (int a = 0; a < dim_a; ++a)
    for (int b = 0; b < dim_b; ++b)
      for (int ap = 0; ap < dim_a; ++ap)
        for (int bp = 0; bp < dim_b; ++bp)
          x(a * dim_b + b, ap * dim_b + bp) = y(a * dim_a + ap, b * dim_b + bp);
  return x;
}

namespace {

void check_split(std::size_t total, int dim_a, int dim_b) {
  if (dim_a < 1 || dim_b < 1 || static_cast<std::size_t>(dim_a) * dim_b != total)
    throw std::invalid_argument("dims_AB [" + std::to_string(dim_a) + "," +
                                std::to_string(dim_b) + "] do not match a " +
                                std::to_string(total) + "-dimensional rho_AB");
}

}  // namespace

CanonicalPurification canonical_purification(const DensityMatrix& rho_ab, int dim_a,
                                             int dim_b, double clip_eps) {
  check_split(rho_ab.dim(), dim_a, dim_b);
  const CMatrix root = sqrt_density(rho_ab, clip_eps);
  const Eigen::Index n = root.rows();
  CVector amps(n * n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) amps[r * n + c] = root(r, c);
  // sum |X_rc|^2 = Tr rho = 1 up to clipping.
  return {QuditState::normalized(Dims({dim_a, dim_b, dim_a, dim_b}), std::move(amps)),
          rho_ab.dims()};
}

Spectrum reflected_spectrum(const CMatrix& rho_ab, int dim_a, int dim_b, double clip_eps) {
  check_split(static_cast<std::size_t>(rho_ab.rows()), dim_a, dim_b);
  const CMatrix y = realign_ab(sqrt_density(rho_ab, clip_eps), dim_a, dim_b);
  return hermitian_spectrum(y * y.adjoint(), clip_eps);
}

double reflected_entropy(const DensityMatrix& rho_ab, int dim_a, int dim_b, double q,
                         const EntropyConfig& config) {
  return renyi(reflected_spectrum(rho_ab.matrix(), dim_a, dim_b, config.clip_eps), q, config);
}

}  // namespace epgap
