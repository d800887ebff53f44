// Generators and brute-force oracles shared by the unit tests. The oracles
// index amplitudes digit by digit and never call the library's reshape or
// trace helpers.

#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>
#include <vector>

#include "epgap/core_state.hpp"
#include "epgap/optimizer.hpp"

namespace epgap::testing {

inline CVector gaussian_vector(std::size_t n, ShotRng& rng) {
  CVector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.complex_normal(1.0);
  return v;
}

inline QuditState random_pure(const Dims& dims, ShotRng& rng) {
  return QuditState::normalized(dims, gaussian_vector(dims.total(), rng));
}

inline CMatrix random_unitary(int d, ShotRng& rng) {
  CMatrix g(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) g(r, c) = rng.complex_normal(1.0);
  Eigen::HouseholderQR<CMatrix> qr(g);
  return qr.householderQ();
}

/// Random probability vector of length n; min(zeros, n - 1) trailing entries
/// are exactly 0.
inline Eigen::VectorXd random_probabilities(int n, ShotRng& rng, int zeros = 0) {
  zeros = std::min(zeros, n - 1);
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = i < n - zeros ? -std::log(1.0 - rng.uniform()) : 0.0;
  return p / p.sum();
}

/// V diag(p) V^dagger, made exactly Hermitian.
inline CMatrix density_with_spectrum(const Eigen::VectorXd& p, const CMatrix& v) {
  CMatrix rho = v * p.cast<Complex>().asDiagonal() * v.adjoint();
  return (rho + rho.adjoint()) * 0.5;
}

inline CMatrix random_density(int d, ShotRng& rng, int zeros = 0) {
  return density_with_spectrum(random_probabilities(d, rng, zeros), random_unitary(d, rng));
}

inline std::vector<int> digits_of(std::size_t index, std::span<const int> dims) {
  std::vector<int> out(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    out[k] = static_cast<int>(index % dims[k]);
    index /= dims[k];
  }
  return out;
}

inline std::size_t index_of(std::span<const int> digits, std::span<const int> dims) {
  std::size_t idx = 0;
  for (std::size_t k = 0; k < dims.size(); ++k) idx = idx * dims[k] + digits[k];
  return idx;
}

/// Brute-force reduced density of |psi><psi| on `keep` (in the given order).
inline CMatrix brute_reduced(const CVector& psi, std::span<const int> dims,
                             std::span<const int> keep) {
  std::vector<int> kept_dims;
  for (int s : keep) kept_dims.push_back(dims[s]);
  std::size_t dk = 1;
  for (int d : kept_dims) dk *= d;
  CMatrix rho = CMatrix::Zero(dk, dk);
  const std::size_t n = static_cast<std::size_t>(psi.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto di = digits_of(i, dims);
    for (std::size_t j = 0; j < n; ++j) {
      const auto dj = digits_of(j, dims);
      bool same_rest = true;
      for (std::size_t s = 0; s < dims.size() && same_rest; ++s) {
        const bool kept = std::find(keep.begin(), keep.end(), static_cast<int>(s)) != keep.end();
        if (!kept && di[s] != dj[s]) same_rest = false;
      }
      if (!same_rest) continue;
      std::vector<int> ki, kj;
      for (int s : keep) {
        ki.push_back(di[s]);
        kj.push_back(dj[s]);
      }
      rho(index_of(ki, kept_dims), index_of(kj, kept_dims)) += psi[i] * std::conj(psi[j]);
    }
  }
  return rho;
}

/// -sum p log p (natural log) from Eigen's own solver.
inline double brute_entropy(const CMatrix& rho) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double p : es.eigenvalues())
    if (p > 1e-14) s -= p * std::log(p);
  return s;
}

inline double brute_renyi(const CMatrix& rho, double q) {
  if (q == 1.0) return brute_entropy(rho);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (double p : es.eigenvalues())
    if (p > 1e-14) sum += std::pow(p, q);
  return std::log(sum) / (1.0 - q);
}

/// Reflected entropy by direct construction: sqrt via Eigen, purification
/// vector built entry by entry over sites (A, B, A', B'), then a brute trace.
/// Eigenvalues below 1e-12 are dropped, as in the library.
inline double brute_reflected(const CMatrix& rho_ab, int da, int db, double q) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_ab);
  Eigen::VectorXd root = es.eigenvalues().unaryExpr(
      [](double p) { return p > 1e-12 ? std::sqrt(p) : 0.0; });
  const CMatrix x = es.eigenvectors() * root.cast<Complex>().asDiagonal() *
                    es.eigenvectors().adjoint();
  const std::vector<int> dims{da, db, da, db};
  CVector psi(static_cast<Eigen::Index>(da) * db * da * db);
  for (std::size_t i = 0; i < static_cast<std::size_t>(psi.size()); ++i) {
    const auto d = digits_of(i, dims);
    psi[i] = x(d[0] * db + d[1], d[2] * db + d[3]);
  }
  const std::vector<int> keep{0, 2};
  return brute_renyi(brute_reduced(psi, dims, keep), q);
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace epgap::testing
