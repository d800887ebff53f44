// Canonical purification |sqrt(rho_AB)> and the Renyi reflected entropy.

#pragma once

#include "epgap/core_state.hpp"
#include "epgap/entropy.hpp"

namespace epgap {

/// Tolerance on negative eigenvalues accepted by sqrt_density.
inline constexpr double kPsdTolerance = 1e-10;

/// Positive square root of a PSD Hermitian matrix. Eigenvalues below clip_eps
/// (including roundoff negatives down to -kPsdTolerance) map to zero.
CMatrix sqrt_density(const CMatrix& rho, double clip_eps = 1e-12);
CMatrix sqrt_density(const DensityMatrix& rho, double clip_eps = 1e-12);

/// Pure state over (A, B, A', B') with dims [dA, dB, dA, dB] whose amplitude
/// at row (a,b), column (a',b') is sqrt(rho)[(a,b),(a',b')]. The mirror sites
/// carry the column index, so a pure rho = |psi><psi| maps to |psi>|psi*>.
struct CanonicalPurification {
  QuditState state;
  Dims source_dims;
};

CanonicalPurification canonical_purification(const DensityMatrix& rho_ab, int dim_a,
                                             int dim_b, double clip_eps = 1e-12);

/// S_R^(q)(A:B): Renyi-q entropy of the (A, A') marginal of the canonical
/// purification of rho_AB.
double reflected_entropy(const DensityMatrix& rho_ab, int dim_a, int dim_b, double q,
                         const EntropyConfig& config = {});

/// Spectrum of the (A, A') marginal of the canonical purification. Reflected
/// entropies at many q reuse it.
Spectrum reflected_spectrum(const CMatrix& rho_ab, int dim_a, int dim_b,
                            double clip_eps = 1e-12);

/// Rearranges a (dA*dB) x (dA*dB) matrix X into the (dA*dA) x (dB*dB) matrix
/// Y[(a,a'),(b,b')] = X[(a,b),(a',b')].
CMatrix realign_ab(const CMatrix& x, int dim_a, int dim_b);

/// Inverse of realign_ab.
CMatrix unrealign_ab(const CMatrix& y, int dim_a, int dim_b);

}  // namespace epgap
