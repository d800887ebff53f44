// Spectra, von Neumann and Renyi entropies, mutual information and
// tripartite mutual information.

#pragma once

#include <span>
#include <vector>

#include "epgap/core_state.hpp"

namespace epgap {

enum class LogBase { natural, two };

struct EntropyConfig {
  LogBase log_base = LogBase::natural;
  /// Eigenvalues with magnitude below this are treated as exact zeros.
  double clip_eps = 1e-12;

  void validate() const;
  /// Multiplier converting nats to the configured base.
  double nats_to_base() const;
};

/// Eigenvalues of a Hermitian matrix, descending, with |lambda| < clip_eps set
/// to zero. No renormalization is applied.
struct Spectrum {
  std::vector<double> eigenvalues;
  double clip_eps = 1e-12;
};

/// Tolerance on |M - M^dagger| accepted by hermitian_spectrum.
inline constexpr double kHermitianTolerance = 1e-10;

Spectrum hermitian_spectrum(const CMatrix& matrix, double clip_eps = 1e-12);
Spectrum hermitian_spectrum(const DensityMatrix& rho, double clip_eps = 1e-12);

double von_neumann(const Spectrum& spectrum, const EntropyConfig& config = {});
double von_neumann(const DensityMatrix& rho, const EntropyConfig& config = {});

/// S_q = log(sum lambda^q) / (1 - q). q == 1 dispatches to von_neumann;
/// values near 1 use the Renyi formula as is.
double renyi(const Spectrum& spectrum, double q, const EntropyConfig& config = {});
double renyi(const DensityMatrix& rho, double q, const EntropyConfig& config = {});

/// Entropy of the marginal of a pure state on `sites`.
double region_entropy(const QuditState& psi, std::span<const int> sites, double q,
                      const EntropyConfig& config = {});

/// I2(X:Y) = S(X) + S(Y) - S(XY).
double mutual_info(const QuditState& psi, std::span<const int> x,
                   std::span<const int> y, const EntropyConfig& config = {});

/// I3(X:Y:Z) = I2(X:Y) + I2(Y:Z) - I2(Y:XZ).
double tmi(const QuditState& psi, std::span<const int> x, std::span<const int> y,
           std::span<const int> z, const EntropyConfig& config = {});

/// The four tripartite informations over (A,B,A'), (A,B,B'), (A,A',B'),
/// (B,A',B'), in that order.
std::vector<double> all_tmi(const QuditState& psi, const PartitionSpec& partition,
                            const EntropyConfig& config = {});

/// Maximum of all_tmi.
double max_tmi(const QuditState& psi, const PartitionSpec& partition,
               const EntropyConfig& config = {});

/// Entropy of a density matrix together with the Hermitian matrix D such that
/// dS = tr(D d rho). Eigenvalues below clip_eps contribute nothing to D.
struct EntropyDerivative {
  double value = 0.0;
  CMatrix derivative;
};

EntropyDerivative entropy_with_derivative(const CMatrix& rho, double q,
                                          const EntropyConfig& config = {});

}  // namespace epgap
