// Unitary parametrization U = exp(M - M^dagger) over an upper-triangular
// complex M, the gap objective S(AA') - S_R^(q)(A:B)/2, its penalized variant,
// and analytic gradients with respect to the entries of M.

#pragma once

#include <span>
#include <vector>

#include "epgap/core_state.hpp"
#include "epgap/entropy.hpp"
#include "epgap/spectral.hpp"

namespace epgap {

/// Row-major upper triangle of a d x d complex matrix, diagonal included.
struct UTParams {
  int d = 0;
  CVector entries;

  static std::size_t entry_count(int d) { return static_cast<std::size_t>(d) * (d + 1) / 2; }
  static UTParams zeros(int d);

  /// Interleaved (re, im) pairs, length d(d+1).
  static UTParams from_real(int d, std::span<const double> values);
  std::vector<double> to_real() const;

  /// The full (upper-triangular) matrix M.
  CMatrix matrix() const;

  void validate() const;
};

/// U = exp(M - M^dagger) together with the eigensystem of the Hermitian
/// generator i(M - M^dagger), kept for gradient pullbacks.
struct UnitaryFactor {
  EigenSystem generator;
  CMatrix unitary;
};

UnitaryFactor factor_unitary(const UTParams& params);
CMatrix unitary_from_params(const UTParams& params);

/// Given a matrix X such that dL = 2 Re tr(X dU), returns dL with respect to
/// the interleaved (re, im) parameters of M.
std::vector<double> unitary_param_gradient(const UnitaryFactor& factor, const CMatrix& x);

struct ObjectiveConfig {
  Dims dims;
  PartitionSpec partition = PartitionSpec::four_sites();
  double q = 1.0;
  bool penalty_enabled = false;
  double penalty_weight = 1.0;
  EntropyConfig entropy;

  void validate() const;
  int total_dim() const { return static_cast<int>(dims.total()); }
};

QuditState state_from_params(const UTParams& params, const ObjectiveConfig& config);

/// S(AA') - S_R^(q)(A:B)/2 where S(AA') is always the von Neumann entropy.
double gap(const QuditState& psi, const PartitionSpec& partition, double q,
           const EntropyConfig& config = {});

/// gap + weight * max(Max(I3), 0).
double penalized_gap(const QuditState& psi, const PartitionSpec& partition, double q,
                     double penalty_weight = 1.0, const EntropyConfig& config = {});

struct ObjectiveTerms {
  double objective = 0.0;
  double gap = 0.0;
  double s_aap = 0.0;
  double s_r = 0.0;
  double max_tmi = 0.0;  // only computed when the penalty is enabled
};

/// Objective value together with the Wirtinger gradient g with
/// dObjective = 2 Re <g, d psi>.
struct StateGradient {
  ObjectiveTerms terms;
  CVector grad;
};

ObjectiveTerms evaluate_objective(const QuditState& psi, const ObjectiveConfig& config);
StateGradient objective_state_gradient(const QuditState& psi, const ObjectiveConfig& config);

struct ObjectiveGradient {
  ObjectiveTerms terms;
  std::vector<double> grad;  // interleaved (re, im), length d(d+1)
};

ObjectiveGradient objective_value_and_gradient(const UTParams& params,
                                               const ObjectiveConfig& config);
std::vector<double> objective_gradient(const UTParams& params, const ObjectiveConfig& config);
double objective_value(const UTParams& params, const ObjectiveConfig& config);

}  // namespace epgap
