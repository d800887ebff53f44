// Open-boundary binary MERA circuits on 8 or 16 qubits.
//
// The circuit is built top-down on the final qubit line. A top unitary acts
// on |00> at positions 0 and N/2. Each further layer halves the spacing s:
// every occupied position p gets an isometry, a two-qubit unitary on
// (p, p + s/2) whose second input is a fresh |0>, and then disentanglers act
// on neighboring outputs of adjacent isometries (open boundary). 8 qubits use
// 11 gates, 16 qubits use 26.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "epgap/objective.hpp"
#include "epgap/optimizer.hpp"

namespace epgap {

enum class MeraGateKind { top, isometry, disentangler };

struct MeraGate {
  MeraGateKind kind;
  int first;   // more significant qubit of the gate's 4-dim local index
  int second;
  int layer;
};

struct MeraLayout {
  int num_qubits = 0;
  int layers = 0;
  std::vector<MeraGate> gates;

  /// 8 qubits (3 layers) or 16 qubits (4 layers).
  static MeraLayout binary(int num_qubits);

  /// Complex parameter entries: 10 per gate (upper triangle of a 4x4 M).
  std::size_t param_count() const { return gates.size() * UTParams::entry_count(4); }
};

struct MeraParams {
  std::vector<UTParams> gates;

  static MeraParams zeros(const MeraLayout& layout);
  static MeraParams from_real(const MeraLayout& layout, std::span<const double> values);
  static MeraParams from_entries(const MeraLayout& layout, std::span<const Complex> entries);
  std::vector<double> to_real() const;
  std::vector<Complex> entries() const;
};

/// Applies a 4x4 gate to qubits (first, second) of an n-qubit register.
void apply_two_qubit_gate(CVector& amplitudes, int num_qubits, int first, int second,
                          const CMatrix& gate);

QuditState mera_state(const MeraLayout& layout, const MeraParams& params);

/// Four contiguous equal blocks A, B, A', B' of the qubit line.
PartitionSpec mera_partition(int num_qubits);

/// Objective over the MERA qubit line with the contiguous partition.
ObjectiveConfig mera_objective(const MeraLayout& layout, double q, bool penalty = false,
                               double penalty_weight = 1.0, const EntropyConfig& entropy = {});

enum class MeraGradient { analytic, finite_difference };

/// Objective and gradient with respect to the interleaved real gate parameters.
Evaluation mera_evaluate(const MeraLayout& layout, std::span<const double> params,
                         const ObjectiveConfig& config, MeraGradient mode,
                         double fd_step = 1e-5);

ShotRecord run_mera_shot(const MeraLayout& layout, const ObjectiveConfig& config,
                         const AdamConfig& adam, std::uint64_t seed,
                         MeraGradient mode = MeraGradient::analytic);

std::vector<ShotRecord> run_mera_search(const MeraLayout& layout, const ObjectiveConfig& config,
                                        const AdamConfig& adam,
                                        std::span<const std::uint64_t> seeds,
                                        int parallelism = 1,
                                        MeraGradient mode = MeraGradient::analytic);

/// Rebuilds the best state of a MERA-family shot.
QuditState mera_shot_state(const ShotRecord& record);

}  // namespace epgap
