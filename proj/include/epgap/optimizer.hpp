// ADAM descent over the unitary parametrization, seeded multi-shot batches,
// and the q-sweep analyses over sets of optimized states.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "epgap/objective.hpp"

namespace epgap {

struct AdamConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int steps = 5000;

  void validate() const;
};

struct AdamMoments {
  std::vector<double> first;
  std::vector<double> second;

  AdamMoments() = default;
  explicit AdamMoments(std::size_t n) : first(n, 0.0), second(n, 0.0) {}
};

/// One bias-corrected ADAM update in place. t is the 1-based step index.
/// Throws NumericError on a non-finite gradient, leaving params untouched.
void adam_step(std::span<double> params, std::span<const double> grad, AdamMoments& moments,
               int t, const AdamConfig& config);

/// Seeded generator for shot initialization and random states.
///
/// Engine: std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms take the top 53 bits; normals come from the Box-Muller
/// transform written out here (std::normal_distribution is
/// implementation-defined). Shot i of a batch with master seed m uses seed
/// m XOR i.
class ShotRng {
 public:
  explicit ShotRng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t derive(std::uint64_t master_seed, std::uint64_t shot_index) {
    return master_seed ^ shot_index;
  }

  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();
  /// Complex normal with E|z|^2 = variance.
  Complex complex_normal(double variance);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Seeds master XOR 0, ..., master XOR (count - 1).
std::vector<std::uint64_t> derive_seeds(std::uint64_t master_seed, std::size_t count);

/// Haar-random pure state (normalized complex Gaussian vector).
QuditState random_state(const Dims& dims, ShotRng& rng);

/// Outcome of one seeded optimization run.
struct ShotRecord {
  std::uint64_t seed = 0;
  std::string family = "unitary";  // "unitary" or "mera"
  Dims dims;
  PartitionSpec partition;
  double q_trained = 1.0;
  bool penalty = false;
  double penalty_weight = 1.0;
  LogBase log_base = LogBase::natural;

  /// Lowest objective over the trajectory (equal to the gap when the penalty
  /// is off) and the terms at that point.
  double best_gap = 0.0;
  double gap_at_best = 0.0;
  double max_tmi_at_best = 0.0;
  /// Parameters at the best point: d(d+1)/2 entries for the unitary family,
  /// concatenated per-gate entries for MERA.
  int param_dim = 0;
  std::vector<Complex> best_params;
  int steps_run = 0;
  std::vector<double> objective_trace;

  bool failed = false;
  std::string failure;
};

/// Objective value plus gradient with respect to a flat real parameter vector.
struct Evaluation {
  double value = 0.0;
  std::vector<double> grad;
};

using Evaluator = std::function<Evaluation(std::span<const double>)>;

struct DescentResult {
  double best_value = 0.0;
  std::vector<double> best_params;
  std::vector<double> trace;
  int steps_run = 0;
  bool failed = false;
  std::string failure;
};

/// Generic ADAM loop with best-over-trajectory tracking. The trace holds the
/// objective at every iterate including the final one.
DescentResult run_descent(std::vector<double> initial, const Evaluator& evaluate,
                          const AdamConfig& adam);

/// Initial M: i.i.d. complex Gaussian entries with E|m|^2 = 1/d.
UTParams initial_params(int d, std::uint64_t seed);

ShotRecord run_shot(const ObjectiveConfig& config, const AdamConfig& adam, std::uint64_t seed);

/// Runs fn(0..count-1) on up to `parallelism` threads.
void parallel_for(std::size_t count, int parallelism, const std::function<void(std::size_t)>& fn);

/// Records come back in seed order regardless of parallelism.
std::vector<ShotRecord> run_batch(const ObjectiveConfig& config, const AdamConfig& adam,
                                  std::span<const std::uint64_t> seeds, int parallelism = 1);

/// Rebuilds the best state of a unitary-family shot.
QuditState shot_state(const ShotRecord& record);

struct LabeledState {
  std::string id;
  QuditState state;
};

/// Caches S(AA') and the reflected spectrum of one state so gaps at many q
/// cost one power sum each.
class GapProfile {
 public:
  GapProfile(const QuditState& psi, const PartitionSpec& partition,
             const EntropyConfig& config = {});

  double at(double q) const;
  double s_aap() const { return s_aap_; }

 private:
  EntropyConfig config_;
  double s_aap_;
  Spectrum reflected_;
};

struct SweepRecord {
  double q = 0.0;
  double min_gap = 0.0;
  std::string state_id;
};

/// For each q, the smallest gap over the state set and which state gave it.
std::vector<SweepRecord> sweep_min_gap(std::span<const LabeledState> states,
                                       std::span<const double> q_grid,
                                       const PartitionSpec& partition,
                                       const EntropyConfig& config = {});

struct CurvePoint {
  double q = 0.0;
  double gap = 0.0;
};

std::vector<CurvePoint> state_gap_curve(const QuditState& state, std::span<const double> q_grid,
                                        const PartitionSpec& partition,
                                        const EntropyConfig& config = {});

}  // namespace epgap
