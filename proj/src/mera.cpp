#include "epgap/mera.hpp"

#include <cmath>

namespace epgap {

MeraLayout MeraLayout::binary(int num_qubits) {
  if (num_qubits != 8 && num_qubits != 16)
    throw std::invalid_argument("MERA layouts exist for 8 or 16 qubits, not " +
                                std::to_string(num_qubits));
  MeraLayout layout;
  layout.num_qubits = num_qubits;
  int spacing = num_qubits / 2;
  std::vector<int> occupied{0, spacing};
  layout.gates.push_back({MeraGateKind::top, 0, spacing, 0});
  int layer = 1;
  while (spacing > 1) {
    const int half = spacing / 2;
    std::vector<int> next;
    for (int p : occupied) {
      layout.gates.push_back({MeraGateKind::isometry, p, p + half, layer});
      next.push_back(p);
      next.push_back(p + half);
    }
    for (std::size_t k = 1; k + 1 < next.size(); k += 2)
      layout.gates.push_back({MeraGateKind::disentangler, next[k], next[k + 1], layer});
    occupied = std::move(next);
    spacing = half;
    ++layer;
  }
  layout.layers = layer;
  return layout;
}

MeraParams MeraParams::zeros(const MeraLayout& layout) {
  return {std::vector<UTParams>(layout.gates.size(), UTParams::zeros(4))};
}

MeraParams MeraParams::from_real(const MeraLayout& layout, std::span<const double> values) {
  const std::size_t per_gate = 2 * UTParams::entry_count(4);
  if (values.size() != per_gate * layout.gates.size())
    throw std::invalid_argument("MERA parameter count mismatch: expected " +
                                std::to_string(per_gate * layout.gates.size()) + ", got " +
                                std::to_string(values.size()));
  MeraParams out;
  for (std::size_t g = 0; g < layout.gates.size(); ++g)
    out.gates.push_back(UTParams::from_real(4, values.subspan(g * per_gate, per_gate)));
  return out;
}

MeraParams MeraParams::from_entries(const MeraLayout& layout, std::span<const Complex> entries) {
  std::vector<double> real;
  for (const Complex& z : entries) {
    real.push_back(z.real());
    real.push_back(z.imag());
  }
  return from_real(layout, real);
}

std::vector<double> MeraParams::to_real() const {
  std::vector<double> out;
  for (const auto& g : gates) {
    const auto r = g.to_real();
    out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<Complex> MeraParams::entries() const {
  std::vector<Complex> out;
  for (const auto& g : gates) out.insert(out.end(), g.entries.begin(), g.entries.end());
  return out;
}

void apply_two_qubit_gate(CVector& amplitudes, int num_qubits, int first, int second,
                          const CMatrix& gate) {
  const std::size_t bit_first = std::size_t{1} << (num_qubits - 1 - first);
  const std::size_t bit_second = std::size_t{1} << (num_qubits - 1 - second);
  const std::size_t n = static_cast<std::size_t>(amplitudes.size());
  for (std::size_t base = 0; base < n; ++base) {
    if (base & (bit_first | bit_second)) continue;
    const std::size_t idx[4] = {base, base | bit_second, base | bit_first,
                                base | bit_first | bit_second};
    Complex in[4];
    for (int k = 0; k < 4; ++k) in[k] = amplitudes[idx[k]];
    for (int r = 0; r < 4; ++r) {
      Complex acc = 0.0;
      for (int c = 0; c < 4; ++c) acc += gate(r, c) * in[c];
      amplitudes[idx[r]] = acc;
    }
  }
}

namespace {

void check_params(const MeraLayout& layout, const MeraParams& params) {
  if (params.gates.size() != layout.gates.size())
    throw std::invalid_argument("MERA has " + std::to_string(layout.gates.size()) +
                                " gates but " + std::to_string(params.gates.size()) +
                                " parameter blocks were given");
  for (const auto& g : params.gates)
    if (g.d != 4) throw std::invalid_argument("MERA gates are two-qubit (d = 4)");
}

CVector zero_register(int num_qubits) {
  CVector v = CVector::Zero(std::size_t{1} << num_qubits);
  v[0] = 1.0;
  return v;
}

// 4x4 block of sum_rest phi[ij, rest] * conj(lambda[kl, rest]).
CMatrix gate_cross_term(const CVector& phi, const CVector& lambda, int num_qubits, int first,
                        int second) {
  const std::size_t bit_first = std::size_t{1} << (num_qubits - 1 - first);
  const std::size_t bit_second = std::size_t{1} << (num_qubits - 1 - second);
  CMatrix x = CMatrix::Zero(4, 4);
  for (std::size_t base = 0; base < static_cast<std::size_t>(phi.size()); ++base) {
    if (base & (bit_first | bit_second)) continue;
    const std::size_t idx[4] = {base, base | bit_second, base | bit_first,
                                base | bit_first | bit_second};
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) x(i, k) += phi[idx[i]] * std::conj(lambda[idx[k]]);
  }
  return x;
}

}  // namespace

QuditState mera_state(const MeraLayout& layout, const MeraParams& params) {
  check_params(layout, params);
  CVector psi = zero_register(layout.num_qubits);
  for (std::size_t g = 0; g < layout.gates.size(); ++g) {
    const auto& gate = layout.gates[g];
    apply_two_qubit_gate(psi, layout.num_qubits, gate.first, gate.second,
                         unitary_from_params(params.gates[g]));
  }
  return QuditState::normalized(Dims(std::vector<int>(layout.num_qubits, 2)), std::move(psi));
}

PartitionSpec mera_partition(int num_qubits) {
  if (num_qubits % 4 != 0) throw std::invalid_argument("qubit count must split into 4 blocks");
  const int block = num_qubits / 4;
  PartitionSpec p;
  std::vector<int>* parts[] = {&p.a, &p.b, &p.ap, &p.bp};
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < block; ++i) parts[k]->push_back(k * block + i);
  return p;
}

ObjectiveConfig mera_objective(const MeraLayout& layout, double q, bool penalty,
                               double penalty_weight, const EntropyConfig& entropy) {
  return {Dims(std::vector<int>(layout.num_qubits, 2)), mera_partition(layout.num_qubits), q,
          penalty, penalty_weight, entropy};
}

Evaluation mera_evaluate(const MeraLayout& layout, std::span<const double> params,
                         const ObjectiveConfig& config, MeraGradient mode, double fd_step) {
  const MeraParams p = MeraParams::from_real(layout, params);
  if (mode == MeraGradient::finite_difference) {
    Evaluation out;
    out.value = evaluate_objective(mera_state(layout, p), config).objective;
    std::vector<double> x(params.begin(), params.end());
    out.grad.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + fd_step;
      const double up =
          evaluate_objective(mera_state(layout, MeraParams::from_real(layout, x)), config).objective;
      x[i] = saved - fd_step;
      const double down =
          evaluate_objective(mera_state(layout, MeraParams::from_real(layout, x)), config).objective;
      x[i] = saved;
      out.grad[i] = (up - down) / (2.0 * fd_step);
    }
    return out;
  }

  std::vector<UnitaryFactor> factors;
  factors.reserve(layout.gates.size());
  CVector psi = zero_register(layout.num_qubits);
  for (std::size_t g = 0; g < layout.gates.size(); ++g) {
    factors.push_back(factor_unitary(p.gates[g]));
    const auto& gate = layout.gates[g];
    apply_two_qubit_gate(psi, layout.num_qubits, gate.first, gate.second, factors.back().unitary);
  }
  const QuditState state = QuditState::normalized(config.dims, psi);
  const StateGradient sg = objective_state_gradient(state, config);

  // Walk the circuit backwards, undoing each gate on both the state and the
  // adjoint vector.
  const std::size_t per_gate = 2 * UTParams::entry_count(4);
  Evaluation out{sg.terms.objective, std::vector<double>(per_gate * layout.gates.size())};
  CVector phi = state.amplitudes();
  CVector lambda = sg.grad;
  for (std::size_t g = layout.gates.size(); g-- > 0;) {
    const auto& gate = layout.gates[g];
    const CMatrix inverse = factors[g].unitary.adjoint();
    apply_two_qubit_gate(phi, layout.num_qubits, gate.first, gate.second, inverse);
    const CMatrix x = gate_cross_term(phi, lambda, layout.num_qubits, gate.first, gate.second);
    const auto grad = unitary_param_gradient(factors[g], x);
    std::copy(grad.begin(), grad.end(), out.grad.begin() + g * per_gate);
    apply_two_qubit_gate(lambda, layout.num_qubits, gate.first, gate.second, inverse);
  }
  return out;
}

ShotRecord run_mera_shot(const MeraLayout& layout, const ObjectiveConfig& config,
                         const AdamConfig& adam, std::uint64_t seed, MeraGradient mode) {
  config.validate();
  if (config.dims.num_sites() != static_cast<std::size_t>(layout.num_qubits))
    throw std::invalid_argument("objective dims do not match the MERA layout");
  ShotRecord rec;
  rec.seed = seed;
  rec.family = "mera";
  rec.dims = config.dims;
  rec.partition = config.partition;
  rec.q_trained = config.q;
  rec.penalty = config.penalty_enabled;
  rec.penalty_weight = config.penalty_weight;
  rec.log_base = config.entropy.log_base;
  rec.param_dim = 4;

  ShotRng rng(seed);
  std::vector<double> init;
  init.reserve(2 * layout.param_count());
  for (std::size_t k = 0; k < layout.param_count(); ++k) {
    const Complex z = rng.complex_normal(1.0 / 4.0);
    init.push_back(z.real());
    init.push_back(z.imag());
  }
  const Evaluator evaluate = [&](std::span<const double> x) {
    return mera_evaluate(layout, x, config, mode);
  };
  const DescentResult res = run_descent(std::move(init), evaluate, adam);

  const MeraParams best = MeraParams::from_real(layout, res.best_params);
  rec.best_params = best.entries();
  rec.best_gap = res.best_value;
  rec.steps_run = res.steps_run;
  rec.objective_trace = res.trace;
  rec.failed = res.failed;
  rec.failure = res.failure;
  if (!res.trace.empty()) {
    const QuditState psi = mera_state(layout, best);
    rec.gap_at_best = gap(psi, config.partition, config.q, config.entropy);
    rec.max_tmi_at_best = max_tmi(psi, config.partition, config.entropy);
  }
  return rec;
}

std::vector<ShotRecord> run_mera_search(const MeraLayout& layout, const ObjectiveConfig& config,
                                        const AdamConfig& adam,
                                        std::span<const std::uint64_t> seeds, int parallelism,
                                        MeraGradient mode) {
  if (seeds.empty()) throw std::invalid_argument("a MERA search needs at least one seed");
  std::vector<ShotRecord> out(seeds.size());
  parallel_for(seeds.size(), parallelism,
               [&](std::size_t i) { out[i] = run_mera_shot(layout, config, adam, seeds[i], mode); });
  return out;
}

QuditState mera_shot_state(const ShotRecord& record) {
  if (record.family != "mera") throw std::invalid_argument("not a MERA shot");
  const MeraLayout layout = MeraLayout::binary(static_cast<int>(record.dims.num_sites()));
  return mera_state(layout, MeraParams::from_entries(layout, record.best_params));
}

}  // namespace epgap
