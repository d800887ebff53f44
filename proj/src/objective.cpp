#include "epgap/objective.hpp"

#include <algorithm>
#include <cmath>

#include "epgap/reflect.hpp"

namespace epgap {

UTParams UTParams::zeros(int d) {
  if (d < 1) throw std::invalid_argument("UTParams dimension must be positive");
  return {d, CVector::Zero(static_cast<Eigen::Index>(entry_count(d)))};
}

UTParams UTParams::from_real(int d, std::span<const double> values) {
  UTParams p = zeros(d);
  if (values.size() != 2 * entry_count(d))
    throw std::invalid_argument("expected " + std::to_string(2 * entry_count(d)) +
                                " real parameters, got " + std::to_string(values.size()));
  for (Eigen::Index k = 0; k < p.entries.size(); ++k)
    p.entries[k] = Complex(values[2 * k], values[2 * k + 1]);
  return p;
}

std::vector<double> UTParams::to_real() const {
  std::vector<double> out;
  out.reserve(2 * entries.size());
  for (const Complex& z : entries) {
    out.push_back(z.real());
    out.push_back(z.imag());
  }
  return out;
}

CMatrix UTParams::matrix() const {
  validate();
  CMatrix m = CMatrix::Zero(d, d);
  Eigen::Index k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) m(i, j) = entries[k++];
  return m;
}

void UTParams::validate() const {
  if (d < 1 || static_cast<std::size_t>(entries.size()) != entry_count(d))
    throw std::invalid_argument("UTParams length does not match d = " + std::to_string(d));
  if (!entries.allFinite()) throw NumericError("UTParams contain non-finite entries");
}

UnitaryFactor factor_unitary(const UTParams& params) {
  const CMatrix m = params.matrix();
  const CMatrix generator = Complex(0.0, 1.0) * (m - m.adjoint());
  UnitaryFactor out{hermitian_eigensystem(generator), {}};
  const auto& w = out.generator.values;
  CVector phases(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) phases[i] = std::polar(1.0, -w[i]);
  out.unitary = out.generator.vectors * phases.asDiagonal() * out.generator.vectors.adjoint();
  return out;
}

CMatrix unitary_from_params(const UTParams& params) { return factor_unitary(params).unitary; }

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

std::vector<double> unitary_param_gradient(const UnitaryFactor& factor, const CMatrix& x) {
  const auto& w = factor.generator.values;
  const auto& v = factor.generator.vectors;
  const Eigen::Index d = w.size();

  // Divided differences of exp at the eigenvalues -i w of M - M^dagger:
  // (e^a - e^b) / (a - b) = e^{(a+b)/2} sinc((w_a - w_b)/2).
  CMatrix divided(d, d);
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double half_gap = 0.5 * (w[j] - w[k]);
      divided(j, k) = std::polar(std::abs(half_gap) < 0.5 * kDegeneracyTolerance
                                     ? 1.0
                                     : sinc(half_gap),
                                 -0.5 * (w[j] + w[k]));
    }

  const CMatrix rotated = v.adjoint() * x * v;
  const CMatrix z = v * rotated.cwiseProduct(divided.transpose()) * v.adjoint();
  const CMatrix wmat = (z - z.adjoint()).transpose();

  std::vector<double> grad;
  grad.reserve(d * (d + 1));
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) {
      grad.push_back(2.0 * wmat(i, j).real());
      grad.push_back(-2.0 * wmat(i, j).imag());
    }
  return grad;
}

void ObjectiveConfig::validate() const {
  partition.validate(dims.num_sites());
  if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument("q must be positive");
  if (!(penalty_weight >= 0.0)) throw std::invalid_argument("penalty weight must be >= 0");
  entropy.validate();
}

QuditState state_from_params(const UTParams& params, const ObjectiveConfig& config) {
  if (static_cast<std::size_t>(params.d) != config.dims.total())
    throw std::invalid_argument("parameter dimension " + std::to_string(params.d) +
                                " does not match dims " + config.dims.to_string());
  const QuditState chi = equal_superposition(config.dims);
  return QuditState::normalized(config.dims, unitary_from_params(params) * chi.amplitudes());
}

namespace {

std::vector<int> sorted_sites(std::vector<int> s) {
  std::sort(s.begin(), s.end());
  return s;
}

// Accumulates the gradient of the entropy of the marginal on `sites` into grad.
double add_region_entropy(const QuditState& psi, const std::vector<int>& sites, double q,
                          const EntropyConfig& config, double coef, CVector* grad) {
  const auto rest = complement_sites(psi.dims(), sites);
  const CMatrix m = reshape_state(psi, sites, rest);
  const CMatrix rho = m * m.adjoint();
  if (grad == nullptr) return renyi(hermitian_spectrum((rho + rho.adjoint()) * 0.5, config.clip_eps), q, config);
  const auto ent = entropy_with_derivative(rho, q, config);
  *grad += coef * unreshape_state(ent.derivative * m, psi.dims(), sites, rest);
  return ent.value;
}

// Reflected entropy of rho_AB = Tr_{A'B'} |psi><psi| and its gradient.
double add_reflected_entropy(const QuditState& psi, const PartitionSpec& part, double q,
                             const EntropyConfig& config, double coef, CVector* grad) {
  const auto ab = join_sites({part.a, part.b});
  const auto apbp = join_sites({part.ap, part.bp});
  const int dim_a = static_cast<int>(psi.dims().total_of(part.a));
  const int dim_b = static_cast<int>(psi.dims().total_of(part.b));
  const CMatrix phi = reshape_state(psi, ab, apbp);
  const CMatrix rho = phi * phi.adjoint();
  if (grad == nullptr) return renyi(reflected_spectrum((rho + rho.adjoint()) * 0.5, dim_a, dim_b, config.clip_eps), q, config);

  const EigenSystem eig = hermitian_eigensystem(rho);
  const double eps = config.clip_eps;
  if (eig.values.size() > 0 && eig.values[0] < -kPsdTolerance)
    throw NumericError("rho_AB has a negative eigenvalue " + std::to_string(eig.values[0]));
  const auto root_fn = [eps](double l) { return l < eps ? 0.0 : std::sqrt(l); };
  const auto root_prime = [eps](double l) { return l < eps ? 0.0 : 0.5 / std::sqrt(l); };
  const CMatrix root = apply_spectral(eig, root_fn);
  const CMatrix y = realign_ab(root, dim_a, dim_b);
  const auto ent = entropy_with_derivative(y * y.adjoint(), q, config);

  // dS = 2 Re <D y, dy>, and the realignment is an entry permutation.
  const CMatrix upstream = 2.0 * unrealign_ab(ent.derivative * y, dim_a, dim_b);
  const CMatrix h = pullback_matrix_function(
      eig, divided_differences(eig.values, root_fn, root_prime), upstream);
  *grad += coef * unreshape_state(h * phi, psi.dims(), ab, apbp);
  return ent.value;
}

struct TmiTerm {
  double value;
  CVector grad;
};

TmiTerm tmi_with_gradient(const QuditState& psi, const std::vector<int>& x,
                          const std::vector<int>& y, const std::vector<int>& z,
                          const EntropyConfig& config, bool want_grad) {
  TmiTerm out{0.0, want_grad ? CVector::Zero(psi.dim()) : CVector()};
  CVector* g = want_grad ? &out.grad : nullptr;
  const std::pair<std::vector<int>, double> regions[] = {
      {x, 1.0},
      {y, 1.0},
      {z, 1.0},
      {join_sites({x, y}), -1.0},
      {join_sites({y, z}), -1.0},
      {join_sites({x, z}), -1.0},
      {join_sites({x, y, z}), 1.0},
  };
  for (const auto& [sites, sign] : regions)
    out.value += sign * add_region_entropy(psi, sorted_sites(sites), 1.0, config, sign, g);
  return out;
}

StateGradient evaluate(const QuditState& psi, const ObjectiveConfig& config, bool want_grad) {
  config.validate();
  if (!(psi.dims() == config.dims))
    throw std::invalid_argument("state dims " + psi.dims().to_string() +
                                " do not match objective dims " + config.dims.to_string());
  const auto& part = config.partition;
  StateGradient out;
  if (want_grad) out.grad = CVector::Zero(psi.dim());
  CVector* g = want_grad ? &out.grad : nullptr;

  auto& t = out.terms;
  t.s_aap = add_region_entropy(psi, sorted_sites(join_sites({part.a, part.ap})), 1.0,
                               config.entropy, 1.0, g);
  t.s_r = add_reflected_entropy(psi, part, config.q, config.entropy, -0.5, g);
  t.gap = t.s_aap - 0.5 * t.s_r;
  t.objective = t.gap;

  if (config.penalty_enabled) {
    const std::vector<int> triples[4][3] = {{part.a, part.b, part.ap},
                                            {part.a, part.b, part.bp},
                                            {part.a, part.ap, part.bp},
                                            {part.b, part.ap, part.bp}};
    std::vector<TmiTerm> terms;
    for (const auto& tr : triples)
      terms.push_back(tmi_with_gradient(psi, tr[0], tr[1], tr[2], config.entropy, want_grad));
    const auto best = std::max_element(terms.begin(), terms.end(),
                                       [](const auto& l, const auto& r) { return l.value < r.value; });
    t.max_tmi = best->value;
    if (t.max_tmi > 0.0) {
      t.objective += config.penalty_weight * t.max_tmi;
      if (want_grad) out.grad += config.penalty_weight * best->grad;
    }
  }
  if (!std::isfinite(t.objective) || (want_grad && !out.grad.allFinite()))
    throw NumericError("non-finite objective (S(AA')=" + std::to_string(t.s_aap) +
                       ", S_R=" + std::to_string(t.s_r) + ", max I3=" +
                       std::to_string(t.max_tmi) + ")");
  return out;
}

}  // namespace

double gap(const QuditState& psi, const PartitionSpec& partition, double q,
           const EntropyConfig& config) {
  ObjectiveConfig cfg{psi.dims(), partition, q, false, 1.0, config};
  return evaluate(psi, cfg, false).terms.gap;
}

double penalized_gap(const QuditState& psi, const PartitionSpec& partition, double q,
                     double penalty_weight, const EntropyConfig& config) {
  ObjectiveConfig cfg{psi.dims(), partition, q, true, penalty_weight, config};
  return evaluate(psi, cfg, false).terms.objective;
}

ObjectiveTerms evaluate_objective(const QuditState& psi, const ObjectiveConfig& config) {
  return evaluate(psi, config, false).terms;
}

StateGradient objective_state_gradient(const QuditState& psi, const ObjectiveConfig& config) {
  return evaluate(psi, config, true);
}

ObjectiveGradient objective_value_and_gradient(const UTParams& params,
                                               const ObjectiveConfig& config) {
  if (static_cast<std::size_t>(params.d) != config.dims.total())
    throw std::invalid_argument("parameter dimension does not match dims");
  const UnitaryFactor factor = factor_unitary(params);
  const CVector chi = equal_superposition(config.dims).amplitudes();
  const QuditState psi = QuditState::normalized(config.dims, factor.unitary * chi);
  const StateGradient sg = evaluate(psi, config, true);
  const CMatrix x = chi * sg.grad.adjoint();
  return {sg.terms, unitary_param_gradient(factor, x)};
}

std::vector<double> objective_gradient(const UTParams& params, const ObjectiveConfig& config) {
  return objective_value_and_gradient(params, config).grad;
}

double objective_value(const UTParams& params, const ObjectiveConfig& config) {
  return evaluate_objective(state_from_params(params, config), config).objective;
}

}  // namespace epgap
