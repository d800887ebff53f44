#include "epgap/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "epgap/reflect.hpp"

namespace epgap {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("ADAM betas must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw std::invalid_argument("ADAM epsilon must be positive");
  if (steps < 1) throw std::invalid_argument("step count must be at least 1");
}

void adam_step(std::span<double> params, std::span<const double> grad, AdamMoments& moments,
               int t, const AdamConfig& config) {
  const std::size_t n = params.size();
  if (grad.size() != n || moments.first.size() != n || moments.second.size() != n)
    throw std::invalid_argument("ADAM shapes disagree");
  if (t < 1) throw std::invalid_argument("ADAM step index starts at 1");
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericError("non-finite gradient component");

  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = moments.first[i];
    auto& v = moments.second[i];
    m = config.beta1 * m + (1.0 - config.beta1) * grad[i];
    v = config.beta2 * v + (1.0 - config.beta2) * grad[i] * grad[i];
    params[i] -= config.learning_rate * (m / c1) / (std::sqrt(v / c2) + config.epsilon);
  }
}

double ShotRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double ShotRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Complex ShotRng::complex_normal(double variance) {
  const double s = std::sqrt(0.5 * variance);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t master_seed, std::size_t count) {
  std::vector<std::uint64_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(ShotRng::derive(master_seed, i));
  return out;
}

QuditState random_state(const Dims& dims, ShotRng& rng) {
  CVector v(dims.total());
  for (auto& z : v) z = rng.complex_normal(1.0);
  return QuditState::normalized(dims, std::move(v));
}

DescentResult run_descent(std::vector<double> params, const Evaluator& evaluate,
                          const AdamConfig& adam) {
  adam.validate();
  DescentResult out;
  out.best_value = std::numeric_limits<double>::infinity();
  out.best_params = params;
  out.trace.reserve(adam.steps + 1);
  AdamMoments moments(params.size());

  const auto record = [&](double value) {
    out.trace.push_back(value);
    if (value < out.best_value) {
      out.best_value = value;
      out.best_params = params;
    }
  };

  try {
    for (int t = 1; t <= adam.steps; ++t) {
      const Evaluation e = evaluate(params);
      if (!std::isfinite(e.value)) throw NumericError("non-finite objective at step " + std::to_string(t));
      record(e.value);
      adam_step(params, e.grad, moments, t, adam);
      out.steps_run = t;
    }
    const Evaluation last = evaluate(params);
    if (!std::isfinite(last.value)) throw NumericError("non-finite objective after final step");
    record(last.value);
  } catch (const NumericError& err) {
    out.failed = true;
    out.failure = err.what();
  }
  return out;
}

UTParams initial_params(int d, std::uint64_t seed) {
  ShotRng rng(seed);
  UTParams p = UTParams::zeros(d);
  for (auto& z : p.entries) z = rng.complex_normal(1.0 / d);
  return p;
}

namespace {

void fill_common(ShotRecord& rec, const ObjectiveConfig& config, std::uint64_t seed) {
  rec.seed = seed;
  rec.dims = config.dims;
  rec.partition = config.partition;
  rec.q_trained = config.q;
  rec.penalty = config.penalty_enabled;
  rec.penalty_weight = config.penalty_weight;
  rec.log_base = config.entropy.log_base;
}

}  // namespace

ShotRecord run_shot(const ObjectiveConfig& config, const AdamConfig& adam, std::uint64_t seed) {
  config.validate();
  const int d = config.total_dim();
  ShotRecord rec;
  fill_common(rec, config, seed);
  rec.family = "unitary";
  rec.param_dim = d;

  const Evaluator evaluate = [&](std::span<const double> x) {
    auto og = objective_value_and_gradient(UTParams::from_real(d, x), config);
    return Evaluation{og.terms.objective, std::move(og.grad)};
  };
  const DescentResult res = run_descent(initial_params(d, seed).to_real(), evaluate, adam);

  const UTParams best = UTParams::from_real(d, res.best_params);
  rec.best_params.assign(best.entries.begin(), best.entries.end());
  rec.best_gap = res.best_value;
  rec.steps_run = res.steps_run;
  rec.objective_trace = res.trace;
  rec.failed = res.failed;
  rec.failure = res.failure;
  if (!res.trace.empty()) {
    const QuditState psi = state_from_params(best, config);
    rec.gap_at_best = gap(psi, config.partition, config.q, config.entropy);
    rec.max_tmi_at_best = max_tmi(psi, config.partition, config.entropy);
  }
  return rec;
}

void parallel_for(std::size_t count, int parallelism,
                  const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(parallelism, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ShotRecord> run_batch(const ObjectiveConfig& config, const AdamConfig& adam,
                                  std::span<const std::uint64_t> seeds, int parallelism) {
  if (seeds.empty()) throw std::invalid_argument("a batch needs at least one seed");
  config.validate();
  adam.validate();
  std::vector<ShotRecord> out(seeds.size());
  parallel_for(seeds.size(), parallelism,
               [&](std::size_t i) { out[i] = run_shot(config, adam, seeds[i]); });
  return out;
}

QuditState shot_state(const ShotRecord& record) {
  if (record.family != "unitary")
    throw std::invalid_argument("shot_state only rebuilds unitary-family shots");
  UTParams p = UTParams::zeros(record.param_dim);
  if (record.best_params.size() != static_cast<std::size_t>(p.entries.size()))
    throw std::invalid_argument("shot parameter count does not match its dimension");
  for (std::size_t k = 0; k < record.best_params.size(); ++k) p.entries[k] = record.best_params[k];
  ObjectiveConfig cfg;
  cfg.dims = record.dims;
  cfg.partition = record.partition;
  return state_from_params(p, cfg);
}

GapProfile::GapProfile(const QuditState& psi, const PartitionSpec& partition,
                       const EntropyConfig& config)
    : config_(config) {
  partition.validate(psi.dims().num_sites());
  auto aap = join_sites({partition.a, partition.ap});
  std::sort(aap.begin(), aap.end());
  s_aap_ = region_entropy(psi, aap, 1.0, config);
  const auto ab = join_sites({partition.a, partition.b});
  const auto rest = join_sites({partition.ap, partition.bp});
  const CMatrix phi = reshape_state(psi, ab, rest);
  const CMatrix rho = phi * phi.adjoint();
  reflected_ = reflected_spectrum((rho + rho.adjoint()) * 0.5,
                                  static_cast<int>(psi.dims().total_of(partition.a)),
                                  static_cast<int>(psi.dims().total_of(partition.b)),
                                  config.clip_eps);
}

double GapProfile::at(double q) const { return s_aap_ - 0.5 * renyi(reflected_, q, config_); }

std::vector<SweepRecord> sweep_min_gap(std::span<const LabeledState> states,
                                       std::span<const double> q_grid,
                                       const PartitionSpec& partition,
                                       const EntropyConfig& config) {
  if (states.empty() || q_grid.empty())
    throw std::invalid_argument("sweep needs a non-empty state set and q grid");
  std::vector<GapProfile> profiles;
  profiles.reserve(states.size());
  for (const auto& s : states) profiles.emplace_back(s.state, partition, config);

  std::vector<SweepRecord> out;
  out.reserve(q_grid.size());
  for (double q : q_grid) {
    SweepRecord rec{q, std::numeric_limits<double>::infinity(), {}};
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      const double g = profiles[i].at(q);
      if (g < rec.min_gap) {
        rec.min_gap = g;
        rec.state_id = states[i].id;
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<CurvePoint> state_gap_curve(const QuditState& state, std::span<const double> q_grid,
                                        const PartitionSpec& partition,
                                        const EntropyConfig& config) {
  const GapProfile profile(state, partition, config);
  std::vector<CurvePoint> out;
  out.reserve(q_grid.size());
  for (double q : q_grid) out.push_back({q, profile.at(q)});
  return out;
}

}  // namespace epgap
