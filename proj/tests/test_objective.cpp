#include "doctest.h"
#include "epgap/io.hpp"
#include "epgap/objective.hpp"
#include "epgap/reflect.hpp"
#include "test_support.hpp"

using namespace epgap;
using namespace epgap::testing;

namespace {

// Scaling and squaring with a truncated Taylor series.
CMatrix taylor_exp(const CMatrix& a) {
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.25) {
    norm /= 2.0;
    ++squarings;
  }
  const CMatrix scaled = a / std::pow(2.0, squarings);
  CMatrix term = CMatrix::Identity(a.rows(), a.cols());
  CMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

UTParams random_params(int d, ShotRng& rng, double variance) {
  UTParams p = UTParams::zeros(d);
  for (Eigen::Index k = 0; k < p.entries.size(); ++k) p.entries[k] = rng.complex_normal(variance);
  return p;
}

ObjectiveConfig config_for(std::vector<int> dims, double q, bool penalty = false) {
  ObjectiveConfig cfg;
  cfg.dims = Dims(std::move(dims));
  cfg.q = q;
  cfg.penalty_enabled = penalty;
  return cfg;
}

QuditState ghz4() {
  CVector v = CVector::Zero(16);
  v[0] = v[15] = 1.0 / std::sqrt(2.0);
  return QuditState(Dims({2, 2, 2, 2}), v);
}

// Bell pair on (A,B), |0>|0> on (A',B').
QuditState bell_ab() {
  CVector v = CVector::Zero(16);
  v[0] = v[12] = 1.0 / std::sqrt(2.0);
  return QuditState(Dims({2, 2, 2, 2}), v);
}

QuditState two_bell_pairs() {
  CVector v = CVector::Zero(16);
  for (int a : {0, 1})
    for (int ap : {0, 1}) v[a * 8 + a * 4 + ap * 2 + ap] = 0.5;
  return QuditState(Dims({2, 2, 2, 2}), v);
}

StateFile reference(int which) {
  return read_state_file(std::string(EPGAP_FIXTURE_DIR) + "/reference_state" +
                         std::to_string(which) + ".json");
}

bool grad_close(double analytic, double fd) {
  return std::abs(analytic - fd) <= 1e-8 || std::abs(analytic - fd) <= 1e-5 * std::abs(fd);
}

}  // namespace

TEST_CASE("UTParams layout and validation") {
  CHECK(UTParams::entry_count(36) == 666);
  const std::vector<double> real{1, 2, 3, 4, 5, 6};
  const auto p = UTParams::from_real(2, real);
  CHECK(p.entries[1] == Complex(3, 4));
  CHECK(p.to_real() == real);
  const CMatrix m = p.matrix();
  CHECK(m(0, 1) == Complex(3, 4));
  CHECK(m(1, 0) == Complex(0, 0));
  CHECK(m(1, 1) == Complex(5, 6));
  CHECK_THROWS_AS(UTParams::from_real(2, std::vector<double>{1, 2}), std::invalid_argument);
  UTParams bad = UTParams::zeros(3);
  bad.entries[2] = Complex(std::nan(""), 0.0);
  CHECK_THROWS(bad.validate());
}

TEST_CASE("unitary_from_params examples") {
  CHECK(max_abs(unitary_from_params(UTParams::zeros(5)) - CMatrix::Identity(5, 5)) < 1e-15);

  for (double theta : {0.3, -1.1, 2.5}) {
    UTParams p = UTParams::zeros(2);
    p.entries[1] = theta;
    CMatrix rot(2, 2);
    rot << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    CHECK(max_abs(unitary_from_params(p) - rot) < 1e-14);
  }
}

TEST_CASE("property: unitary_from_params is exp(M - M^dagger) and unitary") {
  ShotRng rng(36);
  for (int trial = 0; trial < 12; ++trial) {
    const int d = trial < 4 ? 36 : 2 + static_cast<int>(rng.uniform() * 20);
    const double scale = trial % 3 == 0 ? 4.0 : 1.0 / d;
    const UTParams p = random_params(d, rng, scale);
    const CMatrix u = unitary_from_params(p);
    CHECK(max_abs(u * u.adjoint() - CMatrix::Identity(d, d)) <= 1e-10);
    const CMatrix m = p.matrix();
    CHECK(max_abs(u - taylor_exp(m - m.adjoint())) < 1e-10);
  }
}

TEST_CASE("state_from_params") {
  const auto cfg = config_for({3, 3, 2, 2}, 1.0);
  const auto flat = state_from_params(UTParams::zeros(36), cfg);
  CHECK((flat.amplitudes() - equal_superposition(cfg.dims).amplitudes()).cwiseAbs().maxCoeff() <
        1e-15);

  ShotRng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    UTParams p = random_params(36, rng, 1.0);
    const auto psi = state_from_params(p, cfg);
    CHECK(std::abs(psi.amplitudes().squaredNorm() - 1.0) < 1e-10);
    // Real diagonal shifts cancel in M - M^dagger.
    for (int i = 0, k = 0; i < 36; k += 36 - i, ++i) p.entries[k] += Complex(rng.normal(), 0.0);
    CHECK((state_from_params(p, cfg).amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(state_from_params(UTParams::zeros(16), cfg), std::invalid_argument);
}

TEST_CASE("gap examples") {
  const auto part = PartitionSpec::four_sites();
  const auto product = equal_superposition(Dims({2, 3, 2, 2}));
  for (double q : {0.5, 1.0, 2.0}) CHECK(std::abs(gap(product, part, q)) < 1e-12);
  for (double q : {0.5, 1.0, 2.0}) CHECK(std::abs(gap(bell_ab(), part, q)) < 1e-12);

  EntropyConfig bits;
  bits.log_base = LogBase::two;
  const auto s1 = reference(1);
  CHECK(std::abs(gap(s1.state, s1.partition, 1.0, bits) - (-0.00286)) <= 0.01);
  const auto s2 = reference(2);
  CHECK(std::abs(gap(s2.state, s2.partition, 1.0, bits) - (-0.00596)) <= 0.01);
}

TEST_CASE("property: gap equals S(AA') - S_R/2 from independent calls") {
  ShotRng rng(13);
  const std::vector<std::vector<int>> dims_set{{2, 2, 2, 2}, {3, 3, 2, 2}, {2, 3, 3, 2}};
  for (int trial = 0; trial < 30; ++trial) {
    const auto& dims = dims_set[trial % 3];
    const auto psi = random_pure(Dims(dims), rng);
    const double q = 0.1 + 2.9 * rng.uniform();
    const double s_aap = von_neumann(partial_trace(psi, std::vector<int>{0, 2}));
    const double s_r =
        reflected_entropy(partial_trace(psi, std::vector<int>{0, 1}), dims[0], dims[1], q);
    CHECK(std::abs(gap(psi, PartitionSpec::four_sites(), q) - (s_aap - 0.5 * s_r)) <= 1e-12);
  }
}

TEST_CASE("penalized_gap examples") {
  const auto part = PartitionSpec::four_sites();
  const auto pairs = two_bell_pairs();
  CHECK(penalized_gap(pairs, part, 1.0) == gap(pairs, part, 1.0));
  const auto ghz = ghz4();
  CHECK(std::abs(penalized_gap(ghz, part, 1.0) - (gap(ghz, part, 1.0) + std::log(2.0))) < 1e-12);
  CHECK(std::abs(penalized_gap(ghz, part, 1.0, 2.5) - (gap(ghz, part, 1.0) + 2.5 * std::log(2.0))) <
        1e-12);
}

TEST_CASE("property: penalized_gap >= gap, equal iff Max(I3) <= 0") {
  ShotRng rng(55);
  int active = 0, inactive = 0;
  for (int trial = 0; trial < 60; ++trial) {
    // Generator: mix Haar states with GHZ-like superpositions so both branches occur.
    QuditState psi = random_pure(Dims({2, 2, 2, 2}), rng);
    if (trial % 2) {
      CVector v = ghz4().amplitudes() + 0.3 * rng.uniform() * psi.amplitudes();
      psi = QuditState::normalized(Dims({2, 2, 2, 2}), v);
    }
    const auto part = PartitionSpec::four_sites();
    const double g = gap(psi, part, 1.0), pg = penalized_gap(psi, part, 1.0);
    const double t = max_tmi(psi, part);
    CHECK(pg >= g);
    if (t <= 0.0) {
      CHECK(pg == g);
      ++inactive;
    } else {
      CHECK(pg > g);
      ++active;
    }
  }
  CHECK(active > 0);
  CHECK(inactive > 0);
}

TEST_CASE("evaluate_objective reports consistent terms") {
  ShotRng rng(3);
  auto cfg = config_for({3, 3, 2, 2}, 0.7, true);
  const auto psi = random_pure(cfg.dims, rng);
  const auto terms = evaluate_objective(psi, cfg);
  CHECK(std::abs(terms.gap - gap(psi, cfg.partition, cfg.q)) < 1e-12);
  CHECK(std::abs(terms.gap - (terms.s_aap - 0.5 * terms.s_r)) < 1e-15);
  CHECK(std::abs(terms.objective - penalized_gap(psi, cfg.partition, cfg.q)) < 1e-12);
}

TEST_CASE("gradient matches central finite differences componentwise") {
  ShotRng rng(808);
  const double h = 1e-5;
  for (double q : {0.5, 1.0, 2.0}) {
    for (bool penalty : {false, true}) {
      auto cfg = config_for({2, 2, 2, 2}, q, penalty);
      const UTParams p = random_params(16, rng, 1.0 / 16);
      const auto grad = objective_gradient(p, cfg);
      auto x = p.to_real();
      REQUIRE(grad.size() == x.size());
      int bad = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = x[i];
        x[i] = saved + h;
        const double up = objective_value(UTParams::from_real(16, x), cfg);
        x[i] = saved - h;
        const double down = objective_value(UTParams::from_real(16, x), cfg);
        x[i] = saved;
        if (!grad_close(grad[i], (up - down) / (2 * h))) ++bad;
      }
      CAPTURE(q);
      CAPTURE(penalty);
      CHECK(bad == 0);
    }
  }
}

TEST_CASE("directional derivative matches the secant at [3,3,2,2]") {
  ShotRng rng(909);
  const double h = 1e-5;
  for (double q : {0.5, 1.0, 2.0}) {
    auto cfg = config_for({3, 3, 2, 2}, q);
    const UTParams p = random_params(36, rng, 1.0 / 36);
    const auto grad = objective_gradient(p, cfg);
    auto x = p.to_real();
    std::vector<double> v(x.size());
    double vnorm = 0.0;
    for (auto& c : v) {
      c = rng.normal();
      vnorm += c * c;
    }
    for (auto& c : v) c /= std::sqrt(vnorm);
    double analytic = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) analytic += grad[i] * v[i];
    auto shifted = [&](double t) {
      std::vector<double> y(x);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * v[i];
      return objective_value(UTParams::from_real(36, y), cfg);
    };
    const double secant = (shifted(h) - shifted(-h)) / (2 * h);
    CHECK(std::abs(analytic - secant) <= 1e-6);
  }
}

TEST_CASE("gradient of the real diagonal parts vanishes") {
  ShotRng rng(5);
  auto cfg = config_for({2, 2, 2, 2}, 1.0);
  const auto grad = objective_gradient(random_params(16, rng, 1.0 / 16), cfg);
  for (int i = 0, k = 0; i < 16; k += 16 - i, ++i) CHECK(std::abs(grad[2 * k]) < 1e-12);
}

TEST_CASE("q = 2 bound on random states") {
  ShotRng rng(2222);
  for (const auto& dims : {std::vector<int>{2, 2, 2, 2}, {3, 3, 2, 2}, {4, 4, 2, 2}})
    for (int trial = 0; trial < 100; ++trial)
      CHECK(gap(random_pure(Dims(dims), rng), PartitionSpec::four_sites(), 2.0) >= -1e-9);
}

TEST_CASE("ObjectiveConfig validation") {
  auto cfg = config_for({2, 2, 2, 2}, 1.0);
  CHECK_NOTHROW(cfg.validate());
  cfg.q = 0.0;
  CHECK_THROWS(cfg.validate());
  cfg.q = 1.0;
  cfg.penalty_weight = -1.0;
  CHECK_THROWS(cfg.validate());
  cfg.penalty_weight = 1.0;
  cfg.partition = PartitionSpec{{0}, {1}, {2}, {}};
  CHECK_THROWS(cfg.validate());
}
