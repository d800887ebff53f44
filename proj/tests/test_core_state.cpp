#include "doctest.h"
#include "epgap/core_state.hpp"
#include "epgap/entropy.hpp"
#include "test_support.hpp"

using namespace epgap;
using namespace epgap::testing;

namespace {

QuditState basis_state(const Dims& dims, std::size_t index) {
  CVector v = CVector::Zero(dims.total());
  v[index] = 1.0;
  return QuditState(dims, v);
}

QuditState bell_pair() {
  CVector v = CVector::Zero(4);
  v[0] = v[3] = 1.0 / std::sqrt(2.0);
  return QuditState(Dims({2, 2}), v);
}

}  // namespace

TEST_CASE("Dims rejects sites below 2") {
  CHECK_THROWS_AS(Dims({2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Dims(std::vector<int>{}), std::invalid_argument);
  const Dims d({3, 3, 2, 2});
  CHECK(d.total() == 36);
  CHECK(d.to_string() == "[3,3,2,2]");
}

TEST_CASE("QuditState enforces length and norm") {
  CHECK_THROWS_AS(QuditState(Dims({2, 2}), CVector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(QuditState(Dims({2, 2}), CVector::Zero(4)), NumericError);
  CVector v = CVector::Constant(4, 0.5);
  v[0] += 1e-9;
  CHECK_THROWS_AS(QuditState(Dims({2, 2}), v), NumericError);
}

TEST_CASE("equal_superposition") {
  const auto two = equal_superposition(Dims({2, 2}));
  for (int i = 0; i < 4; ++i) CHECK(std::abs(two.amplitudes()[i] - Complex(0.5)) < 1e-15);
  const auto big = equal_superposition(Dims({3, 3, 2, 2}));
  CHECK(big.dim() == 36);
  for (int i = 0; i < 36; ++i) CHECK(std::abs(big.amplitudes()[i] - Complex(1.0 / 6.0)) < 1e-15);
  for (const auto& sites : {std::vector<int>{5, 7}, {2, 3, 4}, {4, 4, 2, 2}, {2, 2, 2, 2, 2, 2}})
    CHECK(std::abs(equal_superposition(Dims(sites)).amplitudes().squaredNorm() - 1.0) < 1e-14);
}

TEST_CASE("density_from_state") {
  const auto zero = density_from_state(basis_state(Dims({2}), 0));
  CHECK(max_abs(zero.matrix() - CMatrix(Eigen::Vector2cd(1, 0).asDiagonal())) < 1e-15);

  const auto bell = density_from_state(bell_pair()).matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const bool corner = (r == 0 || r == 3) && (c == 0 || c == 3);
      CHECK(std::abs(bell(r, c) - Complex(corner ? 0.5 : 0.0)) < 1e-15);
    }

  ShotRng rng(11);
  for (int k = 0; k < 20; ++k) {
    const auto rho = density_from_state(random_pure(Dims({3, 2, 2}), rng)).matrix();
    CHECK(std::abs((rho * rho).trace() - Complex(1.0)) < 1e-12);
  }
}

TEST_CASE("partial_trace basic examples") {
  const std::vector<int> first{0}, second{1};
  const auto bell = partial_trace(bell_pair(), first).matrix();
  CHECK(max_abs(bell - CMatrix(Eigen::Vector2cd(0.5, 0.5).asDiagonal())) < 1e-15);

  // |0> (x) |+>
  CVector v(4);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0, 0.0;
  const auto plus = partial_trace(QuditState(Dims({2, 2}), v), second).matrix();
  CHECK(max_abs(plus - CMatrix::Constant(2, 2, 0.5)) < 1e-15);
}

TEST_CASE("partial_trace input validation") {
  const auto psi = equal_superposition(Dims({2, 3, 2}));
  CHECK_THROWS_AS(partial_trace(psi, std::vector<int>{3}), std::out_of_range);
  CHECK_THROWS_AS(partial_trace(psi, std::vector<int>{1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(psi, std::vector<int>{2, 0}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(psi, std::vector<int>{}), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(density_from_state(psi), std::vector<int>{-1}), std::out_of_range);
}

TEST_CASE("partial_trace composes and matches a brute-force trace") {
  ShotRng rng(2024);
  const std::vector<int> k0{0}, k01{0, 1};
  for (int trial = 0; trial < 25; ++trial) {
    const auto psi = random_pure(Dims({2, 2, 2}), rng);
    const auto direct = partial_trace(psi, k0);
    const auto nested = partial_trace(partial_trace(density_from_state(psi), k01), k0);
    CHECK(max_abs(direct.matrix() - nested.matrix()) < 1e-12);
  }
  // Mixed-radix dims and non-adjacent kept sites against the digit-by-digit oracle.
  const std::vector<int> dims{3, 2, 4, 2};
  const std::vector<std::vector<int>> keeps{{0}, {1, 3}, {0, 2}, {0, 1, 2}, {2}};
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = random_pure(Dims(dims), rng);
    for (const auto& keep : keeps) {
      const CMatrix oracle = brute_reduced(psi.amplitudes(), dims, keep);
      CHECK(max_abs(partial_trace(psi, keep).matrix() - oracle) < 1e-12);
      CHECK(max_abs(partial_trace(density_from_state(psi), keep).matrix() - oracle) < 1e-12);
    }
  }
}

TEST_CASE("property: partial_trace preserves trace and Hermiticity") {
  ShotRng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    // Generator: 2-4 sites of dimension 2-4, random non-empty ascending keep set.
    const int n = 2 + static_cast<int>(rng.uniform() * 3);
    std::vector<int> sites;
    for (int i = 0; i < n; ++i) sites.push_back(2 + static_cast<int>(rng.uniform() * 3));
    std::vector<int> keep;
    while (keep.empty())
      for (int i = 0; i < n; ++i)
        if (rng.uniform() < 0.5) keep.push_back(i);
    const auto psi = random_pure(Dims(sites), rng);
    for (const auto& rho : {partial_trace(psi, keep), partial_trace(density_from_state(psi), keep)}) {
      CHECK(std::abs(rho.matrix().trace() - Complex(1.0)) < 1e-12);
      CHECK(max_abs(rho.matrix() - rho.matrix().adjoint()) < 1e-12);
    }
  }
}

TEST_CASE("tracing nothing returns the input exactly") {
  ShotRng rng(8);
  const auto rho = density_from_state(random_pure(Dims({2, 3}), rng));
  const auto same = partial_trace(rho, std::vector<int>{0, 1});
  CHECK(same.matrix() == rho.matrix());
  CHECK(same.dims() == rho.dims());
}

TEST_CASE("reduced densities of an 8-qubit state: dense and reshape paths agree") {
  ShotRng rng(88);
  const auto psi = random_pure(Dims(std::vector<int>(8, 2)), rng);
  const auto dense = density_from_state(psi);
  for (const auto& keep : {std::vector<int>{0, 1, 2, 3}, {2, 3, 4, 5}, {0, 1, 4, 5, 6, 7}}) {
    CHECK(max_abs(partial_trace(psi, keep).matrix() - partial_trace(dense, keep).matrix()) < 1e-12);
  }
}

TEST_CASE("permute_and_group") {
  ShotRng rng(3);
  const auto psi = random_pure(Dims({2, 3, 2}), rng);
  const auto same = permute_and_group(psi, {{0}, {1}, {2}});
  CHECK(same.amplitudes() == psi.amplitudes());

  // |01> -> |10> after swapping the two qubits.
  const auto swapped = permute_and_group(basis_state(Dims({2, 2}), 1), {{1}, {0}});
  CHECK(std::abs(swapped.amplitudes()[2] - Complex(1.0)) < 1e-15);

  const auto six = random_pure(Dims(std::vector<int>(6, 2)), rng);
  const std::vector<std::vector<int>> groups{{0, 1}, {2, 3}, {4}, {5}};
  const auto fused = permute_and_group(six, groups);
  CHECK(fused.dims() == Dims({4, 4, 2, 2}));
  const std::vector<std::pair<std::vector<int>, std::vector<int>>> regions{
      {{0}, {0, 1}}, {{1}, {2, 3}}, {{0, 2}, {0, 1, 4}}, {{1, 3}, {2, 3, 5}}, {{0, 1}, {0, 1, 2, 3}}};
  for (const auto& [fused_sites, raw_sites] : regions)
    CHECK(std::abs(region_entropy(fused, fused_sites, 1.0) - region_entropy(six, raw_sites, 1.0)) <
          1e-12);

  CHECK_THROWS_AS(permute_and_group(six, {{0, 1}, {2, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(permute_and_group(six, {{0, 1}, {1, 2, 3}, {4}, {5}}), std::invalid_argument);
}

TEST_CASE("property: permute_and_group then ungroup is the identity") {
  ShotRng rng(44);
  for (int trial = 0; trial < 40; ++trial) {
    // Generator: 2-5 sites, a random permutation cut into random contiguous groups.
    const int n = 2 + static_cast<int>(rng.uniform() * 4);
    std::vector<int> sites, order;
    for (int i = 0; i < n; ++i) {
      sites.push_back(2 + static_cast<int>(rng.uniform() * 2));
      order.push_back(i);
    }
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(rng.uniform() * (i + 1))]);
    std::vector<std::vector<int>> groups{{}};
    for (int s : order) {
      if (!groups.back().empty() && rng.uniform() < 0.5) groups.emplace_back();
      groups.back().push_back(s);
    }
    const Dims dims(sites);
    const auto psi = random_pure(dims, rng);
    const auto back = ungroup(permute_and_group(psi, groups), dims, groups);
    CHECK((back.amplitudes() - psi.amplitudes()).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("PartitionSpec validation") {
  CHECK_NOTHROW(PartitionSpec::four_sites().validate(4));
  CHECK_THROWS_AS((PartitionSpec{{0}, {1}, {2}, {}}).validate(4), std::invalid_argument);
  CHECK_THROWS_AS((PartitionSpec{{0}, {1}, {2}, {2}}).validate(4), std::invalid_argument);
  CHECK_THROWS_AS((PartitionSpec{{0}, {1}, {2}, {3}}).validate(5), std::invalid_argument);
  CHECK_THROWS_AS((PartitionSpec{{0}, {1}, {2}, {4}}).validate(4), std::invalid_argument);
}
