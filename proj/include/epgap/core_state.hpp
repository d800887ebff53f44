// Qudit state vectors, density matrices, four-party partitions and partial
// traces.
//
// Amplitude index convention: big-endian mixed radix. Site 0 is the most
// significant digit, so for dims [d0, d1, ..., dn-1] the basis state
// |i0, i1, ..., in-1> sits at flat index ((i0 * d1 + i1) * d2 + i2) ...

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace epgap {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Raised when a numerical precondition (normalization, Hermiticity,
/// positivity, finiteness) is violated beyond tolerance.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Local dimensions of an ordered list of sites. Every entry is at least 2.
class Dims {
 public:
  Dims() = default;
  explicit Dims(std::vector<int> sites);

  std::span<const int> sites() const { return sites_; }
  std::size_t num_sites() const { return sites_.size(); }
  int operator[](std::size_t i) const { return sites_.at(i); }

  /// Product of all local dimensions.
  std::size_t total() const { return total_; }

  /// Product of the local dimensions of the listed sites.
  std::size_t total_of(std::span<const int> site_indices) const;

  /// Dimensions of the listed sites, in the listed order.
  Dims select(std::span<const int> site_indices) const;

  bool operator==(const Dims& other) const { return sites_ == other.sites_; }

  std::string to_string() const;

 private:
  std::vector<int> sites_;
  std::size_t total_ = 0;
};

/// Normalized pure state over a list of qudit sites.
class QuditState {
 public:
  static constexpr double kNormTolerance = 1e-10;

  QuditState() = default;

  /// Takes ownership of amplitudes that must already be normalized.
  QuditState(Dims dims, CVector amplitudes);

  /// Rescales the amplitudes to unit norm. Throws on a zero vector.
  static QuditState normalized(Dims dims, CVector amplitudes);

  const Dims& dims() const { return dims_; }
  const CVector& amplitudes() const { return amplitudes_; }
  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }

 private:
  Dims dims_;
  CVector amplitudes_;
};

/// Hermitian, unit-trace operator over the retained sites.
class DensityMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  DensityMatrix() = default;
  DensityMatrix(Dims dims, CMatrix matrix);

  const Dims& dims() const { return dims_; }
  const CMatrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  Dims dims_;
  CMatrix matrix_;
};

/// Assignment of sites to the parties A, B, A' and B'.
struct PartitionSpec {
  std::vector<int> a;
  std::vector<int> b;
  std::vector<int> ap;
  std::vector<int> bp;

  /// Throws std::invalid_argument unless the four lists are non-empty,
  /// disjoint and cover 0..num_sites-1.
  void validate(std::size_t num_sites) const;

  /// Default single-site layout (0, 1, 2, 3).
  static PartitionSpec four_sites() { return {{0}, {1}, {2}, {3}}; }
};

/// Concatenates site lists in the given order.
std::vector<int> join_sites(std::initializer_list<std::span<const int>> parts);

/// Sites of dims not listed in `sites`, ascending.
std::vector<int> complement_sites(const Dims& dims, std::span<const int> sites);

/// Flat-index offsets contributed by each mixed-radix value over `sites`
/// (in the given order), so that for disjoint row/column site lists the
/// amplitude index is row_offsets[r] + col_offsets[c].
std::vector<std::size_t> site_offsets(const Dims& dims,
                                      std::span<const int> sites);

/// Reshapes psi into a matrix with rows indexed by `row_sites` and columns by
/// `col_sites`. The two lists must be disjoint and together cover every site.
CMatrix reshape_state(const QuditState& psi, std::span<const int> row_sites,
                      std::span<const int> col_sites);

/// Inverse of reshape_state for a matrix of the same shape.
CVector unreshape_state(const CMatrix& matrix, const Dims& dims,
                        std::span<const int> row_sites,
                        std::span<const int> col_sites);

/// Reduced density matrix on `sites`, which may be listed in any order; the
/// result's basis follows that order. Never materializes |psi><psi|.
CMatrix reduced_matrix(const QuditState& psi, std::span<const int> sites);

QuditState equal_superposition(const Dims& dims);

DensityMatrix density_from_state(const QuditState& psi);

/// Reduced density matrix on `keep` (ascending, no duplicates).
DensityMatrix partial_trace(const QuditState& psi, std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);

/// Fuses groups of sites into single sites. `groups` must partition the sites;
/// the output's site k is groups[k], with the group's sites in listed order.
QuditState permute_and_group(const QuditState& psi,
                             const std::vector<std::vector<int>>& groups);

/// Undoes permute_and_group given the original dims and the same groups.
QuditState ungroup(const QuditState& fused, const Dims& original,
                   const std::vector<std::vector<int>>& groups);

}  // namespace epgap
