#include "epgap/core_state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace epgap {

namespace {

void check_sites(const Dims& dims, std::span<const int> sites) {
  std::vector<bool> seen(dims.num_sites(), false);
  for (int s : sites) {
    if (s < 0 || static_cast<std::size_t>(s) >= dims.num_sites())
      throw std::out_of_range("site index " + std::to_string(s) +
                              " out of range for dims " + dims.to_string());
    if (seen[s])
      throw std::invalid_argument("duplicate site index " + std::to_string(s));
    seen[s] = true;
  }
}

}  // namespace

Dims::Dims(std::vector<int> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("dims must list at least one site");
  total_ = 1;
  for (int d : sites_) {
    if (d < 2)
      throw std::invalid_argument("every local dimension must be >= 2, got " +
                                  std::to_string(d));
    total_ *= static_cast<std::size_t>(d);
  }
}

std::size_t Dims::total_of(std::span<const int> site_indices) const {
  std::size_t n = 1;
  for (int s : site_indices) n *= static_cast<std::size_t>(sites_.at(s));
  return n;
}

Dims Dims::select(std::span<const int> site_indices) const {
  std::vector<int> out;
  out.reserve(site_indices.size());
  for (int s : site_indices) out.push_back(sites_.at(s));
  return Dims(std::move(out));
}

std::string Dims::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < sites_.size(); ++i) os << (i ? "," : "") << sites_[i];
  os << ']';
  return os.str();
}

QuditState::QuditState(Dims dims, CVector amplitudes)
    : dims_(std::move(dims)), amplitudes_(std::move(amplitudes)) {
  if (static_cast<std::size_t>(amplitudes_.size()) != dims_.total())
    throw std::invalid_argument("amplitude count " + std::to_string(amplitudes_.size()) +
                                " does not match dims " + dims_.to_string());
  const double norm2 = amplitudes_.squaredNorm();
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kNormTolerance)
    throw NumericError("state is not normalized (squared norm " +
                       std::to_string(norm2) + ")");
}

QuditState QuditState::normalized(Dims dims, CVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw NumericError("cannot normalize a zero or non-finite amplitude vector");
  amplitudes /= norm;
  return QuditState(std::move(dims), std::move(amplitudes));
}

DensityMatrix::DensityMatrix(Dims dims, CMatrix matrix)
    : dims_(std::move(dims)), matrix_(std::move(matrix)) {
  const auto n = static_cast<Eigen::Index>(dims_.total());
  if (matrix_.rows() != n || matrix_.cols() != n)
    throw std::invalid_argument("density matrix shape does not match dims " +
                                dims_.to_string());
  const double herm = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kTolerance))
    throw NumericError("density matrix is not Hermitian (deviation " +
                       std::to_string(herm) + ")");
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > kTolerance)
    throw NumericError("density matrix trace is " + std::to_string(tr.real()));
}

void PartitionSpec::validate(std::size_t num_sites) const {
  if (a.empty() || b.empty() || ap.empty() || bp.empty())
    throw std::invalid_argument("every party must hold at least one site");
  std::vector<int> seen(num_sites, 0);
  for (const auto* party : {&a, &b, &ap, &bp}) {
    for (int s : *party) {
      if (s < 0 || static_cast<std::size_t>(s) >= num_sites)
        throw std::invalid_argument("partition site " + std::to_string(s) + " out of range");
      if (seen[s]++)
        throw std::invalid_argument("partition site " + std::to_string(s) + " used twice");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw std::invalid_argument("partition does not cover every site");
}

std::vector<int> join_sites(std::initializer_list<std::span<const int>> parts) {
  std::vector<int> out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<int> complement_sites(const Dims& dims, std::span<const int> sites) {
  std::vector<int> out;
  for (int s = 0; s < static_cast<int>(dims.num_sites()); ++s)
    if (std::find(sites.begin(), sites.end(), s) == sites.end()) out.push_back(s);
  return out;
}

std::vector<std::size_t> site_offsets(const Dims& dims, std::span<const int> sites) {
  const std::size_t n = dims.num_sites();
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n - 1; i > 0; --i) stride[i - 1] = stride[i] * dims[i];

  std::vector<std::size_t> offsets{0};
  for (int s : sites) {
    const int d = dims[s];
    std::vector<std::size_t> next;
    next.reserve(offsets.size() * d);
    for (std::size_t base : offsets)
      for (int k = 0; k < d; ++k) next.push_back(base + k * stride[s]);
    offsets = std::move(next);
  }
  return offsets;
}

CMatrix reshape_state(const QuditState& psi, std::span<const int> row_sites,
                      std::span<const int> col_sites) {
  const auto all = join_sites({row_sites, col_sites});
  check_sites(psi.dims(), all);
  if (all.size() != psi.dims().num_sites())
    throw std::invalid_argument("row and column sites must cover every site");
  const auto rows = site_offsets(psi.dims(), row_sites);
  const auto cols = site_offsets(psi.dims(), col_sites);
  const auto& amp = psi.amplitudes();
  CMatrix m(rows.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r) m(r, c) = amp[rows[r] + cols[c]];
  return m;
}

CVector unreshape_state(const CMatrix& matrix, const Dims& dims,
                        std::span<const int> row_sites, std::span<const int> col_sites) {
  const auto rows = site_offsets(dims, row_sites);
  const auto cols = site_offsets(dims, col_sites);
  if (static_cast<std::size_t>(matrix.rows()) != rows.size() ||
      static_cast<std::size_t>(matrix.cols()) != cols.size())
    throw std::invalid_argument("matrix shape does not match the site split");
  CVector out(dims.total());
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t r = 0; r < rows.size(); ++r) out[rows[r] + cols[c]] = matrix(r, c);
  return out;
}

CMatrix reduced_matrix(const QuditState& psi, std::span<const int> sites) {
  const auto rest = complement_sites(psi.dims(), sites);
  const CMatrix m = reshape_state(psi, sites, rest);
  CMatrix rho = m * m.adjoint();
  // Exact Hermiticity; the product is Hermitian only up to rounding.
  return (rho + rho.adjoint()) * 0.5;
}

QuditState equal_superposition(const Dims& dims) {
  const double amp = 1.0 / std::sqrt(static_cast<double>(dims.total()));
  return QuditState(dims, CVector::Constant(dims.total(), Complex(amp, 0.0)));
}

DensityMatrix density_from_state(const QuditState& psi) {
  const auto& v = psi.amplitudes();
  return DensityMatrix(psi.dims(), v * v.adjoint());
}

namespace {

void check_keep(const Dims& dims, std::span<const int> keep) {
  if (keep.empty()) throw std::invalid_argument("keep must name at least one site");
  check_sites(dims, keep);
  if (!std::is_sorted(keep.begin(), keep.end()))
    throw std::invalid_argument("keep sites must be listed in ascending order");
}

}  // namespace

DensityMatrix partial_trace(const QuditState& psi, std::span<const int> keep) {
  check_keep(psi.dims(), keep);
  return DensityMatrix(psi.dims().select(keep), reduced_matrix(psi, keep));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
  check_keep(rho.dims(), keep);
  if (keep.size() == rho.dims().num_sites()) return rho;
  const auto rest = complement_sites(rho.dims(), keep);
  const auto rows = site_offsets(rho.dims(), keep);
  const auto traced = site_offsets(rho.dims(), rest);
  const auto& m = rho.matrix();
  CMatrix out = CMatrix::Zero(rows.size(), rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i) {
      Complex acc = 0.0;
      for (std::size_t t : traced) acc += m(rows[i] + t, rows[j] + t);
      out(i, j) = acc;
    }
  return DensityMatrix(rho.dims().select(keep), (out + out.adjoint()) * 0.5);
}

namespace {

std::vector<int> flatten_groups(const Dims& dims,
                                const std::vector<std::vector<int>>& groups) {
  std::vector<int> order;
  for (const auto& g : groups) {
    if (g.empty()) throw std::invalid_argument("groups must be non-empty");
    order.insert(order.end(), g.begin(), g.end());
  }
  check_sites(dims, order);
  if (order.size() != dims.num_sites())
    throw std::invalid_argument("groups must partition every site");
  return order;
}

Dims fused_dims(const Dims& dims, const std::vector<std::vector<int>>& groups) {
  std::vector<int> out;
  for (const auto& g : groups) out.push_back(static_cast<int>(dims.total_of(g)));
  return Dims(std::move(out));
}

}  // namespace

QuditState permute_and_group(const QuditState& psi,
                             const std::vector<std::vector<int>>& groups) {
  const auto order = flatten_groups(psi.dims(), groups);
  const auto src = site_offsets(psi.dims(), order);
  const auto& amp = psi.amplitudes();
  CVector out(amp.size());
  for (std::size_t k = 0; k < src.size(); ++k) out[k] = amp[src[k]];
  return QuditState(fused_dims(psi.dims(), groups), std::move(out));
}

QuditState ungroup(const QuditState& fused, const Dims& original,
                   const std::vector<std::vector<int>>& groups) {
  const auto order = flatten_groups(original, groups);
  if (!(fused.dims() == fused_dims(original, groups)))
    throw std::invalid_argument("fused state does not match the grouping");
  const auto dst = site_offsets(original, order);
  const auto& amp = fused.amplitudes();
  CVector out(amp.size());
  for (std::size_t k = 0; k < dst.size(); ++k) out[dst[k]] = amp[k];
  return QuditState(original, std::move(out));
}

}  // namespace epgap
