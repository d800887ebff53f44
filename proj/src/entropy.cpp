#include "epgap/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "epgap/spectral.hpp"

namespace epgap {

namespace {

void check_q(double q) {
  if (!(q > 0.0) || !std::isfinite(q))
    throw std::invalid_argument("Renyi index must be a positive finite number");
}

std::vector<int> sorted_union(std::span<const int> x, std::span<const int> y) {
  std::vector<int> out(x.begin(), x.end());
  out.insert(out.end(), y.begin(), y.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw std::invalid_argument("regions must be disjoint");
  return out;
}

std::vector<int> sorted(std::span<const int> x) { return sorted_union(x, {}); }

}  // namespace

void EntropyConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps <= 1e-6))
    throw std::invalid_argument("clip_eps must lie in (0, 1e-6]");
}

double EntropyConfig::nats_to_base() const {
  return log_base == LogBase::two ? 1.0 / std::numbers::ln2 : 1.0;
}

Spectrum hermitian_spectrum(const CMatrix& matrix, double clip_eps) {
  if (matrix.rows() != matrix.cols()) throw std::invalid_argument("matrix must be square");
  const double herm = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (!(herm <= kHermitianTolerance))
    throw NumericError("matrix is not Hermitian (deviation " + std::to_string(herm) + ")");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver((matrix + matrix.adjoint()) * 0.5,
                                                Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigensolver did not converge");
  Spectrum out;
  out.clip_eps = clip_eps;
  const auto& ev = solver.eigenvalues();
  for (Eigen::Index i = ev.size() - 1; i >= 0; --i)
    out.eigenvalues.push_back(std::abs(ev[i]) < clip_eps ? 0.0 : ev[i]);
  return out;
}

Spectrum hermitian_spectrum(const DensityMatrix& rho, double clip_eps) {
  return hermitian_spectrum(rho.matrix(), clip_eps);
}

double von_neumann(const Spectrum& spectrum, const EntropyConfig& config) {
  double s = 0.0;
  for (double l : spectrum.eigenvalues)
    if (l > 0.0) s -= l * std::log(l);
  return std::max(s, 0.0) * config.nats_to_base();
}

double von_neumann(const DensityMatrix& rho, const EntropyConfig& config) {
  return von_neumann(hermitian_spectrum(rho, config.clip_eps), config);
}

double renyi(const Spectrum& spectrum, double q, const EntropyConfig& config) {
  check_q(q);
  if (q == 1.0) return von_neumann(spectrum, config);
  double sum = 0.0;
  for (double l : spectrum.eigenvalues)
    if (l > 0.0) sum += std::pow(l, q);
  return std::max(std::log(sum) / (1.0 - q), 0.0) * config.nats_to_base();
}

double renyi(const DensityMatrix& rho, double q, const EntropyConfig& config) {
  return renyi(hermitian_spectrum(rho, config.clip_eps), q, config);
}

double region_entropy(const QuditState& psi, std::span<const int> sites, double q,
                      const EntropyConfig& config) {
  return renyi(hermitian_spectrum(reduced_matrix(psi, sites), config.clip_eps), q, config);
}

double mutual_info(const QuditState& psi, std::span<const int> x, std::span<const int> y,
                   const EntropyConfig& config) {
  if (x.empty() || y.empty()) throw std::invalid_argument("regions must be non-empty");
  const auto xy = sorted_union(x, y);
  return region_entropy(psi, sorted(x), 1.0, config) +
         region_entropy(psi, sorted(y), 1.0, config) - region_entropy(psi, xy, 1.0, config);
}

double tmi(const QuditState& psi, std::span<const int> x, std::span<const int> y,
           std::span<const int> z, const EntropyConfig& config) {
  const auto xz = sorted_union(x, z);
  sorted_union(xz, y);
  return mutual_info(psi, x, y, config) + mutual_info(psi, y, z, config) -
         mutual_info(psi, y, xz, config);
}

std::vector<double> all_tmi(const QuditState& psi, const PartitionSpec& partition,
                            const EntropyConfig& config) {
  partition.validate(psi.dims().num_sites());
  const auto& [a, b, ap, bp] = partition;
  return {tmi(psi, a, b, ap, config), tmi(psi, a, b, bp, config),
          tmi(psi, a, ap, bp, config), tmi(psi, b, ap, bp, config)};
}

double max_tmi(const QuditState& psi, const PartitionSpec& partition,
               const EntropyConfig& config) {
  const auto values = all_tmi(psi, partition, config);
  return *std::max_element(values.begin(), values.end());
}

EntropyDerivative entropy_with_derivative(const CMatrix& rho, double q,
                                          const EntropyConfig& config) {
  check_q(q);
  const EigenSystem eig = hermitian_eigensystem(rho);
  const double scale = config.nats_to_base();
  const Eigen::Index n = eig.values.size();
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(n);
  double value = 0.0;
  if (q == 1.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double l = eig.values[i];
      if (l < config.clip_eps) continue;
      value -= l * std::log(l);
      weight[i] = -std::log(l) - 1.0;
    }
  } else {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (eig.values[i] >= config.clip_eps) sum += std::pow(eig.values[i], q);
    value = std::log(sum) / (1.0 - q);
    const double pre = q / ((1.0 - q) * sum);
    for (Eigen::Index i = 0; i < n; ++i)
      if (eig.values[i] >= config.clip_eps) weight[i] = pre * std::pow(eig.values[i], q - 1.0);
  }
  weight *= scale;
  EntropyDerivative out;
  out.value = value * scale;
  out.derivative = eig.vectors * weight.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  return out;
}

}  // namespace epgap
