#include "defectchain/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "defectchain/errors.hpp"

namespace defectchain {

ReducedDensity reduce(const StateVector& psi, std::span<const int> sites) {
  const SectorBasis& basis = *psi.basis();
  const int L = basis.chain_sites();
  if (sites.empty()) throw DomainError("reduce: empty site subset");
  if (sites.size() > kMaxReducedSites) {
    throw DomainError("reduce: subset larger than " + std::to_string(kMaxReducedSites) + " sites");
  }
  std::uint32_t subset_mask = 0;
  for (int s : sites) {
    if (s < 1 || s > L) throw DomainError("reduce: site " + std::to_string(s) + " outside chain");
    const std::uint32_t bit = 1u << (s - 1);
    if (subset_mask & bit) throw DomainError("reduce: repeated site");
    subset_mask |= bit;
  }
  const std::size_t m = sites.size();
  const Eigen::Index dim = Eigen::Index{1} << m;

  // Group amplitudes by the traced-out environment; each group contributes
  // an outer product on the kept qubits.
  std::map<std::uint32_t, Eigen::VectorXcd> groups;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Complex a = psi.amplitudes()(i);
    if (a == Complex(0.0)) continue;
    const std::uint32_t bits = basis[i].bits();
    Eigen::Index local = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if ((bits >> (sites[k] - 1)) & 1u) local |= Eigen::Index{1} << (m - 1 - k);
    }
    auto [it, inserted] = groups.try_emplace(bits & ~subset_mask);
    if (inserted) it->second = Eigen::VectorXcd::Zero(dim);
    it->second(local) += a;
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [env, v] : groups) rho += v * v.adjoint();
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw DomainError("reduce: zero state");
  rho /= tr;
  return ReducedDensity{std::vector<int>(sites.begin(), sites.end()), std::move(rho)};
}

namespace {

constexpr double kPsdFloor = 1e-12;

Eigen::VectorXd clipped_eigenvalues(const Eigen::VectorXd& values, const char* what) {
  Eigen::VectorXd out = values;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (out(i) < -kPsdFloor) {
      throw DomainError(std::string(what) + ": matrix is not positive semidefinite (eigenvalue " +
                        std::to_string(out(i)) + ")");
    }
    out(i) = std::max(out(i), 0.0);
  }
  return out;
}

}  // namespace

double concurrence(const ReducedDensity& rho) {
  const Eigen::MatrixXcd& r = rho.matrix;
  if (rho.sites.size() != 2 || r.rows() != 4 || r.cols() != 4) {
    throw DomainError("concurrence: needs a two-qubit density matrix");
  }
  if ((r - r.adjoint()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("concurrence: density matrix is not Hermitian");
  }
  if (std::abs(r.trace() - Complex(1.0)) > 1e-10) {
    throw DomainError("concurrence: density matrix trace differs from 1");
  }
  Eigen::Matrix4cd flip = Eigen::Matrix4cd::Zero();
  flip(0, 3) = -1.0;
  flip(1, 2) = 1.0;
  flip(2, 1) = 1.0;
  flip(3, 0) = -1.0;
  const Eigen::Matrix4cd rho4 = r;
  const Eigen::Matrix4cd tilde = flip * rho4.conjugate() * flip;

  // Square roots of eig(rho tilde) equal the eigenvalues of the Hermitian
  // sqrt(rho) tilde sqrt(rho).
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> rho_eig(rho4);
  const Eigen::Vector4d w = clipped_eigenvalues(rho_eig.eigenvalues(), "concurrence");
  const Eigen::Matrix4cd sqrt_rho = rho_eig.eigenvectors() *
                                    w.cwiseSqrt().cast<Complex>().asDiagonal() *
                                    rho_eig.eigenvectors().adjoint();
  Eigen::Matrix4cd inner = sqrt_rho * tilde * sqrt_rho;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> inner_eig(inner, Eigen::EigenvaluesOnly);
  Eigen::Vector4d lambda = clipped_eigenvalues(inner_eig.eigenvalues(), "concurrence").cwiseSqrt();
  std::sort(lambda.data(), lambda.data() + 4, std::greater<>());
  return std::clamp(lambda(0) - lambda(1) - lambda(2) - lambda(3), 0.0, 1.0);
}

double global_entanglement(const StateVector& psi) {
  const int L = psi.basis()->chain_sites();
  double purity_sum = 0.0;
  for (int n = 1; n <= L; ++n) {
    const ReducedDensity r = reduce(psi, {n});
    purity_sum += (r.matrix * r.matrix).trace().real();
  }
  return std::clamp(2.0 - 2.0 * purity_sum / L, 0.0, 1.0);
}

double fidelity(const StateVector& psi, const StateVector& target) {
  require_same_basis(*psi.basis(), *target.basis(), "fidelity");
  return std::norm(target.amplitudes().dot(psi.amplitudes()));
}

double phase_maximized_fidelity(const StateVector& psi, const StateVector& target,
                                std::span<const int> phase_sites) {
  require_same_basis(*psi.basis(), *target.basis(), "phase_maximized_fidelity");
  const SectorBasis& basis = *psi.basis();
  std::vector<std::vector<double>> patterns;
  double overlap = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double t = std::abs(target.amplitudes()(i));
    if (t == 0.0) continue;
    overlap += t * std::abs(psi.amplitudes()(i));
    std::vector<double> p;
    for (int s : phase_sites) p.push_back(basis[i].excited(s) ? 1.0 : 0.0);
    patterns.push_back(std::move(p));
  }
  // Affine independence of the patterns lets every component's phase be
  // aligned independently, so the optimum is the sum of moduli.
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < patterns.size(); ++i) {
    std::vector<double> r(phase_sites.size());
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = patterns[i][k] - patterns[0][k];
    rows.push_back(std::move(r));
  }
  std::size_t rank = 0;
  for (std::size_t col = 0; col < phase_sites.size() && rank < rows.size(); ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && std::abs(rows[pivot][col]) < 1e-12) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r == rank) continue;
      const double f = rows[r][col] / rows[rank][col];
      for (std::size_t k = col; k < rows[r].size(); ++k) rows[r][k] -= f * rows[rank][k];
    }
    ++rank;
  }
  if (rank != rows.size()) {
    throw DomainError("phase_maximized_fidelity: target components cannot be phased independently");
  }
  return overlap * overlap;
}

Complex branch_phase(BellBranch branch) noexcept {
  switch (branch) {
    case BellBranch::plus: return {1.0, 0.0};
    case BellBranch::minus: return {-1.0, 0.0};
    case BellBranch::plus_i: return {0.0, 1.0};
    case BellBranch::minus_i: return {0.0, -1.0};
  }
  return {1.0, 0.0};
}

std::string branch_label(BellBranch branch) {
  switch (branch) {
    case BellBranch::plus: return "+";
    case BellBranch::minus: return "-";
    case BellBranch::plus_i: return "+i";
    case BellBranch::minus_i: return "-i";
  }
  return "+";
}

namespace {

StateVector superposition(const BasisPtr& basis,
                          const std::vector<std::pair<Configuration, Complex>>& terms) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis->size());
  for (const auto& [c, a] : terms) v(basis->index_of(c)) += a;
  return StateVector(basis, v);
}

void require_distinct(std::initializer_list<int> sites, int L) {
  std::vector<int> wrapped;
  for (int s : sites) wrapped.push_back(wrap_site(s, L));
  std::sort(wrapped.begin(), wrapped.end());
  if (std::adjacent_find(wrapped.begin(), wrapped.end()) != wrapped.end()) {
    throw DomainError("target sites must be distinct");
  }
}

}  // namespace

StateVector bell_target(BasisPtr basis, int n1, int n2, BellBranch branch) {
  const int L = basis->chain_sites();
  require_distinct({n1, n2}, L);
  const double r = 1.0 / std::sqrt(2.0);
  return superposition(basis, {{Configuration::from_sites({n1}, L), r},
                               {Configuration::from_sites({n2}, L), r * branch_phase(branch)}});
}

StateVector w_target(BasisPtr basis, int n1, int n2, int n3) {
  const int L = basis->chain_sites();
  require_distinct({n1, n2, n3}, L);
  const double r = 1.0 / std::sqrt(3.0);
  return superposition(basis, {{Configuration::from_sites({n1}, L), r},
                               {Configuration::from_sites({n2}, L), r},
                               {Configuration::from_sites({n3}, L), r}});
}

StateVector bound_pair_bell_target(BasisPtr basis, int n1, BellBranch branch) {
  const int L = basis->chain_sites();
  if (L < 3) throw DomainError("bound pair needs at least three sites");
  const double r = 1.0 / std::sqrt(2.0);
  return superposition(basis, {{Configuration::from_sites({n1 - 1, n1}, L), r},
                               {Configuration::from_sites({n1, n1 + 1}, L), r * branch_phase(branch)}});
}

StateVector three_defect_state(BasisPtr basis, int n1, char which) {
  const int L = basis->chain_sites();
  if (L < 3) throw DomainError("three-defect states need at least three sites");
  const auto c1 = Configuration::from_sites({n1}, L);
  const auto c2 = Configuration::from_sites({n1 + 1}, L);
  const auto c3 = Configuration::from_sites({n1 + 2}, L);
  const double s2 = std::sqrt(2.0);
  switch (which) {
    case 'a': return superposition(basis, {{c1, 0.5}, {c2, s2 / 2.0}, {c3, 0.5}});
    case 'b': return superposition(basis, {{c1, -1.0 / s2}, {c3, 1.0 / s2}});
    case 'c': return superposition(basis, {{c1, 0.5}, {c2, -s2 / 2.0}, {c3, 0.5}});
    default: break;
  }
  throw DomainError(std::string("unknown three-defect eigenvector '") + which + "'");
}

}  // namespace defectchain
