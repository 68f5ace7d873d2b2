#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "defectchain/evolve.hpp"

namespace defectchain {

/// Largest subset `reduce` accepts.
inline constexpr std::size_t kMaxReducedSites = 4;

/// Density matrix of a few qubits. Row/column index bit (m-1-k) holds the
/// state of sites[k], so sites[0] is the most significant qubit; 1 means
/// excited.
struct ReducedDensity {
  std::vector<int> sites;
  Eigen::MatrixXcd matrix;
};

/// Partial trace of |psi><psi| (normalized) over all sites not in `sites`.
ReducedDensity reduce(const StateVector& psi, std::span<const int> sites);
inline ReducedDensity reduce(const StateVector& psi, std::initializer_list<int> sites) {
  return reduce(psi, std::span<const int>(sites.begin(), sites.size()));
}

/// Wootters concurrence of a two-qubit density matrix.
double concurrence(const ReducedDensity& rho);

/// Meyer-Wallach Q = 2 - (2/L) sum_n tr(rho_n^2).
double global_entanglement(const StateVector& psi);

/// |<target|psi>|^2.
double fidelity(const StateVector& psi, const StateVector& target);

/// max over per-site z-phases on `phase_sites` of |<target_phi|psi>|^2.
/// Requires the target's support configurations to be independently
/// phaseable from those sites (affinely independent occupation patterns).
double phase_maximized_fidelity(const StateVector& psi, const StateVector& target,
                                std::span<const int> phase_sites);

/// Relative phase of the second component of a Bell-type target.
enum class BellBranch { plus, minus, plus_i, minus_i };

Complex branch_phase(BellBranch branch) noexcept;
std::string branch_label(BellBranch branch);
inline constexpr BellBranch kAllBranches[] = {BellBranch::plus, BellBranch::minus,
                                              BellBranch::plus_i, BellBranch::minus_i};

/// (phi(n1) + phase phi(n2)) / sqrt 2
StateVector bell_target(BasisPtr basis, int n1, int n2, BellBranch branch = BellBranch::plus);
/// (phi(n1) + phi(n2) + phi(n3)) / sqrt 3
StateVector w_target(BasisPtr basis, int n1, int n2, int n3);
/// (phi(n1-1, n1) + phase phi(n1, n1+1)) / sqrt 2
StateVector bound_pair_bell_target(BasisPtr basis, int n1, BellBranch branch = BellBranch::plus);

/// Eigenvectors of the three-adjacent-defect block on n1, n1+1, n1+2:
/// 'a' = [1, sqrt2, 1]/2, 'b' = [-1, 0, 1]/sqrt2, 'c' = [1, -sqrt2, 1]/2.
StateVector three_defect_state(BasisPtr basis, int n1, char which);

}  // namespace defectchain
