#pragma once

#include <Eigen/Dense>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "defectchain/basis.hpp"

namespace defectchain {

/// Static chain parameters. Energies in the same unit as `hopping` (J).
///
/// Hamiltonian: sum_n eps_n/2 sz_n + sum_n [ J Delta/4 sz_n sz_{n+1}
///   + J/8 (s+_n s-_{n+1} + s-_n s+_{n+1}) ] with s+- = sx +- i sy (no 1/2),
/// so one nearest-neighbor hop has matrix element J/2. eps_n = epsilon + d_n.
struct ChainSpec {
  int sites = 8;
  double hopping = 1.0;          // J
  double anisotropy = 0.0;       // Delta, dimensionless
  double level_spacing = 1000.0; // epsilon
  std::map<int, double> defects; // 1-based site -> offset d_n > 0
  Boundary boundary = Boundary::periodic;

  /// Throws DomainError for J <= 0, Delta < 0, non-positive offsets or
  /// defect sites outside 1..L.
  void validate() const;

  /// Soft checks of the epsilon >> J, J Delta, d_n regime.
  std::vector<std::string> regime_warnings() const;

  double site_level(int site) const;
  double defect_offset(int site) const;
  /// E1 = epsilon - J Delta, energy of a lone excitation on a regular site.
  double single_excitation_energy() const { return level_spacing - hopping * anisotropy; }
  /// Offset E0 = -sum eps_n/2 + L J Delta/4 of the all-down state (open
  /// chains count L-1 bonds).
  double ground_state_energy() const;
};

enum class DetuningShape { none, linear, quadratic };

/// Time-dependent level-spacing offset on one site:
/// delta(t) = 0 before `start`, rate*(t-start) or rate*(t-start)^2 after.
struct SiteDetuning {
  int site = 1;
  DetuningShape shape = DetuningShape::none;
  double rate = 0.0;
  double start = 0.0;

  double offset_at(double t) const noexcept;
};

using DetuningSchedule = std::vector<SiteDetuning>;

void validate_schedule(const DetuningSchedule& schedule, int chain_sites);

enum class EnergyReference { ground_state, raw };

/// Real symmetric Hamiltonian block on a basis.
struct SectorMatrix {
  BasisPtr basis;
  Eigen::MatrixXd entries;
};

/// Sector block of the chain Hamiltonian. With the default reference the
/// all-down energy E0 is subtracted; `raw` keeps absolute energies.
SectorMatrix build_static(const ChainSpec& spec, int excitations,
                          EnergyReference reference = EnergyReference::ground_state);

/// Same as build_static with eps_n -> eps_n + delta_n(t).
SectorMatrix build_at_time(const ChainSpec& spec, const DetuningSchedule& schedule,
                           int excitations, double t);

/// Single-excitation block restricted to an excitation sitting on one of
/// `defect_sites`. All listed sites must carry the same offset.
SectorMatrix defect_block(const ChainSpec& spec, std::span<const int> defect_sites);

/// Diagonal contribution sum_{excited n} delta_n(t) for each basis state.
Eigen::VectorXd detuning_diagonal(const SectorBasis& basis, const DetuningSchedule& schedule,
                                  double t);

}  // namespace defectchain
