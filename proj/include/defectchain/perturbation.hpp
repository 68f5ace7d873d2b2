#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "defectchain/hamiltonian.hpp"

namespace defectchain {

enum class ModelKind { two_defect, three_defect, bound_pair };

/// Few-level Hamiltonian over resonant configurations, with closed-form
/// eigenpairs. `matrix`, `vectors` are expressed in `basis` order.
struct EffectiveModel {
  ModelKind kind = ModelKind::two_defect;
  BasisPtr basis;
  std::vector<int> sites;   // n1, n2 | n1, n2, n3 | n1
  Eigen::MatrixXd matrix;
  Eigen::VectorXd energies; // ascending
  Eigen::MatrixXd vectors;  // columns match `energies`
  double frequency = 0.0;   // E+ - E- (two level) or E_a - E_c (three level)
  double coupling = 0.0;    // effective hopping between resonant states
  int order = 1;            // perturbation order of `coupling`
  bool extrapolated = false;
  std::vector<std::string> warnings;
};

/// Two equal defects at cyclic separation mu + 1.
///   mu = 0: diag E1 + d, hopping J/2.
///   mu = 1: diag E1 + d + J^2/(2d), hopping J^2/(4d).
///   mu >= 2: diag E1 + d, hopping (J/2)(J/(2d))^mu, flagged extrapolated.
EffectiveModel two_defect_model(const ChainSpec& spec, int n1, int n2);

/// Three adjacent equal defects n1, n1+1, n1+2: tridiagonal {E1 + d, J/2}.
EffectiveModel three_defect_model(const ChainSpec& spec, int n1);

/// Two-excitation bound pair sharing the single defect n1: states
/// phi(n1-1, n1), phi(n1, n1+1) with splitting J^2 / (2(J Delta + d)).
EffectiveModel bound_pair_model(const ChainSpec& spec, int n1);

/// T_mu = (2 pi / J) (2d / J)^mu.
double oscillation_period(double hopping, double offset, int mu);
/// Uses the common defect offset of `spec`.
double oscillation_period(const ChainSpec& spec, int mu);

/// Return probability (1 + cos(w t)) / 2 of the start site in a two-level model.
double two_level_return_probability(const EffectiveModel& model, double t);

/// Site probabilities {n1, n2, n3} for an excitation started on n2.
std::array<double, 3> three_level_probabilities(const EffectiveModel& model, double t);

/// pi k / (2 (E+ - E-)) for odd k <= k_max.
std::vector<double> bell_times(const EffectiveModel& model, int k_max);

/// Every instant with cos(w t) = 0, first `count` of them.
std::vector<double> half_crossing_times(const EffectiveModel& model, std::size_t count);

/// [(-1)^k arccos(-1/3) + 2 pi (k - floor(k/2))] / (E_a - E_c), k = 0..k_max.
std::vector<double> w_times(const EffectiveModel& model, int k_max);

/// First `count` solutions of cos((E_a - E_c) t) = -1/3 with t > 0.
std::vector<double> w_crossing_times(const EffectiveModel& model, std::size_t count);

/// 2 (J Delta + d) [pi/2 + k pi] / J^2 for odd k <= k_max.
std::vector<double> bound_pair_times(const EffectiveModel& model, int k_max);

struct BandPrediction {
  std::string label;
  double center = 0.0;
  double half_width = 0.0;
  std::size_t expected_count = 0;
};

/// Unperturbed band taxonomy for N = 1 (any defects) and N = 2 (no defect
/// or one defect). Periodic chains only.
std::vector<BandPrediction> band_layout(const ChainSpec& spec, int excitations);

/// 3 J^2 / (J Delta + d_max), floored at 1e-9 J.
double band_tolerance(const ChainSpec& spec);

struct BandMembership {
  std::size_t members = 0;
  double max_deviation = 0.0;  // max |E - center| over members
  double lowest = 0.0;
  double highest = 0.0;
};

struct BandAssignment {
  std::vector<int> band_of;  // per eigenvalue, -1 if none or ambiguous
  std::vector<BandMembership> bands;
  std::size_t unassigned = 0;
  std::size_t ambiguous = 0;
};

/// Place each eigenvalue in the band whose widened interval
/// [center - half_width - tol, center + half_width + tol] contains it.
BandAssignment assign_bands(const Eigen::VectorXd& eigenvalues,
                            const std::vector<BandPrediction>& bands, double tolerance);

}  // namespace defectchain
